#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symmix/mixture.hpp"

namespace symmix {

enum class Criterion { AIC, BIC };

std::string to_string(Criterion criterion);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// aic = -2 l + 2 npar, bic = -2 l + npar ln n.
InformationCriteria information_criteria(double loglik, int npar, std::size_t n);

struct SelectionRow {
  int k = 1;
  std::optional<FitResult> unconstrained;
  std::optional<FitResult> constrained;
  /// Message from a failed unconstrained fit; the row is then ineligible.
  std::string failure;
};

struct SelectionTable {
  std::vector<SelectionRow> rows;
  Criterion criterion = Criterion::BIC;
  int chosen_k = 1;

  const SelectionRow& row(int k) const;
};

struct SelectionOptions {
  EmOptions em{};
  /// Also fit the symmetric model for every candidate (reporting only).
  bool fit_constrained = true;
};

/// Index of the minimizing row among eligible unconstrained fits; ties go
/// to the smaller k. Throws SelectionError when no row is eligible.
int choose_k(const SelectionTable& table, Criterion criterion);

/// Fits every odd k in 1..k_max and selects by criterion on the
/// unconstrained fits.
SelectionTable select_k(const Sample& sample, Criterion criterion, int k_max, const SelectionOptions& options);

}  // namespace symmix
