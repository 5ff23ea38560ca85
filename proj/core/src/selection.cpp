#include "symmix/selection.hpp"

#include <cmath>
#include <string>

#include "symmix/error.hpp"

namespace symmix {

std::string to_string(Criterion criterion) { return criterion == Criterion::AIC ? "AIC" : "BIC"; }

InformationCriteria information_criteria(double loglik, int npar, std::size_t n) {
  if (n < 1) throw DomainError("information_criteria: n must be positive");
  if (npar < 0) throw DomainError("information_criteria: npar must be non-negative");
  if (!std::isfinite(loglik)) throw DomainError("information_criteria: loglik must be finite");
  return {-2.0 * loglik + 2.0 * npar, -2.0 * loglik + npar * std::log(static_cast<double>(n))};
}

const SelectionRow& SelectionTable::row(int k) const {
  for (const auto& r : rows) {
    if (r.k == k) return r;
  }
  throw DomainError("selection table has no row for k=" + std::to_string(k));
}

int choose_k(const SelectionTable& table, Criterion criterion) {
  const SelectionRow* best = nullptr;
  double best_value = 0.0;
  for (const auto& row : table.rows) {
    if (!row.unconstrained) continue;
    const double value = criterion == Criterion::AIC ? row.unconstrained->aic : row.unconstrained->bic;
    if (best == nullptr || value < best_value || (value == best_value && row.k < best->k)) {
      best = &row;
      best_value = value;
    }
  }
  if (best == nullptr) throw SelectionError("no candidate k could be fitted");
  return best->k;
}

SelectionTable select_k(const Sample& sample, Criterion criterion, int k_max, const SelectionOptions& options) {
  if (k_max < 1 || k_max % 2 == 0) throw DomainError("k_max must be an odd positive integer");

  SelectionTable table;
  table.criterion = criterion;
  for (int k = 1; k <= k_max; k += 2) {
    SelectionRow row;
    row.k = k;
    try {
      row.unconstrained = fit_em(sample, k, false, options.em);
    } catch (const EstimationError& e) {
      row.failure = e.what();
    }
    if (options.fit_constrained) {
      try {
        if (row.unconstrained) {
          const MixtureParams start = symmetrize(row.unconstrained->params);
          row.constrained = fit_em(sample, k, true, options.em, std::span(&start, 1));
        } else {
          row.constrained = fit_em(sample, k, true, options.em);
        }
      } catch (const EstimationError&) {
        // Reported as an empty cell; the constrained column never drives selection.
      }
    }
    table.rows.push_back(std::move(row));
  }
  table.chosen_k = choose_k(table, criterion);
  return table;
}

}  // namespace symmix
