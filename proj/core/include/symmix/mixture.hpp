#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "symmix/random.hpp"
#include "symmix/sample.hpp"

namespace symmix {

/// Odd number of points delta_1 < ... < delta_k equispaced in [-1, 1].
class EquispacedGrid {
public:
  /// Throws DomainError for even or non-positive k.
  explicit EquispacedGrid(int k);

  int k() const noexcept { return static_cast<int>(deltas_.size()); }
  std::span<const double> deltas() const noexcept { return deltas_; }
  double operator[](std::size_t j) const noexcept { return deltas_[j]; }

  friend bool operator==(const EquispacedGrid&, const EquispacedGrid&) = default;

private:
  std::vector<double> deltas_;
};

EquispacedGrid make_grid(int k);

/// Normal mixture with common variance and means alpha + beta * delta_j.
struct MixtureParams {
  EquispacedGrid grid{1};
  double alpha = 0.0;
  double beta = 0.0;
  double sigma2 = 1.0;
  std::vector<double> weights{1.0};

  int k() const noexcept { return grid.k(); }
  double support_point(std::size_t j) const noexcept { return alpha + beta * grid[j]; }

  /// Throws DomainError on a broken invariant (weights off the simplex,
  /// sigma2 <= 0, beta < 0, size mismatch, non-finite entries).
  void validate() const;
};

/// n x k posterior membership probabilities, row-major.
struct Responsibilities {
  std::size_t n = 0;
  int k = 0;
  std::vector<double> z;
  std::vector<double> column_sums;

  double operator()(std::size_t i, int j) const noexcept { return z[i * static_cast<std::size_t>(k) + j]; }
  double& operator()(std::size_t i, int j) noexcept { return z[i * static_cast<std::size_t>(k) + j]; }

  /// Recomputes column_sums from z.
  void update_column_sums();
};

double log_density(double x, const MixtureParams& params);
double log_likelihood(const Sample& sample, const MixtureParams& params);

/// E-step in log space. When loglik is non-null it receives l(params),
/// which falls out of the same pass. Throws NumericalError naming the row
/// whose normalizer is not finite.
Responsibilities e_step(const Sample& sample, const MixtureParams& params, double* loglik = nullptr);

/// Closed-form maximizer of the expected complete-data log-likelihood in
/// (alpha, beta, sigma2), before any sign normalization of beta.
struct LocationScale {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma2 = 0.0;
  bool beta_degenerate = false;
};

LocationScale solve_location_scale(const Sample& sample, const Responsibilities& resp, const EquispacedGrid& grid);

struct MStepResult {
  MixtureParams params;
  /// The beta denominator vanished; beta was set to 0.
  bool beta_degenerate = false;
  /// sigma2 fell below the floor and was raised to it.
  bool sigma2_floored = false;
  /// beta came out negative; it was negated and the weights reversed.
  bool sign_flipped = false;
};

/// M-step. Weights use z_.j / n, or the mirror-pooled estimator when
/// constrained. For k = 1 beta stays at 0.
MStepResult m_step(const Sample& sample, const Responsibilities& resp, const EquispacedGrid& grid, bool constrained,
                   double sigma2_floor = 0.0);

/// Free parameter count: 2 for k = 1, else 3 + (k - 1) or 3 + k/2 when constrained.
int parameter_count(int k, bool constrained) noexcept;

struct EmOptions {
  double tolerance = 1e-8;  ///< stop when |dl| < tolerance * (1 + |l|)
  int max_iterations = 5000;
  int restarts = 10;        ///< total starts: 1 deterministic + (restarts - 1) random
  double sigma2_floor_factor = 1e-8;  ///< floor = factor * sample variance
  RandomStream stream{};
  bool record_trace = false;
};

struct FitResult {
  MixtureParams params;
  double loglik = 0.0;
  bool constrained = false;
  int npar = 0;
  double aic = 0.0;
  double bic = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  std::size_t n = 0;
  bool beta_degenerate = false;
  /// sigma2 hit the variance floor; such fits are never selected.
  bool sigma2_floored = false;
  /// Per-iteration log-likelihood of the winning start (record_trace only).
  std::vector<double> trace;

  int k() const noexcept { return params.k(); }
};

/// Starting values. Restart 0: alpha = median, beta = range / 2,
/// sigma2 = variance / k, uniform weights. Later restarts draw weights from
/// a flat Dirichlet and jitter alpha by up to 0.5 * MAD; constrained starts
/// pool mirror weights.
MixtureParams init_params(const Sample& sample, int k, bool constrained, int restart_index, const RandomStream& stream);

/// Runs EM from a single starting point.
FitResult run_em(const Sample& sample, MixtureParams start, bool constrained, const EmOptions& options);

/// Best-of-restarts EM; within a relative 1e-10 the earlier start wins.
/// extra_starts are tried after the scheduled ones and carry restart
/// indices options.restarts, options.restarts + 1, ...
/// Throws EstimationError if every start degenerates.
FitResult fit_em(const Sample& sample, int k, bool constrained, const EmOptions& options,
                 std::span<const MixtureParams> extra_starts = {});

/// Copy of params with each mirror pair of weights replaced by its average.
MixtureParams symmetrize(const MixtureParams& params);

}  // namespace symmix
