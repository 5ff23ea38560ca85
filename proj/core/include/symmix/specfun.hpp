#pragma once

// Special functions backing every p-value in the library: log-gamma,
// regularized incomplete gamma, chi-square and standard normal tails.

namespace symmix {

/// A value in [0, 1]. Construction outside that range throws DomainError.
class Probability {
public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

private:
  double value_ = 0.0;
};

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, nine terms).
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// P(chi2_df > x).
Probability chi2_sf(double x, int df);

/// P(chi2_df <= x), computed on the complementary branch to chi2_sf.
Probability chi2_cdf(double x, int df);

/// P(Z > z) for Z ~ N(0, 1).
Probability std_normal_sf(double z);

/// 2 P(Z > |z|).
Probability two_sided_normal_p(double z);

}  // namespace symmix
