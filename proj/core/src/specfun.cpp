#include "symmix/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "symmix/error.hpp"

namespace symmix {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

// Series for P(a, x); converges quickly for x < a + 1.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw NumericalError("incomplete gamma series did not converge for a=" + std::to_string(a) +
                       ", x=" + std::to_string(x));
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge for a=" + std::to_string(a) +
                       ", x=" + std::to_string(x));
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: shape must be positive and finite");
  if (!(x >= 0.0) || std::isnan(x)) throw DomainError("incomplete gamma: x must be non-negative");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("probability out of [0, 1]: " + std::to_string(value));
  }
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: argument must be positive and finite");
  if (x < 0.5) {
    // Reflection keeps the Lanczos sum on its accurate half-line.
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) series += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return clamp01(lower_series(a, x));
  return clamp01(1.0 - upper_fraction(a, x));
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return clamp01(1.0 - lower_series(a, x));
  return clamp01(upper_fraction(a, x));
}

Probability chi2_sf(double x, int df) {
  if (df < 1) throw DomainError("chi2_sf: df must be >= 1");
  if (!(x >= 0.0)) throw DomainError("chi2_sf: x must be non-negative");
  return Probability(gamma_q(0.5 * df, 0.5 * x));
}

Probability chi2_cdf(double x, int df) {
  if (df < 1) throw DomainError("chi2_cdf: df must be >= 1");
  if (!(x >= 0.0)) throw DomainError("chi2_cdf: x must be non-negative");
  return Probability(gamma_p(0.5 * df, 0.5 * x));
}

Probability std_normal_sf(double z) {
  if (!std::isfinite(z)) throw DomainError("std_normal_sf: argument must be finite");
  return Probability(clamp01(0.5 * std::erfc(z / std::numbers::sqrt2)));
}

Probability two_sided_normal_p(double z) {
  if (!std::isfinite(z)) throw DomainError("two_sided_normal_p: argument must be finite");
  return Probability(clamp01(std::erfc(std::abs(z) / std::numbers::sqrt2)));
}

}  // namespace symmix
