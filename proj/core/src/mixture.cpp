#include "symmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "symmix/error.hpp"
#include "symmix/selection.hpp"

namespace symmix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_resp(const Sample& sample, const Responsibilities& resp, const EquispacedGrid& grid) {
  if (resp.n != sample.size() || resp.k != grid.k() || resp.z.size() != resp.n * static_cast<std::size_t>(resp.k) ||
      resp.column_sums.size() != static_cast<std::size_t>(resp.k)) {
    throw DomainError("responsibilities do not match sample size and grid");
  }
}

}  // namespace

EquispacedGrid::EquispacedGrid(int k) {
  if (k < 1 || k % 2 == 0) throw DomainError("grid size must be an odd positive integer, got " + std::to_string(k));
  deltas_.assign(static_cast<std::size_t>(k), 0.0);
  const int half = k / 2;
  for (int j = 0; j < half; ++j) {
    const double d = -1.0 + 2.0 * j / (k - 1);
    deltas_[static_cast<std::size_t>(j)] = d;
    deltas_[static_cast<std::size_t>(k - 1 - j)] = -d;
  }
}

EquispacedGrid make_grid(int k) { return EquispacedGrid(k); }

void MixtureParams::validate() const {
  if (weights.size() != static_cast<std::size_t>(grid.k())) throw DomainError("weights size does not match grid");
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(sigma2)) {
    throw DomainError("mixture parameters must be finite");
  }
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  if (beta < 0.0) throw DomainError("beta must be non-negative");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("weights must sum to 1");
}

void Responsibilities::update_column_sums() {
  column_sums.assign(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) column_sums[static_cast<std::size_t>(j)] += (*this)(i, j);
  }
}

double log_density(double x, const MixtureParams& params) {
  if (!std::isfinite(x)) throw DomainError("log_density: x must be finite");
  const int k = params.k();
  const double inv2s = 0.5 / params.sigma2;
  double terms[64];
  std::vector<double> heap;
  double* lp = terms;
  if (k > 64) {
    heap.resize(static_cast<std::size_t>(k));
    lp = heap.data();
  }
  double top = kNegInf;
  for (int j = 0; j < k; ++j) {
    const double w = params.weights[static_cast<std::size_t>(j)];
    const double r = x - params.support_point(static_cast<std::size_t>(j));
    lp[j] = w > 0.0 ? std::log(w) - r * r * inv2s : kNegInf;
    top = std::max(top, lp[j]);
  }
  double s = 0.0;
  for (int j = 0; j < k; ++j) s += std::exp(lp[j] - top);
  return top + std::log(s) - kLogSqrt2Pi - 0.5 * std::log(params.sigma2);
}

double log_likelihood(const Sample& sample, const MixtureParams& params) {
  double total = 0.0;
  for (double x : sample.values()) total += log_density(x, params);
  return total;
}

Responsibilities e_step(const Sample& sample, const MixtureParams& params, double* loglik) {
  const int k = params.k();
  const std::size_t n = sample.size();
  Responsibilities resp{n, k, std::vector<double>(n * static_cast<std::size_t>(k)), {}};

  std::vector<double> logw(static_cast<std::size_t>(k));
  std::vector<double> nu(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double w = params.weights[static_cast<std::size_t>(j)];
    logw[static_cast<std::size_t>(j)] = w > 0.0 ? std::log(w) : kNegInf;
    nu[static_cast<std::size_t>(j)] = params.support_point(static_cast<std::size_t>(j));
  }
  const double inv2s = 0.5 / params.sigma2;
  const double norm = -kLogSqrt2Pi - 0.5 * std::log(params.sigma2);

  double total = 0.0;
  const auto xs = sample.values();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &resp.z[i * static_cast<std::size_t>(k)];
    double top = kNegInf;
    for (int j = 0; j < k; ++j) {
      const double r = xs[i] - nu[static_cast<std::size_t>(j)];
      row[j] = logw[static_cast<std::size_t>(j)] - r * r * inv2s;
      top = std::max(top, row[j]);
    }
    if (!std::isfinite(top)) throw NumericalError("E-step normalizer underflowed", i);
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      row[j] = std::exp(row[j] - top);
      s += row[j];
    }
    const double inv = 1.0 / s;
    for (int j = 0; j < k; ++j) row[j] *= inv;
    total += top + std::log(s);
  }
  resp.update_column_sums();
  if (loglik != nullptr) *loglik = total + static_cast<double>(n) * norm;
  return resp;
}

LocationScale solve_location_scale(const Sample& sample, const Responsibilities& resp, const EquispacedGrid& grid) {
  check_resp(sample, resp, grid);
  const int k = grid.k();
  const std::size_t n = sample.size();
  const double nd = static_cast<double>(n);
  const double xbar = sample.mean();
  const auto xs = sample.values();

  LocationScale out;
  if (k == 1) {
    out.alpha = xbar;
    out.beta = 0.0;
  } else {
    double dbar = 0.0;
    for (int j = 0; j < k; ++j) dbar += resp.column_sums[static_cast<std::size_t>(j)] * grid[static_cast<std::size_t>(j)];
    dbar /= nd;

    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double zd = 0.0;
      for (int j = 0; j < k; ++j) zd += resp(i, j) * grid[static_cast<std::size_t>(j)];
      num += (xs[i] - xbar) * zd;
    }
    double den = 0.0;
    for (int j = 0; j < k; ++j) {
      const double d = grid[static_cast<std::size_t>(j)];
      den += resp.column_sums[static_cast<std::size_t>(j)] * (d - dbar) * d;
    }
    if (den <= 64.0 * std::numeric_limits<double>::epsilon() * nd) {
      out.beta = 0.0;
      out.beta_degenerate = true;
    } else {
      out.beta = num / den;
    }
    out.alpha = xbar - out.beta * dbar;
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double r = xs[i] - (out.alpha + out.beta * grid[static_cast<std::size_t>(j)]);
      ss += resp(i, j) * r * r;
    }
  }
  out.sigma2 = ss / nd;
  return out;
}

MStepResult m_step(const Sample& sample, const Responsibilities& resp, const EquispacedGrid& grid, bool constrained,
                   double sigma2_floor) {
  const LocationScale ls = solve_location_scale(sample, resp, grid);
  const int k = grid.k();
  const double nd = static_cast<double>(sample.size());

  MStepResult out;
  out.params.grid = grid;
  out.params.alpha = ls.alpha;
  out.params.beta = ls.beta;
  out.params.sigma2 = ls.sigma2;
  out.beta_degenerate = ls.beta_degenerate;
  out.params.weights.assign(static_cast<std::size_t>(k), 0.0);

  auto& w = out.params.weights;
  const auto& zsum = resp.column_sums;
  if (constrained) {
    for (int j = 0; j <= k / 2; ++j) {
      const auto a = static_cast<std::size_t>(j);
      const auto b = static_cast<std::size_t>(k - 1 - j);
      const double pooled = (zsum[a] + zsum[b]) / (2.0 * nd);
      w[a] = pooled;
      w[b] = pooled;
    }
  } else {
    for (int j = 0; j < k; ++j) w[static_cast<std::size_t>(j)] = zsum[static_cast<std::size_t>(j)] / nd;
  }

  if (out.params.beta < 0.0) {
    out.params.beta = -out.params.beta;
    std::ranges::reverse(w);
    out.sign_flipped = true;
  }
  if (!(out.params.sigma2 >= sigma2_floor) || !(out.params.sigma2 > 0.0)) {
    out.params.sigma2 = std::max(sigma2_floor, std::numeric_limits<double>::min());
    out.sigma2_floored = true;
  }
  return out;
}

int parameter_count(int k, bool constrained) noexcept {
  if (k <= 1) return 2;
  return constrained ? 3 + k / 2 : 3 + (k - 1);
}

MixtureParams symmetrize(const MixtureParams& params) {
  MixtureParams out = params;
  const int k = params.k();
  for (int j = 0; j <= k / 2; ++j) {
    const auto a = static_cast<std::size_t>(j);
    const auto b = static_cast<std::size_t>(k - 1 - j);
    const double avg = 0.5 * (params.weights[a] + params.weights[b]);
    out.weights[a] = avg;
    out.weights[b] = avg;
  }
  return out;
}

MixtureParams init_params(const Sample& sample, int k, bool constrained, int restart_index, const RandomStream& stream) {
  if (restart_index < 0) throw DomainError("restart index must be non-negative");
  if (!(sample.variance() > 0.0)) throw DomainError("cannot fit a mixture to a sample with zero variance");

  MixtureParams p;
  p.grid = make_grid(k);
  p.alpha = sample.median();
  p.beta = k == 1 ? 0.0 : 0.5 * (sample.max() - sample.min());
  p.sigma2 = sample.variance() / k;
  p.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  if (restart_index == 0) return p;

  Xoshiro256 gen(stream.child((static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(restart_index)));
  double total = 0.0;
  for (auto& w : p.weights) {
    w = -std::log(gen.uniform_open());
    total += w;
  }
  for (auto& w : p.weights) w /= total;
  const double spread = sample.mad() > 0.0 ? sample.mad() : std::sqrt(sample.variance());
  p.alpha += (2.0 * gen.uniform() - 1.0) * 0.5 * spread;
  if (constrained) p = symmetrize(p);
  return p;
}

FitResult run_em(const Sample& sample, MixtureParams start, bool constrained, const EmOptions& options) {
  start.validate();
  if (constrained) start = symmetrize(start);
  const double floor = options.sigma2_floor_factor * sample.variance();

  FitResult fit;
  fit.constrained = constrained;
  fit.n = sample.size();
  fit.params = std::move(start);

  double ll = 0.0;
  Responsibilities resp = e_step(sample, fit.params, &ll);
  if (options.record_trace) fit.trace.push_back(ll);

  for (int it = 1; it <= options.max_iterations; ++it) {
    MStepResult ms = m_step(sample, resp, fit.params.grid, constrained, floor);
    fit.beta_degenerate = ms.beta_degenerate;
    fit.params = std::move(ms.params);
    double next = 0.0;
    resp = e_step(sample, fit.params, &next);
    fit.iterations = it;
    if (options.record_trace) fit.trace.push_back(next);
    if (ms.sigma2_floored) {
      fit.sigma2_floored = true;
      ll = next;
      break;
    }
    const bool done = std::abs(next - ll) < options.tolerance * (1.0 + std::abs(ll));
    ll = next;
    if (done) {
      fit.converged = true;
      break;
    }
  }

  fit.loglik = ll;
  fit.npar = parameter_count(fit.params.k(), constrained);
  const auto ic = information_criteria(fit.loglik, fit.npar, fit.n);
  fit.aic = ic.aic;
  fit.bic = ic.bic;
  return fit;
}

FitResult fit_em(const Sample& sample, int k, bool constrained, const EmOptions& options,
                 std::span<const MixtureParams> extra_starts) {
  const EquispacedGrid grid = make_grid(k);
  if (!(sample.variance() > 0.0)) throw DomainError("cannot fit a mixture to a sample with zero variance");
  if (options.restarts < 1) throw ConfigError("EM needs at least one start");

  // With one component every start reaches the closed-form fit in one step.
  const int scheduled = k == 1 ? 1 : options.restarts;

  std::optional<FitResult> best;
  std::string last_problem;
  auto consider = [&](FitResult&& fit, int index) {
    if (fit.sigma2_floored) {
      last_problem = "variance collapsed onto the floor";
      return;
    }
    fit.restart_index = index;
    // Near-ties go to the earlier start. Distinct parameter vectors can share
    // a likelihood (an empty end component lets alpha slide by beta), and
    // rounding noise must not decide between them.
    if (!best || fit.loglik > best->loglik + 1e-10 * (1.0 + std::abs(best->loglik))) best = std::move(fit);
  };

  for (int r = 0; r < scheduled; ++r) {
    try {
      consider(run_em(sample, init_params(sample, k, constrained, r, options.stream), constrained, options), r);
    } catch (const NumericalError& e) {
      last_problem = e.what();
    }
  }
  for (std::size_t e = 0; e < extra_starts.size(); ++e) {
    if (extra_starts[e].grid != grid) throw DomainError("extra start has a different grid size");
    try {
      consider(run_em(sample, extra_starts[e], constrained, options), options.restarts + static_cast<int>(e));
    } catch (const NumericalError& err) {
      last_problem = err.what();
    }
  }
  if (!best) {
    throw EstimationError("all EM starts degenerate for k=" + std::to_string(k) +
                          (constrained ? " (constrained)" : "") + ": " + last_problem);
  }
  return std::move(*best);
}

}  // namespace symmix
