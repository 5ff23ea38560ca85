// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   symmix_acceptance [--reps 1000] [--workers 0] [--out-dir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "symmix/error.hpp"
#include "symmix/io.hpp"
#include "symmix/montecarlo.hpp"
#include "symmix/symmetry_tests.hpp"

namespace {

using namespace symmix;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome arithmetic_oracles() {
  Outcome out;
  struct Row {
    int k;
    bool constrained;
    int npar;
    double loglik, aic, bic;
  };
  // Tomato data set, n = 40.
  const Row rows[] = {
      {1, false, 2, -47.583, 99.165, 102.543}, {3, false, 5, -40.554, 91.108, 99.552},
      {5, false, 7, -37.646, 89.292, 101.114}, {7, false, 9, -37.847, 93.695, 108.900},
      {1, true, 2, -47.583, 99.165, 102.543},  {3, true, 4, -43.394, 94.789, 101.545},
      {5, true, 5, -42.558, 95.116, 103.560},  {7, true, 6, -42.757, 97.513, 107.646},
  };
  // 0.001 is the stated tolerance; 1e-9 absorbs binary rounding of the decimal inputs.
  constexpr double tol = 1e-3 + 1e-9;
  for (const auto& r : rows) {
    const std::string tag = "k=" + std::to_string(r.k) + (r.constrained ? " constrained" : " unconstrained");
    out.require(parameter_count(r.k, r.constrained) == r.npar, tag + " npar");
    const auto ic = information_criteria(r.loglik, r.npar, 40);
    if (std::abs(ic.aic - r.aic) > tol) out.require(false, tag + " AIC " + fmt(ic.aic) + " vs " + fmt(r.aic, 3));
    if (std::abs(ic.bic - r.bic) > tol) out.require(false, tag + " BIC " + fmt(ic.bic) + " vs " + fmt(r.bic, 3));
  }
  const double p3 = chi2_sf(5.681, 1).value();
  const double p5 = chi2_sf(9.823, 2).value();
  out.require(std::abs(p3 - 0.01715) <= 5e-5, "chi2_sf(5.681, 1) = " + fmt(p3, 6));
  out.require(std::abs(p5 - 0.00736) <= 5e-5, "chi2_sf(9.823, 2) = " + fmt(p5, 6));
  const double pg = 2.0 * std_normal_sf(1.782).value();
  out.require(std::abs(pg - 0.0748) <= 5e-4, "2 * sf(1.782) = " + fmt(pg, 6));
  out.note("p(5.681, 1) = " + fmt(p3, 6) + ", p(9.823, 2) = " + fmt(p5, 6) + ", 2 sf(1.782) = " + fmt(pg, 6));
  return out;
}

// ---------------------------------------------------------------------------

double complete_loglik(const Sample& s, const Responsibilities& r, const MixtureParams& p, double alpha, double beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int j = 0; j < p.k(); ++j) {
      const double d = s[i] - (alpha + beta * p.grid[static_cast<std::size_t>(j)]);
      total += r(i, j) * (-0.5 * std::log(2.0 * 3.141592653589793 * p.sigma2) - d * d / (2.0 * p.sigma2));
    }
  }
  return total;
}

Outcome em_properties() {
  Outcome out;
  Xoshiro256 gen(RandomStream{20120101, 2});
  constexpr int configs = 200;
  int stationarity_checked = 0;
  double worst_step = 0.0, worst_grad = 0.0, worst_equiv = 0.0, worst_nesting = 0.0;

  for (int c = 0; c < configs; ++c) {
    const Sample s(testing::random_sample(gen, 20, 150));
    const int k = 1 + 2 * static_cast<int>(gen.uniform() * 4.0);
    const bool constrained = gen.uniform() < 0.5;
    const std::string tag = "config " + std::to_string(c) + " (n=" + std::to_string(s.size()) +
                            ", k=" + std::to_string(k) + (constrained ? ", constrained)" : ")");
    try {
      EmOptions opt;
      opt.restarts = 4;
      opt.record_trace = true;
      opt.stream = RandomStream{20120101, static_cast<std::uint64_t>(c)};
      const FitResult fit = fit_em(s, k, constrained, opt);

      // Monotone log-likelihood.
      for (std::size_t t = 1; t < fit.trace.size(); ++t) worst_step = std::max(worst_step, fit.trace[t - 1] - fit.trace[t]);

      // Exact mirror symmetry of constrained weights.
      if (constrained) {
        for (int j = 0; j < k; ++j) {
          if (fit.params.weights[j] != fit.params.weights[k - 1 - j]) out.require(false, tag + " weight symmetry");
        }
      }

      // M-step stationarity in (alpha, beta) for the complete-data objective.
      if (k > 1) {
        auto r = e_step(s, fit.params);
        const auto m = m_step(s, r, fit.params.grid, constrained, 0.0);
        if (!m.beta_degenerate && !m.sigma2_floored) {
          if (m.sign_flipped) {
            for (std::size_t i = 0; i < s.size(); ++i) std::reverse(&r.z[i * k], &r.z[i * k] + k);
            r.update_column_sums();
          }
          constexpr double h = 1e-5;
          const auto& p = m.params;
          const double ga = (complete_loglik(s, r, p, p.alpha + h, p.beta) - complete_loglik(s, r, p, p.alpha - h, p.beta)) / (2 * h);
          const double gb = (complete_loglik(s, r, p, p.alpha, p.beta + h) - complete_loglik(s, r, p, p.alpha, p.beta - h)) / (2 * h);
          worst_grad = std::max({worst_grad, std::abs(ga), std::abs(gb)});
          ++stationarity_checked;
        }
      }

      // Constrained <= unconstrained at the same k, with shared starts.
      if (k > 1) {
        SymmetryTestOptions topt;
        topt.em = opt;
        topt.em.record_trace = false;
        const auto pair = symmetry_test_at_k(s, k, topt);
        worst_nesting = std::max(worst_nesting, pair.constrained_fit.loglik - pair.unconstrained_fit.loglik);
      }

      // Location-scale equivariance under a fixed sweep count.
      const double a = 0.5 + 2.5 * gen.uniform();
      const double b = 20.0 * gen.uniform() - 10.0;
      EmOptions fixed = opt;
      fixed.record_trace = false;
      fixed.tolerance = 0.0;
      fixed.max_iterations = 100;
      const auto f0 = fit_em(s, k, constrained, fixed);
      const auto f1 = fit_em(s.affine(a, b), k, constrained, fixed);
      double dev = std::max({std::abs((f1.params.alpha - b) / a - f0.params.alpha),
                             std::abs(f1.params.beta / a - f0.params.beta),
                             std::abs(f1.params.sigma2 / (a * a) - f0.params.sigma2),
                             std::abs(f1.loglik + static_cast<double>(s.size()) * std::log(a) - f0.loglik)});
      for (int j = 0; j < k; ++j) dev = std::max(dev, std::abs(f1.params.weights[j] - f0.params.weights[j]));
      worst_equiv = std::max(worst_equiv, dev);
      if (dev > 1e-6) out.require(false, tag + " equivariance deviation " + std::to_string(dev));
    } catch (const std::exception& e) {
      out.require(false, tag + " threw: " + e.what());
    }
  }
  out.require(worst_step <= 1e-9, "monotone log-likelihood (worst decrease " + std::to_string(worst_step) + ")");
  out.require(worst_grad <= 1e-6, "M-step stationarity (worst gradient " + std::to_string(worst_grad) + ")");
  out.require(worst_nesting <= 1e-9, "constrained <= unconstrained (worst excess " + std::to_string(worst_nesting) + ")");
  std::ostringstream msg;
  msg << configs << " configurations; worst step decrease " << worst_step << ", worst gradient " << worst_grad << " ("
      << stationarity_checked << " checked), worst nesting excess " << worst_nesting << ", worst equivariance "
      << worst_equiv;
  out.note(msg.str());
  return out;
}

// ---------------------------------------------------------------------------

Outcome gupta_oracle() {
  Outcome out;
  Xoshiro256 gen(RandomStream{20120101, 3});
  const auto tags = all_distribution_tags();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 7 + static_cast<std::size_t>(gen.uniform() * 494.0);
    SimDistribution d{tags[static_cast<std::size_t>(trial) % tags.size()], {}};
    auto xs = draw_sample(d, n, RandomStream{20120101, 1000 + static_cast<std::uint64_t>(trial)});
    const double scale = std::exp(4.0 * gen.uniform() - 2.0);
    const double shift = 10.0 * gen.uniform() - 5.0;
    for (auto& x : xs) x = scale * x + shift;
    const auto g = gupta_test(Sample(xs));
    const auto o = oracle::gupta(xs);
    const std::pair<double, long double> pairs[] = {{g.m2, o.m2}, {g.m3, o.m3}, {g.m4, o.m4}, {g.m6, o.m6},
                                                    {g.b1, o.b1}, {g.sigma2_hat, o.sigma2_hat}, {g.s1, o.s1}};
    for (const auto& [got, want] : pairs) {
      const double rel = static_cast<double>(std::abs(got - want) / std::abs(want));
      worst = std::max(worst, rel);
    }
  }
  out.require(worst <= 1e-10, "worst relative error " + std::to_string(worst));
  std::ostringstream msg;
  msg << "50 samples, worst relative error " << worst;
  out.note(msg.str());
  return out;
}

// ---------------------------------------------------------------------------

double rate(const StudyReport& r, StudyTest t, DistributionTag d, std::size_t n, double level) {
  return r.rejection_rates.at(CellKey{t, d, n, level}).rate;
}

Outcome level_reproduction(const StudyReport& r) {
  Outcome out;
  const double gupta = rate(r, StudyTest::Gupta, DistributionTag::StdNormal, 100, 0.05);
  const double bic = rate(r, StudyTest::MixtureBIC, DistributionTag::StdNormal, 100, 0.05);
  out.require(std::abs(gupta - 0.043) <= 0.025, "Gupta level " + fmt(gupta, 3) + " outside 0.043 +/- 0.025");
  out.require(bic <= 0.05, "mixture BIC level " + fmt(bic, 3) + " above 0.05");
  out.note("N(0,1), n=100, level 0.05: Gupta " + fmt(gupta, 3) + ", mixture BIC " + fmt(bic, 3) + ", mixture AIC " +
           fmt(rate(r, StudyTest::MixtureAIC, DistributionTag::StdNormal, 100, 0.05), 3));
  return out;
}

Outcome power_reproduction(const StudyReport& r) {
  Outcome out;
  const double chi_bic = rate(r, StudyTest::MixtureBIC, DistributionTag::ChiSq1, 100, 0.05);
  const double chi_gupta = rate(r, StudyTest::Gupta, DistributionTag::ChiSq1, 100, 0.05);
  const double ln_bic = rate(r, StudyTest::MixtureBIC, DistributionTag::LogNormal01, 100, 0.05);
  const double ln_gupta = rate(r, StudyTest::Gupta, DistributionTag::LogNormal01, 100, 0.05);
  out.require(chi_bic >= 0.90, "chisq1 mixture BIC power " + fmt(chi_bic, 3) + " below 0.90");
  out.require(chi_bic > chi_gupta, "chisq1 mixture BIC not above Gupta");
  out.require(ln_bic - ln_gupta >= 0.2, "lognorm BIC - Gupta = " + fmt(ln_bic - ln_gupta, 3) + " below 0.2");
  out.note("n=100, level 0.05: chisq1 BIC " + fmt(chi_bic, 3) + " vs Gupta " + fmt(chi_gupta, 3) + "; lognorm BIC " +
           fmt(ln_bic, 3) + " vs Gupta " + fmt(ln_gupta, 3));
  return out;
}

Outcome k_frequency_sanity(const StudyReport& r) {
  Outcome out;
  const double norm_bic = r.k_frequencies.at(KFrequencyKey{Criterion::BIC, DistributionTag::StdNormal, 100})[0];
  out.require(norm_bic >= 95.0, "N(0,1) n=100 BIC k=1 share " + fmt(norm_bic, 1) + "% below 95%");
  std::ostringstream msg;
  msg << "N(0,1) n=100 BIC k=1: " << fmt(norm_bic, 1) << "%; k=1 share AIC/BIC:";
  for (const auto& d : r.spec.distributions) {
    if (!d.symmetric()) continue;
    for (std::size_t n : r.spec.sample_sizes) {
      const double aic = r.k_frequencies.at(KFrequencyKey{Criterion::AIC, d.tag, n})[0];
      const double bic = r.k_frequencies.at(KFrequencyKey{Criterion::BIC, d.tag, n})[0];
      msg << " " << to_string(d.tag) << "@" << n << "=" << fmt(aic, 1) << "/" << fmt(bic, 1);
      out.require(aic < bic, to_string(d.tag) + " n=" + std::to_string(n) + ": AIC k=1 share not below BIC's");
    }
  }
  out.note(msg.str());
  return out;
}

Outcome determinism(unsigned workers) {
  Outcome out;
  StudySpec spec;
  spec.distributions = {SimDistribution{DistributionTag::StdNormal, {}}, SimDistribution{DistributionTag::SymNM3, {}},
                        SimDistribution{DistributionTag::ChiSq1, {}}};
  spec.sample_sizes = {20, 50};
  spec.replicates = 25;
  spec.em.restarts = 4;
  const unsigned many = std::max(3u, workers);
  const auto a = study_tables_csv(run_study(spec, 1));
  const auto b = study_tables_csv(run_study(spec, 1));
  const auto c = study_tables_csv(run_study(spec, many));
  out.require(a == b, "repeated single-worker runs differ");
  out.require(a == c, "single-worker and " + std::to_string(many) + "-worker runs differ");
  out.note(std::to_string(a.size()) + " CSV tables compared across 1, 1 and " + std::to_string(many) + " workers");
  return out;
}

Outcome nm3_level(const StudyReport& r) {
  Outcome out;
  const auto& cell = r.rejection_rates.at(CellKey{StudyTest::MixtureBIC, DistributionTag::SymNM3, 100, 0.05});
  const double bound = 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(r.spec.replicates));
  out.require(cell.rate <= bound, "NM3 mixture BIC level " + fmt(cell.rate, 3) + " above " + fmt(bound, 4));
  out.note("NM3 n=100 mixture BIC level " + fmt(cell.rate, 3) + " (bound " + fmt(bound, 4) + "), AIC " +
           fmt(rate(r, StudyTest::MixtureAIC, DistributionTag::SymNM3, 100, 0.05), 3) + ", Gupta " +
           fmt(rate(r, StudyTest::Gupta, DistributionTag::SymNM3, 100, 0.05), 3));
  return out;
}

void report(int id, const std::string& name, const Outcome& o, double seconds, int& failures) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << "  (" << fmt(seconds, 1) << " s)\n";
  for (const auto& n : o.notes) std::cout << "      " << n << "\n";
  std::cout.flush();
  if (!o.pass) ++failures;
}

Outcome timed(const std::function<Outcome()>& fn, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.require(false, std::string("threw: ") + e.what());
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symmix acceptance suite"};
  std::size_t reps = 1000;
  unsigned workers = 0;
  std::string out_dir;
  app.add_option("--reps", reps, "Monte Carlo replicates per cell")->check(CLI::PositiveNumber);
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  app.add_option("--out-dir", out_dir, "Also write the study tables here");
  CLI11_PARSE(app, argc, argv);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("SYMMIX_MAX_WORKERS")) workers = std::min(workers, static_cast<unsigned>(std::max(1, std::atoi(cap))));

  int failures = 0;
  double secs = 0.0;

  auto o1 = timed(arithmetic_oracles, secs);
  report(1, "arithmetic oracles", o1, secs, failures);
  auto o2 = timed(em_properties, secs);
  report(2, "EM property suite", o2, secs, failures);
  auto o3 = timed(gupta_oracle, secs);
  report(3, "Gupta oracle equivalence", o3, secs, failures);

  StudySpec spec;
  spec.distributions = {SimDistribution{DistributionTag::StdNormal, {}}, SimDistribution{DistributionTag::StudentT5, {}},
                        SimDistribution{DistributionTag::Laplace, {}},   SimDistribution{DistributionTag::SymNM3, {}},
                        SimDistribution{DistributionTag::ChiSq1, {}}, SimDistribution{DistributionTag::LogNormal01, {}}};
  spec.replicates = reps;
  std::cout << "running study: " << spec.distributions.size() << " distributions x " << spec.sample_sizes.size()
            << " sizes x " << reps << " replicates on " << workers << " worker(s)\n"
            << std::flush;
  StudyReport study;
  bool study_ok = true;
  std::string study_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    study = run_study(spec, workers);
    if (!out_dir.empty()) write_study(study, out_dir);
  } catch (const std::exception& e) {
    study_ok = false;
    study_error = e.what();
  }
  const double study_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "study finished in " << fmt(study_secs, 1) << " s\n";

  auto from_study = [&](const std::function<Outcome(const StudyReport&)>& fn) {
    return [&, fn] {
      if (!study_ok) {
        Outcome o;
        o.require(false, "study failed: " + study_error);
        return o;
      }
      return fn(study);
    };
  };
  auto o4 = timed(from_study(level_reproduction), secs);
  report(4, "level reproduction", o4, study_secs, failures);
  auto o5 = timed(from_study(power_reproduction), secs);
  report(5, "power reproduction", o5, study_secs, failures);
  auto o6 = timed(from_study(k_frequency_sanity), secs);
  report(6, "k-frequency sanity", o6, study_secs, failures);
  auto o7 = timed([&] { return determinism(workers); }, secs);
  report(7, "determinism across workers", o7, secs, failures);
  auto o8 = timed(from_study(nm3_level), secs);
  report(8, "NM3 level bound", o8, study_secs, failures);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
