#include "symmix/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "symmix/error.hpp"
#include "symmix/symmetry_tests.hpp"

namespace symmix {
namespace {

struct ReplicateOutcome {
  std::optional<double> gupta_p;
  std::optional<double> aic_p;
  std::optional<double> bic_p;
  int aic_k = 0;
  int bic_k = 0;
  std::string gupta_error;
  std::string mixture_error;
};

struct WorkItem {
  std::size_t distribution = 0;
  std::size_t size_index = 0;
  std::size_t replicate = 0;
};

bool wants(const StudySpec& spec, StudyTest test) { return std::ranges::find(spec.tests, test) != spec.tests.end(); }

ReplicateOutcome run_replicate(const StudySpec& spec, const WorkItem& item) {
  const SimDistribution& dist = spec.distributions[item.distribution];
  const std::size_t n = spec.sample_sizes[item.size_index];
  const RandomStream stream{spec.master_seed, replicate_stream_index(item.distribution, n, item.replicate)};
  const Sample sample(draw_sample(dist, n, stream));

  ReplicateOutcome out;
  if (wants(spec, StudyTest::Gupta)) {
    try {
      out.gupta_p = gupta_test(sample).p_value.value();
    } catch (const Error& e) {
      out.gupta_error = e.what();
    }
  }

  const bool aic = wants(spec, StudyTest::MixtureAIC);
  const bool bic = wants(spec, StudyTest::MixtureBIC);
  if (aic || bic) {
    try {
      SymmetryTestOptions options;
      options.em = spec.em;
      options.em.stream = stream.child(1);
      options.constrained_table = false;
      SelectionOptions sel{options.em, false};
      const SelectionTable table = select_k(sample, Criterion::BIC, spec.k_max, sel);
      out.bic_k = table.chosen_k;
      out.aic_k = choose_k(table, Criterion::AIC);

      std::optional<SymmetryTestResult> bic_result;
      if (bic) {
        bic_result = symmetry_test_at_k(sample, out.bic_k, options, &*table.row(out.bic_k).unconstrained);
        out.bic_p = bic_result->p_value.value();
      }
      if (aic) {
        if (bic_result && out.aic_k == out.bic_k) {
          out.aic_p = out.bic_p;
        } else {
          out.aic_p = symmetry_test_at_k(sample, out.aic_k, options, &*table.row(out.aic_k).unconstrained)
                          .p_value.value();
        }
      }
    } catch (const Error& e) {
      out.mixture_error = e.what();
      out.aic_p.reset();
      out.bic_p.reset();
    }
  }
  return out;
}

}  // namespace

std::string to_string(StudyTest test) {
  switch (test) {
    case StudyTest::MixtureAIC:
      return "mixture-aic";
    case StudyTest::MixtureBIC:
      return "mixture-bic";
    case StudyTest::Gupta:
      return "gupta";
  }
  return "unknown";
}

StudyTest parse_study_test(std::string_view text) {
  if (text == "mixture-aic") return StudyTest::MixtureAIC;
  if (text == "mixture-bic") return StudyTest::MixtureBIC;
  if (text == "gupta") return StudyTest::Gupta;
  throw ConfigError("unknown test '" + std::string(text) + "' (valid: mixture-aic, mixture-bic, gupta)");
}

void StudySpec::validate() const {
  if (distributions.empty()) throw ConfigError("study needs at least one distribution");
  std::set<DistributionTag> seen;
  for (const auto& d : distributions) {
    if (!seen.insert(d.tag).second) throw ConfigError("distribution '" + to_string(d.tag) + "' listed twice");
    if (d.tag == DistributionTag::SymNM3) d.nm3.validate();
  }
  if (sample_sizes.empty()) throw ConfigError("study needs at least one sample size");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (levels.empty()) throw ConfigError("study needs at least one level");
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("levels must lie in (0, 1)");
  }
  if (tests.empty()) throw ConfigError("study needs at least one test");
  const std::size_t min_n = wants(*this, StudyTest::Gupta) ? 7 : 2;
  for (std::size_t n : sample_sizes) {
    if (n < min_n) throw ConfigError("sample size " + std::to_string(n) + " below minimum " + std::to_string(min_n));
    if (n >= (std::size_t{1} << 24)) throw ConfigError("sample size too large");
  }
  if (replicates >= (std::size_t{1} << 32)) throw ConfigError("too many replicates");
  if (k_max < 1 || k_max % 2 == 0) throw ConfigError("k_max must be an odd positive integer");
  if (em.restarts < 1 || em.max_iterations < 1) throw ConfigError("EM needs restarts >= 1 and max_iterations >= 1");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) throw ConfigError("max_failure_rate must lie in [0, 1]");
}

KFrequencyRow k_frequency_table(const std::vector<int>& per_replicate_k) {
  if (per_replicate_k.empty()) throw DomainError("k_frequency_table: no replicates");
  std::array<std::size_t, 4> counts{};
  for (int k : per_replicate_k) {
    if (k < 1 || k % 2 == 0) throw DomainError("k_frequency_table: k must be odd and positive");
    counts[k >= 7 ? 3 : static_cast<std::size_t>(k / 2)]++;
  }
  KFrequencyRow row{};
  const double total = static_cast<double>(per_replicate_k.size());
  for (std::size_t b = 0; b < 4; ++b) row[b] = 100.0 * static_cast<double>(counts[b]) / total;
  return row;
}

std::uint64_t replicate_stream_index(std::size_t distribution_position, std::size_t n, std::size_t replicate) noexcept {
  return (static_cast<std::uint64_t>(distribution_position) << 56) | (static_cast<std::uint64_t>(n) << 32) |
         static_cast<std::uint64_t>(replicate);
}

StudyReport run_study(const StudySpec& spec, unsigned workers, const StudyProgress& progress) {
  spec.validate();
  const auto started = std::chrono::steady_clock::now();

  std::vector<WorkItem> items;
  for (std::size_t d = 0; d < spec.distributions.size(); ++d) {
    for (std::size_t s = 0; s < spec.sample_sizes.size(); ++s) {
      for (std::size_t r = 0; r < spec.replicates; ++r) items.push_back({d, s, r});
    }
  }

  std::vector<ReplicateOutcome> outcomes(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      outcomes[i] = run_replicate(spec, items[i]);
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, items.size());
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  StudyReport report;
  report.spec = spec;
  report.workers = workers;

  std::size_t offset = 0;
  for (std::size_t d = 0; d < spec.distributions.size(); ++d) {
    const DistributionTag tag = spec.distributions[d].tag;
    for (std::size_t s = 0; s < spec.sample_sizes.size(); ++s) {
      const std::size_t n = spec.sample_sizes[s];
      const std::span<const ReplicateOutcome> cell(outcomes.data() + offset, spec.replicates);
      offset += spec.replicates;

      for (StudyTest test : spec.tests) {
        auto pick = [test](const ReplicateOutcome& o) -> std::optional<double> {
          switch (test) {
            case StudyTest::MixtureAIC:
              return o.aic_p;
            case StudyTest::MixtureBIC:
              return o.bic_p;
            case StudyTest::Gupta:
              return o.gupta_p;
          }
          return std::nullopt;
        };
        std::size_t failures = 0;
        std::string example;
        for (const auto& o : cell) {
          if (!pick(o)) {
            ++failures;
            if (example.empty()) example = test == StudyTest::Gupta ? o.gupta_error : o.mixture_error;
          }
        }
        if (static_cast<double>(failures) > spec.max_failure_rate * static_cast<double>(spec.replicates)) {
          std::ostringstream msg;
          msg << to_string(test) << " failed on " << failures << " of " << spec.replicates << " replicates for "
              << to_string(tag) << ", n=" << n << " (first failure: " << example << ")";
          throw EstimationError(msg.str());
        }
        for (double level : spec.levels) {
          RejectionCell rc;
          rc.failures = failures;
          for (const auto& o : cell) {
            if (const auto p = pick(o)) {
              ++rc.successes;
              if (*p < level) ++rc.rejections;
            }
          }
          if (rc.successes > 0) {
            rc.rate = static_cast<double>(rc.rejections) / static_cast<double>(rc.successes);
            rc.standard_error = std::sqrt(rc.rate * (1.0 - rc.rate) / static_cast<double>(rc.successes));
          }
          report.rejection_rates[CellKey{test, tag, n, level}] = rc;
        }
      }

      if (wants(spec, StudyTest::MixtureAIC) || wants(spec, StudyTest::MixtureBIC)) {
        std::vector<int> aic_ks;
        std::vector<int> bic_ks;
        for (const auto& o : cell) {
          if (o.mixture_error.empty()) {
            aic_ks.push_back(o.aic_k);
            bic_ks.push_back(o.bic_k);
          }
        }
        if (!aic_ks.empty()) {
          report.k_frequencies[KFrequencyKey{Criterion::AIC, tag, n}] = k_frequency_table(aic_ks);
          report.k_frequencies[KFrequencyKey{Criterion::BIC, tag, n}] = k_frequency_table(bic_ks);
        }
      }
    }
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace symmix
