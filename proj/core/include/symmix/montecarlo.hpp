#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "symmix/mixture.hpp"
#include "symmix/random.hpp"
#include "symmix/selection.hpp"

namespace symmix {

enum class StudyTest { MixtureAIC, MixtureBIC, Gupta };

std::string to_string(StudyTest test);
StudyTest parse_study_test(std::string_view text);

struct StudySpec {
  std::vector<SimDistribution> distributions;
  std::vector<std::size_t> sample_sizes{20, 50, 100};
  std::size_t replicates = 1000;
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::vector<StudyTest> tests{StudyTest::MixtureAIC, StudyTest::MixtureBIC, StudyTest::Gupta};
  std::uint64_t master_seed = 20120101;
  int k_max = 7;
  EmOptions em{};
  /// Abort when the failed fraction of a cell exceeds this.
  double max_failure_rate = 0.01;

  /// Throws ConfigError on an inconsistent spec.
  void validate() const;
};

/// Buckets k = 1, 3, 5, > 5 as percentages.
using KFrequencyRow = std::array<double, 4>;

KFrequencyRow k_frequency_table(const std::vector<int>& per_replicate_k);

struct RejectionCell {
  double rate = 0.0;
  double standard_error = 0.0;
  std::size_t rejections = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

struct CellKey {
  StudyTest test;
  DistributionTag distribution;
  std::size_t n;
  double level;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct KFrequencyKey {
  Criterion criterion;
  DistributionTag distribution;
  std::size_t n;
  friend auto operator<=>(const KFrequencyKey&, const KFrequencyKey&) = default;
};

struct StudyReport {
  StudySpec spec;
  std::map<CellKey, RejectionCell> rejection_rates;
  std::map<KFrequencyKey, KFrequencyRow> k_frequencies;
  double wall_seconds = 0.0;
  unsigned workers = 1;
};

/// Stream index of replicate r of (distribution position d, sample size n).
std::uint64_t replicate_stream_index(std::size_t distribution_position, std::size_t n, std::size_t replicate) noexcept;

/// Called with (completed, total) work items; may run on any worker thread,
/// one call at a time.
using StudyProgress = std::function<void(std::size_t, std::size_t)>;

/// Runs every (distribution, n, replicate) work item across workers threads.
/// The report is identical for any worker count. Throws EstimationError when
/// a cell's failure rate exceeds spec.max_failure_rate.
StudyReport run_study(const StudySpec& spec, unsigned workers = 1, const StudyProgress& progress = {});

}  // namespace symmix
