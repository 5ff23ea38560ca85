#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "symmix/montecarlo.hpp"
#include "symmix/symmetry_tests.hpp"

namespace symmix {

/// Library version string.
std::string version();

/// Version of report.schema.json that the JSON reports conform to.
inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Input

struct WhitespaceFormat {};

struct CsvFormat {
  /// Header name, or a 0-based index when the file has no header.
  std::string column;
  bool header = true;
};

using DataFormat = std::variant<WhitespaceFormat, CsvFormat>;

/// Reads finite numbers in file order; blank lines and lines starting with
/// '#' are skipped. Throws ParseError naming the line on bad tokens or
/// non-finite values, and on an empty result.
Sample parse_data_file(const std::filesystem::path& path, const DataFormat& format = WhitespaceFormat{});
Sample parse_data(std::string_view text, const DataFormat& format = WhitespaceFormat{});

/// One value per line, 17 significant digits.
void write_sample(const std::filesystem::path& path, const Sample& sample);
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Density grid

struct DataPadded {
  double data_min = 0.0;
  double data_max = 0.0;
};

struct FixedRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// DataPadded spans [min - 2 sigma, max + 2 sigma] with sigma from the fit.
using RangePolicy = std::variant<DataPadded, FixedRange>;

struct DensityPoint {
  double x = 0.0;
  double density = 0.0;
};

std::vector<DensityPoint> emit_density_grid(const FitResult& fit, std::size_t n_points, const RangePolicy& range);

/// CSV "x,density_unconstrained,density_constrained" on a shared abscissa
/// taken from the unconstrained fit's range.
std::string density_grid_csv(const FitResult& unconstrained, const FitResult& constrained, std::size_t n_points,
                             const RangePolicy& range);

// ---------------------------------------------------------------------------
// Analysis report

struct AnalysisConfig {
  bool run_mixture = true;
  bool run_gupta = true;
  std::vector<Criterion> criteria{Criterion::BIC};
  std::optional<int> fixed_k;
  int k_max = 7;
  SymmetryTestOptions test_options{};
  std::size_t density_points = 512;
  std::string input_name;
};

struct InputDigest {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
};

struct AnalysisReport {
  InputDigest digest;
  AnalysisConfig config;
  std::optional<SelectionTable> selection;
  std::vector<SymmetryTestResult> mixture_tests;
  std::optional<GuptaResult> gupta;
  /// Abscissa with unconstrained/constrained ordinates, for the first mixture test.
  std::vector<std::array<double, 3>> density_grid;
  std::string tool_version;
};

AnalysisReport analyze(const Sample& sample, const AnalysisConfig& config);

std::string report_to_json(const AnalysisReport& report, int indent = 2);
/// Plain-text rendering: selection table, test rows and the Gupta statistic.
std::string report_to_text(const AnalysisReport& report);

// ---------------------------------------------------------------------------
// Simulation output

/// File name -> RFC 4180 CSV text for each study table.
std::map<std::string, std::string> study_tables_csv(const StudyReport& report);
std::string study_to_json(const StudyReport& report, int indent = 2);
std::string study_summary_text(const StudyReport& report);

/// Writes the CSV tables and study.json into dir (created if missing).
std::vector<std::filesystem::path> write_study(const StudyReport& report, const std::filesystem::path& dir);

}  // namespace symmix
