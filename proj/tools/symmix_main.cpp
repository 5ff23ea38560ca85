// symmix: symmetry tests for univariate samples and the Monte Carlo study
// that compares them.
//
//   symmix test data.txt --criterion both --out text
//   symmix simulate --dist norm,chisq1 --n-list 100 --reps 1000 --out-dir out/

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "symmix/error.hpp"
#include "symmix/io.hpp"
#include "symmix/montecarlo.hpp"

namespace {

constexpr int kOperationalFailure = 1;

struct TestArgs {
  std::string input;
  std::string format = "whitespace";
  std::string column = "0";
  bool no_header = false;
  std::string test = "both";
  std::string criterion = "bic";
  int k = 0;
  int k_max = 7;
  std::uint64_t seed = 1;
  int restarts = 10;
  double tolerance = 1e-8;
  int max_iterations = 5000;
  std::string out = "text";
  std::string output;
  std::string density_out;
  std::size_t density_points = 512;
};

struct SimulateArgs {
  std::vector<std::string> dists;
  std::vector<std::size_t> n_list{20, 50, 100};
  std::size_t reps = 1000;
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::vector<std::string> tests{"mixture-aic", "mixture-bic", "gupta"};
  std::uint64_t seed = 20120101;
  int k_max = 7;
  int restarts = 10;
  double tolerance = 1e-8;
  int max_iterations = 5000;
  std::string nm3_params;
  std::string out_dir;
  unsigned workers = 0;
  bool progress = false;
};

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// "m1,m2,m3:variance:w1,w2,w3"
symmix::NM3Params parse_nm3(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw symmix::ConfigError("--nm3-params expects 'm1,m2,m3:variance:w1,w2,w3'");
  }
  const auto means = split_numbers(text.substr(0, first));
  const auto weights = split_numbers(text.substr(second + 1));
  if (means.size() != 3 || weights.size() != 3) throw symmix::ConfigError("--nm3-params needs three means and three weights");
  symmix::NM3Params p;
  std::copy(means.begin(), means.end(), p.means.begin());
  std::copy(weights.begin(), weights.end(), p.weights.begin());
  p.variance = std::stod(text.substr(first + 1, second - first - 1));
  p.validate();
  return p;
}

unsigned resolve_workers(unsigned requested) {
  unsigned workers = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* cap = std::getenv("SYMMIX_MAX_WORKERS")) {
    const long value = std::strtol(cap, nullptr, 10);
    if (value > 0) workers = std::min(workers, static_cast<unsigned>(value));
  }
  return workers;
}

void write_or_print(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw symmix::Error("cannot write '" + path + "'");
  out << body;
}

int run_test(const TestArgs& args) {
  symmix::DataFormat format = symmix::WhitespaceFormat{};
  if (args.format == "csv") format = symmix::CsvFormat{args.column, !args.no_header};
  const symmix::Sample sample = symmix::parse_data_file(args.input, format);

  symmix::AnalysisConfig config;
  config.input_name = args.input;
  config.run_mixture = args.test != "gupta";
  config.run_gupta = args.test != "mixture";
  if (args.criterion == "both") {
    config.criteria = {symmix::Criterion::AIC, symmix::Criterion::BIC};
  } else {
    config.criteria = {args.criterion == "aic" ? symmix::Criterion::AIC : symmix::Criterion::BIC};
  }
  if (args.k > 0) config.fixed_k = args.k;
  config.k_max = args.k_max;
  config.density_points = args.density_points;
  config.test_options.em.stream = symmix::RandomStream{args.seed, 0};
  config.test_options.em.restarts = args.restarts;
  config.test_options.em.tolerance = args.tolerance;
  config.test_options.em.max_iterations = args.max_iterations;

  const symmix::AnalysisReport report = symmix::analyze(sample, config);
  write_or_print(args.output, args.out == "json" ? symmix::report_to_json(report) + "\n" : symmix::report_to_text(report));

  if (!args.density_out.empty()) {
    if (report.mixture_tests.empty()) throw symmix::ConfigError("--density-out requires the mixture test");
    const auto& t = report.mixture_tests.front();
    write_or_print(args.density_out,
                   symmix::density_grid_csv(t.unconstrained_fit, t.constrained_fit, args.density_points,
                                            symmix::DataPadded{sample.min(), sample.max()}));
  }
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  symmix::StudySpec spec;
  std::optional<symmix::NM3Params> nm3;
  if (!args.nm3_params.empty()) nm3 = parse_nm3(args.nm3_params);
  if (args.dists.empty()) {
    for (auto tag : symmix::all_distribution_tags()) spec.distributions.push_back({tag, {}});
  } else {
    for (const auto& d : args.dists) spec.distributions.push_back({symmix::parse_distribution_tag(d), {}});
  }
  if (nm3) {
    for (auto& d : spec.distributions) d.nm3 = *nm3;
  }
  spec.sample_sizes = args.n_list;
  spec.replicates = args.reps;
  spec.levels = args.levels;
  spec.tests.clear();
  for (const auto& t : args.tests) spec.tests.push_back(symmix::parse_study_test(t));
  spec.master_seed = args.seed;
  spec.k_max = args.k_max;
  spec.em.restarts = args.restarts;
  spec.em.tolerance = args.tolerance;
  spec.em.max_iterations = args.max_iterations;
  spec.validate();

  symmix::StudyProgress progress;
  if (args.progress) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 100 == 0 || done == total) std::cerr << "\r" << done << "/" << total << std::flush;
      if (done == total) std::cerr << "\n";
    };
  }
  const auto report = symmix::run_study(spec, resolve_workers(args.workers), progress);
  const auto files = symmix::write_study(report, args.out_dir);
  std::cout << symmix::study_summary_text(report);
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry tests based on equispaced normal mixtures"};
  app.set_version_flag("--version", symmix::version());
  // Options live under [test] / [simulate] sections; flags win over the file.
  app.set_config("--config", "", "Read options from a TOML/INI file with [test] and [simulate] sections");
  app.fallthrough();
  app.require_subcommand(1);

  TestArgs targs;
  auto* test = app.add_subcommand("test", "Test a sample for symmetry");
  test->add_option("input", targs.input, "Data file")->required()->check(CLI::ExistingFile);
  test->add_option("--format", targs.format, "Input format")->check(CLI::IsMember({"whitespace", "csv"}));
  test->add_option("--column", targs.column, "CSV column name (or 0-based index)");
  test->add_flag("--no-header", targs.no_header, "CSV file has no header row");
  test->add_option("--test", targs.test, "Which test(s) to run")->check(CLI::IsMember({"mixture", "gupta", "both"}));
  auto* criterion = test->add_option("--criterion", targs.criterion, "Criterion used to choose k")
                        ->check(CLI::IsMember({"aic", "bic", "both"}));
  auto* kmax = test->add_option("--k-max", targs.k_max, "Largest odd k considered")->check(CLI::PositiveNumber);
  auto* fixed_k = test->add_option("--k", targs.k, "Fixed odd number of components (skips selection)")
                      ->check(CLI::PositiveNumber);
  fixed_k->excludes(criterion)->excludes(kmax);
  test->add_option("--seed", targs.seed, "Seed for random EM restarts");
  test->add_option("--restarts", targs.restarts, "EM starts per fit")->check(CLI::PositiveNumber);
  test->add_option("--tol", targs.tolerance, "EM relative convergence tolerance");
  test->add_option("--max-iter", targs.max_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
  test->add_option("--out", targs.out, "Report format")->check(CLI::IsMember({"json", "text"}));
  test->add_option("--output,-o", targs.output, "Report file (default stdout)");
  test->add_option("--density-out", targs.density_out, "Write the fitted density grid CSV here");
  test->add_option("--density-points", targs.density_points, "Density grid size")->check(CLI::Range(2, 1000000));

  SimulateArgs sargs;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo level/power study");
  sim->add_option("--dist", sargs.dists, "Distributions: norm,t5,laplace,nm3,chisq1,chisq5,chisq10,lognorm")
      ->delimiter(',');
  sim->add_option("--n-list", sargs.n_list, "Sample sizes")->delimiter(',');
  sim->add_option("--reps", sargs.reps, "Replicates per cell")->check(CLI::PositiveNumber);
  sim->add_option("--levels", sargs.levels, "Nominal levels")->delimiter(',');
  sim->add_option("--tests", sargs.tests, "mixture-aic,mixture-bic,gupta")->delimiter(',');
  sim->add_option("--seed", sargs.seed, "Master seed");
  sim->add_option("--k-max", sargs.k_max, "Largest odd k considered")->check(CLI::PositiveNumber);
  sim->add_option("--restarts", sargs.restarts, "EM starts per fit")->check(CLI::PositiveNumber);
  sim->add_option("--tol", sargs.tolerance, "EM relative convergence tolerance");
  sim->add_option("--max-iter", sargs.max_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
  sim->add_option("--nm3-params", sargs.nm3_params, "NM3 generator as 'm1,m2,m3:variance:w1,w2,w3'");
  sim->add_option("--out-dir", sargs.out_dir, "Directory for CSV tables and study.json")->required();
  sim->add_option("--workers", sargs.workers, "Worker threads (0 = all cores; capped by SYMMIX_MAX_WORKERS)");
  sim->add_flag("--progress", sargs.progress, "Print progress to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*test) {
      if (targs.k > 0 && targs.k % 2 == 0) {
        std::cerr << "--k must be odd\n";
        return static_cast<int>(CLI::ExitCodes::ValidationError);
      }
      if (targs.k_max % 2 == 0) {
        std::cerr << "--k-max must be odd\n";
        return static_cast<int>(CLI::ExitCodes::ValidationError);
      }
      return run_test(targs);
    }
    return run_simulate(sargs);
  } catch (const symmix::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return static_cast<int>(CLI::ExitCodes::ValidationError);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOperationalFailure;
  }
}
