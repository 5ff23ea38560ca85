#include "symmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "symmix/error.hpp"

#ifndef SYMMIX_VERSION
#define SYMMIX_VERSION "0.0.0"
#endif

namespace symmix {
namespace {

using nlohmann::ordered_json;

constexpr std::string_view kCrlf = "\r\n";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.empty()) throw ParseError("empty field", line);
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("cannot parse '" + std::string(token) + "' as a number", line);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(token) + "'", line);
  return value;
}

// RFC 4180 field splitting for a single physical line.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++line_no;
    fn(line, line_no);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

std::optional<std::size_t> as_index(const std::string& s) {
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), idx);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return idx;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Five decimals, switching to scientific notation for tiny values.
std::string p_value_text(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, p >= 1e-4 || p == 0.0 ? "%.5f" : "%.3e", p);
  return buf;
}

std::string padded(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

ordered_json fit_json(const FitResult& fit) {
  ordered_json j;
  j["k"] = fit.k();
  j["constrained"] = fit.constrained;
  j["npar"] = fit.npar;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["alpha"] = fit.params.alpha;
  j["beta"] = fit.params.beta;
  j["sigma2"] = fit.params.sigma2;
  j["weights"] = fit.params.weights;
  std::vector<double> support;
  for (int c = 0; c < fit.k(); ++c) support.push_back(fit.params.support_point(static_cast<std::size_t>(c)));
  j["support_points"] = support;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["restart_index"] = fit.restart_index;
  j["beta_degenerate"] = fit.beta_degenerate;
  j["sigma2_floored"] = fit.sigma2_floored;
  return j;
}

ordered_json selection_json(const SelectionTable& table) {
  ordered_json j;
  j["criterion"] = to_string(table.criterion);
  j["chosen_k"] = table.chosen_k;
  j["rows"] = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json r;
    r["k"] = row.k;
    r["unconstrained"] = row.unconstrained ? fit_json(*row.unconstrained) : ordered_json(nullptr);
    r["constrained"] = row.constrained ? fit_json(*row.constrained) : ordered_json(nullptr);
    r["failure"] = row.failure;
    j["rows"].push_back(std::move(r));
  }
  return j;
}

ordered_json test_json(const SymmetryTestResult& t) {
  ordered_json j;
  j["criterion"] = to_string(t.criterion);
  j["chosen_k"] = t.chosen_k;
  j["deviance"] = t.deviance;
  j["df"] = t.df;
  j["p_value"] = t.p_value.value();
  j["auto_accepted"] = t.auto_accepted;
  j["boundary"] = t.boundary;
  j["escalated"] = t.escalated;
  j["unconstrained_fit"] = fit_json(t.unconstrained_fit);
  j["constrained_fit"] = fit_json(t.constrained_fit);
  return j;
}

ordered_json gupta_json(const GuptaResult& g) {
  ordered_json j;
  j["n"] = g.n;
  j["m2"] = g.m2;
  j["m3"] = g.m3;
  j["m4"] = g.m4;
  j["m6"] = g.m6;
  j["b1"] = g.b1;
  j["sigma2_hat"] = g.sigma2_hat;
  j["s1"] = g.s1;
  j["p_value"] = g.p_value.value();
  return j;
}

ordered_json em_json(const EmOptions& em) {
  ordered_json j;
  j["tolerance"] = em.tolerance;
  j["max_iterations"] = em.max_iterations;
  j["restarts"] = em.restarts;
  j["sigma2_floor_factor"] = em.sigma2_floor_factor;
  j["seed"] = em.stream.master_seed;
  j["stream_index"] = em.stream.stream_index;
  return j;
}

ordered_json distribution_json(const SimDistribution& d) {
  ordered_json j;
  j["tag"] = to_string(d.tag);
  j["symmetric"] = d.symmetric();
  if (d.tag == DistributionTag::SymNM3) {
    j["nm3"] = {{"means", d.nm3.means}, {"variance", d.nm3.variance}, {"weights", d.nm3.weights}};
  }
  return j;
}

std::string k_label(std::size_t bucket) {
  static const char* labels[] = {"1", "3", "5", ">5"};
  return labels[bucket];
}

}  // namespace

std::string version() { return SYMMIX_VERSION; }

Sample parse_data(std::string_view text, const DataFormat& format) {
  std::vector<double> values;
  if (std::holds_alternative<WhitespaceFormat>(format)) {
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
      line = trim(line);
      if (line.empty() || line.front() == '#') return;
      std::size_t pos = 0;
      while (pos < line.size()) {
        const auto start = line.find_first_not_of(" \t\r", pos);
        if (start == std::string_view::npos) break;
        auto end = line.find_first_of(" \t\r", start);
        if (end == std::string_view::npos) end = line.size();
        values.push_back(parse_number(line.substr(start, end - start), line_no));
        pos = end;
      }
    });
  } else {
    const auto& csv = std::get<CsvFormat>(format);
    std::optional<std::size_t> column;
    bool header_pending = csv.header;
    if (!csv.header) {
      column = as_index(csv.column);
      if (!column) throw ParseError("without a header the CSV column must be a 0-based index", 0);
    }
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
      if (trim(line).empty()) return;
      const auto fields = split_csv_line(line, line_no);
      if (header_pending) {
        header_pending = false;
        for (std::size_t c = 0; c < fields.size(); ++c) {
          if (trim(fields[c]) == csv.column) column = c;
        }
        if (!column) column = as_index(csv.column);
        if (!column || *column >= fields.size()) {
          throw ParseError("column '" + csv.column + "' not found in header", line_no);
        }
        return;
      }
      if (*column >= fields.size()) {
        throw ParseError("row has " + std::to_string(fields.size()) + " fields, column " +
                             std::to_string(*column) + " missing",
                         line_no);
      }
      values.push_back(parse_number(fields[*column], line_no));
    });
  }
  if (values.empty()) throw ParseError("no values parsed from input", 0);
  return Sample(std::move(values));
}

Sample parse_data_file(const std::filesystem::path& path, const DataFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_data(buffer.str(), format);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_sample(const std::filesystem::path& path, const Sample& sample) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (double x : sample.values()) out << format_double(x) << '\n';
}

std::vector<DensityPoint> emit_density_grid(const FitResult& fit, std::size_t n_points, const RangePolicy& range) {
  if (n_points < 2) throw DomainError("density grid needs at least 2 points");
  fit.params.validate();
  double lo = 0.0;
  double hi = 0.0;
  if (const auto* padded_range = std::get_if<DataPadded>(&range)) {
    const double sd = std::sqrt(fit.params.sigma2);
    lo = padded_range->data_min - 2.0 * sd;
    hi = padded_range->data_max + 2.0 * sd;
  } else {
    const auto& fixed_range = std::get<FixedRange>(range);
    lo = fixed_range.lo;
    hi = fixed_range.hi;
  }
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("density grid range is empty");

  std::vector<DensityPoint> grid(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = i + 1 == n_points ? hi : lo + step * static_cast<double>(i);
    grid[i] = {x, std::exp(log_density(x, fit.params))};
  }
  return grid;
}

std::string density_grid_csv(const FitResult& unconstrained, const FitResult& constrained, std::size_t n_points,
                             const RangePolicy& range) {
  const auto unc = emit_density_grid(unconstrained, n_points, range);
  std::string out = "x,density_unconstrained,density_constrained";
  out += kCrlf;
  for (const auto& p : unc) {
    out += format_double(p.x) + "," + format_double(p.density) + "," +
           format_double(std::exp(log_density(p.x, constrained.params)));
    out += kCrlf;
  }
  return out;
}

AnalysisReport analyze(const Sample& sample, const AnalysisConfig& config) {
  AnalysisReport report;
  report.config = config;
  report.tool_version = version();
  report.digest = {sample.size(), sample.min(), sample.max(), sample.mean(), sample.median()};

  if (config.run_mixture) {
    if (config.fixed_k) {
      report.mixture_tests.push_back(mixture_symmetry_test(sample, FixedK{*config.fixed_k}, config.test_options));
    } else {
      if (config.criteria.empty()) throw ConfigError("at least one selection criterion is required");
      SelectionOptions sel{config.test_options.em, config.test_options.constrained_table};
      SelectionTable table = select_k(sample, config.criteria.front(), config.k_max, sel);
      for (Criterion c : config.criteria) {
        const int k = choose_k(table, c);
        SymmetryTestResult t = symmetry_test_at_k(sample, k, config.test_options, &*table.row(k).unconstrained);
        t.criterion = c == Criterion::AIC ? TestCriterion::AIC : TestCriterion::BIC;
        report.mixture_tests.push_back(std::move(t));
      }
      report.selection = std::move(table);
    }
    const auto& first = report.mixture_tests.front();
    const RangePolicy range = DataPadded{sample.min(), sample.max()};
    for (const auto& p : emit_density_grid(first.unconstrained_fit, config.density_points, range)) {
      report.density_grid.push_back({p.x, p.density, std::exp(log_density(p.x, first.constrained_fit.params))});
    }
  }
  if (config.run_gupta) report.gupta = gupta_test(sample);
  return report;
}

std::string report_to_json(const AnalysisReport& report, int indent) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", "symmix"}, {"version", report.tool_version}};
  j["input"] = {{"name", report.config.input_name}, {"n", report.digest.n},       {"min", report.digest.min},
                {"max", report.digest.max},         {"mean", report.digest.mean}, {"median", report.digest.median}};

  const auto& cfg = report.config;
  ordered_json config;
  config["run_mixture"] = cfg.run_mixture;
  config["run_gupta"] = cfg.run_gupta;
  ordered_json criteria = ordered_json::array();
  for (Criterion c : cfg.criteria) criteria.push_back(to_string(c));
  config["criteria"] = criteria;
  config["fixed_k"] = cfg.fixed_k ? ordered_json(*cfg.fixed_k) : ordered_json(nullptr);
  config["k_max"] = cfg.k_max;
  config["em"] = em_json(cfg.test_options.em);
  config["boundary_weight"] = cfg.test_options.boundary_weight;
  config["density_points"] = cfg.density_points;
  j["config"] = config;

  j["selection"] = report.selection ? selection_json(*report.selection) : ordered_json(nullptr);
  j["mixture_tests"] = ordered_json::array();
  for (const auto& t : report.mixture_tests) j["mixture_tests"].push_back(test_json(t));
  j["gupta"] = report.gupta ? gupta_json(*report.gupta) : ordered_json(nullptr);

  ordered_json grid;
  grid["columns"] = {"x", "density_unconstrained", "density_constrained"};
  grid["rows"] = ordered_json::array();
  for (const auto& row : report.density_grid) grid["rows"].push_back(row);
  j["density_grid"] = grid;
  return j.dump(indent);
}

std::string report_to_text(const AnalysisReport& report) {
  std::ostringstream out;
  const auto& d = report.digest;
  out << "symmix " << report.tool_version << "\n";
  out << "input: " << (report.config.input_name.empty() ? "-" : report.config.input_name) << "  n=" << d.n
      << "  min=" << shortest(d.min) << "  max=" << shortest(d.max) << "  mean=" << fixed(d.mean, 4)
      << "  median=" << fixed(d.median, 4) << "\n\n";

  if (report.selection) {
    out << "Number of mixture components selection\n";
    out << "     |            H0 false               |            H0 true\n";
    out << "   k | # par       loglik      AIC      BIC | # par       loglik      AIC      BIC\n";
    for (const auto& row : report.selection->rows) {
      out << padded(std::to_string(row.k), 4) << " |";
      for (const auto* fit : {row.unconstrained ? &*row.unconstrained : nullptr,
                              row.constrained ? &*row.constrained : nullptr}) {
        if (fit != nullptr) {
          out << padded(std::to_string(fit->npar), 6) << padded(fixed(fit->loglik, 3), 13)
              << padded(fixed(fit->aic, 3), 9) << padded(fixed(fit->bic, 3), 9);
        } else {
          out << padded("-", 6) << padded("-", 13) << padded("-", 9) << padded("-", 9);
        }
        out << " |";
      }
      out << "\n";
    }
    out << "chosen k: " << report.selection->chosen_k << " (" << to_string(report.selection->criterion) << ")\n\n";
  }

  if (!report.mixture_tests.empty()) {
    out << "Mixture-based test of symmetry\n";
    out << padded("", 10);
    for (const auto& t : report.mixture_tests) {
      out << padded(to_string(t.criterion) + " k=" + std::to_string(t.chosen_k), 14);
    }
    out << "\n";
    out << "deviance  ";
    for (const auto& t : report.mixture_tests) out << padded(fixed(t.deviance, 3), 14);
    out << "\ndf        ";
    for (const auto& t : report.mixture_tests) out << padded(std::to_string(t.df), 14);
    out << "\np-value   ";
    for (const auto& t : report.mixture_tests) out << padded(p_value_text(t.p_value.value()), 14);
    out << "\n";
    for (const auto& t : report.mixture_tests) {
      if (t.auto_accepted) out << "note: k=1 selected (" << to_string(t.criterion) << "); symmetry accepted\n";
      if (t.boundary) out << "note: an estimated weight is on the boundary; chi-square reference is approximate\n";
    }
    out << "\n";

    out << "Parameter estimates (unconstrained)\n";
    for (const auto& t : report.mixture_tests) {
      const auto& p = t.unconstrained_fit.params;
      out << "  " << to_string(t.criterion) << " k=" << t.chosen_k << "\n";
      for (int j = 0; j < p.k(); ++j) {
        out << "    pi_" << j + 1 << padded(fixed(p.weights[static_cast<std::size_t>(j)], 4), 10) << "    mu_" << j + 1
            << padded(fixed(p.support_point(static_cast<std::size_t>(j)), 4), 10) << "\n";
      }
      out << "    alpha " << fixed(p.alpha, 4) << "  beta " << fixed(p.beta, 4) << "  sigma2 " << fixed(p.sigma2, 4)
          << "\n";
    }
    out << "\n";
  }

  if (report.gupta) {
    const auto& g = *report.gupta;
    out << "Gupta test (third standardized moment)\n";
    out << "b1        " << fixed(g.b1, 6) << "\n";
    out << "S1        " << fixed(g.s1, 4) << "\n";
    out << "p-value   " << p_value_text(g.p_value.value()) << "\n";
  }
  return out.str();
}

std::map<std::string, std::string> study_tables_csv(const StudyReport& report) {
  const auto& spec = report.spec;
  std::map<std::string, std::string> files;

  auto rates_table = [&](bool symmetric) -> std::optional<std::string> {
    std::vector<DistributionTag> tags;
    for (const auto& d : spec.distributions) {
      if (d.symmetric() == symmetric) tags.push_back(d.tag);
    }
    if (tags.empty()) return std::nullopt;
    std::string out = "level,test,n";
    for (auto t : tags) out += "," + to_string(t);
    out += kCrlf;
    for (double level : spec.levels) {
      for (StudyTest test : spec.tests) {
        for (std::size_t n : spec.sample_sizes) {
          out += shortest(level) + "," + to_string(test) + "," + std::to_string(n);
          for (auto t : tags) out += "," + shortest(report.rejection_rates.at(CellKey{test, t, n, level}).rate);
          out += kCrlf;
        }
      }
    }
    return out;
  };

  auto kfreq_table = [&](bool symmetric) -> std::optional<std::string> {
    std::vector<DistributionTag> tags;
    for (const auto& d : spec.distributions) {
      if (d.symmetric() == symmetric && report.k_frequencies.contains(KFrequencyKey{Criterion::AIC, d.tag,
                                                                                    spec.sample_sizes.front()})) {
        tags.push_back(d.tag);
      }
    }
    if (tags.empty()) return std::nullopt;
    std::string out = "n,k";
    for (auto t : tags) out += "," + to_string(t) + "_aic," + to_string(t) + "_bic";
    out += kCrlf;
    for (std::size_t n : spec.sample_sizes) {
      for (std::size_t b = 0; b < 4; ++b) {
        out += std::to_string(n) + "," + k_label(b);
        for (auto t : tags) {
          for (Criterion c : {Criterion::AIC, Criterion::BIC}) {
            const auto it = report.k_frequencies.find(KFrequencyKey{c, t, n});
            out += "," + (it == report.k_frequencies.end() ? std::string() : shortest(it->second[b]));
          }
        }
        out += kCrlf;
      }
    }
    return out;
  };

  if (auto t = rates_table(true)) files["levels.csv"] = *t;
  if (auto t = rates_table(false)) files["power.csv"] = *t;
  if (auto t = kfreq_table(true)) files["k_frequency_symmetric.csv"] = *t;
  if (auto t = kfreq_table(false)) files["k_frequency_skewed.csv"] = *t;

  std::string lng = "test,distribution,n,level,rate,standard_error,rejections,successes,failures";
  lng += kCrlf;
  for (const auto& [key, cell] : report.rejection_rates) {
    lng += to_string(key.test) + "," + to_string(key.distribution) + "," + std::to_string(key.n) + "," +
           shortest(key.level) + "," + shortest(cell.rate) + "," + shortest(cell.standard_error) + "," +
           std::to_string(cell.rejections) + "," + std::to_string(cell.successes) + "," + std::to_string(cell.failures);
    lng += kCrlf;
  }
  files["rejection_rates.csv"] = lng;
  return files;
}

std::string study_to_json(const StudyReport& report, int indent) {
  const auto& spec = report.spec;
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", "symmix"}, {"version", version()}};
  ordered_json s;
  s["distributions"] = ordered_json::array();
  for (const auto& d : spec.distributions) s["distributions"].push_back(distribution_json(d));
  s["sample_sizes"] = spec.sample_sizes;
  s["replicates"] = spec.replicates;
  s["levels"] = spec.levels;
  ordered_json tests = ordered_json::array();
  for (auto t : spec.tests) tests.push_back(to_string(t));
  s["tests"] = tests;
  s["master_seed"] = spec.master_seed;
  s["generator"] = std::string(kGeneratorId);
  s["k_max"] = spec.k_max;
  s["em"] = em_json(spec.em);
  s["max_failure_rate"] = spec.max_failure_rate;
  j["spec"] = s;

  j["rejection_rates"] = ordered_json::array();
  for (const auto& [key, cell] : report.rejection_rates) {
    j["rejection_rates"].push_back({{"test", to_string(key.test)},
                                    {"distribution", to_string(key.distribution)},
                                    {"n", key.n},
                                    {"level", key.level},
                                    {"rate", cell.rate},
                                    {"standard_error", cell.standard_error},
                                    {"rejections", cell.rejections},
                                    {"successes", cell.successes},
                                    {"failures", cell.failures}});
  }
  j["k_frequencies"] = ordered_json::array();
  for (const auto& [key, row] : report.k_frequencies) {
    j["k_frequencies"].push_back({{"criterion", to_string(key.criterion)},
                                  {"distribution", to_string(key.distribution)},
                                  {"n", key.n},
                                  {"buckets", {"1", "3", "5", ">5"}},
                                  {"percent", row}});
  }
  j["metadata"] = {{"wall_seconds", report.wall_seconds}, {"workers", report.workers}};
  return j.dump(indent);
}

std::string study_summary_text(const StudyReport& report) {
  std::ostringstream out;
  const auto& spec = report.spec;
  out << "replicates=" << spec.replicates << " seed=" << spec.master_seed << " generator=" << kGeneratorId
      << " k_max=" << spec.k_max << " restarts=" << spec.em.restarts << "\n";
  for (double level : spec.levels) {
    out << "\nlevel " << shortest(level) << "\n";
    out << padded("test", 12) << padded("n", 6);
    for (const auto& d : spec.distributions) out << padded(to_string(d.tag), 10);
    out << "\n";
    for (StudyTest test : spec.tests) {
      for (std::size_t n : spec.sample_sizes) {
        out << padded(to_string(test), 12) << padded(std::to_string(n), 6);
        for (const auto& d : spec.distributions) {
          out << padded(fixed(report.rejection_rates.at(CellKey{test, d.tag, n, level}).rate, 3), 10);
        }
        out << "\n";
      }
    }
  }
  out << "\nwall time " << fixed(report.wall_seconds, 1) << " s with " << report.workers << " worker(s)\n";
  return out.str();
}

std::vector<std::filesystem::path> write_study(const StudyReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << body;
    written.push_back(path);
  };
  for (const auto& [name, body] : study_tables_csv(report)) put(name, body);
  put("study.json", study_to_json(report) + "\n");
  return written;
}

}  // namespace symmix
