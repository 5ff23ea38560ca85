#include "symmix/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "symmix/error.hpp"

namespace symmix {

RandomStream RandomStream::child(std::uint64_t index) const noexcept {
  return RandomStream{splitmix64(master_seed ^ splitmix64(stream_index)), index};
}

Xoshiro256::Xoshiro256(const RandomStream& stream) noexcept {
  std::uint64_t x = splitmix64(stream.master_seed) ^ splitmix64(stream.stream_index + 0x9E3779B97F4A7C15ULL);
  for (auto& word : s_) {
    word = splitmix64(x);
    x += 0x9E3779B97F4A7C15ULL;
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform_open() noexcept {
  // (m + 0.5) / 2^53 is never 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Xoshiro256::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Xoshiro256::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double u = uniform_open();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void NM3Params::validate() const {
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("NM3 weights must be positive");
  }
  if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-12) throw ConfigError("NM3 weights must sum to 1");
  if (weights[0] != weights[2]) throw ConfigError("NM3 outer weights must be equal");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ConfigError("NM3 variance must be positive");
  for (double m : means) {
    if (!std::isfinite(m)) throw ConfigError("NM3 means must be finite");
  }
  if (means[0] != -means[2] || means[1] != 0.0) throw ConfigError("NM3 means must be symmetric about 0 (-m, 0, m)");
  if (!(means[0] < means[1])) throw ConfigError("NM3 means must be increasing");
}

bool SimDistribution::symmetric() const noexcept {
  switch (tag) {
    case DistributionTag::StdNormal:
    case DistributionTag::StudentT5:
    case DistributionTag::Laplace:
    case DistributionTag::SymNM3:
      return true;
    default:
      return false;
  }
}

namespace {

struct TagName {
  DistributionTag tag;
  const char* name;
};

constexpr TagName kTagNames[] = {
    {DistributionTag::StdNormal, "norm"},     {DistributionTag::StudentT5, "t5"},
    {DistributionTag::Laplace, "laplace"},    {DistributionTag::SymNM3, "nm3"},
    {DistributionTag::ChiSq1, "chisq1"},      {DistributionTag::ChiSq5, "chisq5"},
    {DistributionTag::ChiSq10, "chisq10"},    {DistributionTag::LogNormal01, "lognorm"},
};

}  // namespace

std::string to_string(DistributionTag tag) {
  for (const auto& entry : kTagNames) {
    if (entry.tag == tag) return entry.name;
  }
  return "unknown";
}

DistributionTag parse_distribution_tag(std::string_view text) {
  for (const auto& entry : kTagNames) {
    if (text == entry.name) return entry.tag;
  }
  std::string valid;
  for (const auto& entry : kTagNames) {
    if (!valid.empty()) valid += ", ";
    valid += entry.name;
  }
  throw ConfigError("unknown distribution '" + std::string(text) + "' (valid: " + valid + ")");
}

const std::vector<DistributionTag>& all_distribution_tags() {
  static const std::vector<DistributionTag> tags = [] {
    std::vector<DistributionTag> out;
    for (const auto& entry : kTagNames) out.push_back(entry.tag);
    return out;
  }();
  return tags;
}

std::vector<double> draw_sample(const SimDistribution& dist, std::size_t n, const RandomStream& stream) {
  if (n == 0) throw DomainError("draw_sample: n must be positive");
  if (dist.tag == DistributionTag::SymNM3) dist.nm3.validate();

  Xoshiro256 gen(stream);
  std::vector<double> out(n);
  auto chisq = [&gen](double df) { return 2.0 * gen.gamma(0.5 * df); };

  switch (dist.tag) {
    case DistributionTag::StdNormal:
      std::ranges::generate(out, [&] { return gen.normal(); });
      break;
    case DistributionTag::StudentT5:
      std::ranges::generate(out, [&] {
        const double z = gen.normal();
        return z / std::sqrt(chisq(5.0) / 5.0);
      });
      break;
    case DistributionTag::Laplace:
      std::ranges::generate(out, [&] {
        const double u = gen.uniform_open() - 0.5;
        return u < 0.0 ? std::log(1.0 + 2.0 * u) : -std::log(1.0 - 2.0 * u);
      });
      break;
    case DistributionTag::SymNM3: {
      const double sd = std::sqrt(dist.nm3.variance);
      const double cut1 = dist.nm3.weights[0];
      const double cut2 = cut1 + dist.nm3.weights[1];
      std::ranges::generate(out, [&] {
        const double u = gen.uniform();
        const std::size_t j = u < cut1 ? 0 : (u < cut2 ? 1 : 2);
        return dist.nm3.means[j] + sd * gen.normal();
      });
      break;
    }
    case DistributionTag::ChiSq1:
      std::ranges::generate(out, [&] { return chisq(1.0); });
      break;
    case DistributionTag::ChiSq5:
      std::ranges::generate(out, [&] { return chisq(5.0); });
      break;
    case DistributionTag::ChiSq10:
      std::ranges::generate(out, [&] { return chisq(10.0); });
      break;
    case DistributionTag::LogNormal01:
      std::ranges::generate(out, [&] { return std::exp(gen.normal()); });
      break;
  }
  return out;
}

}  // namespace symmix
