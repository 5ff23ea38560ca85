#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace symmix {

/// Identifier of the generator recorded in simulation reports.
inline constexpr std::string_view kGeneratorId = "xoshiro256**/splitmix64-v1";

/// SplitMix64 finalizer. Used for seeding and stream splitting.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// A reproducible stream address: (master_seed, stream_index).
///
/// The generator state for a stream is filled from a SplitMix64 sequence
/// started at splitmix64(master_seed) ^ splitmix64(stream_index + golden).
/// Distinct indices therefore land on unrelated 256-bit states.
struct RandomStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// A child stream whose master seed mixes this stream's address.
  RandomStream child(std::uint64_t index) const noexcept;

  friend bool operator==(const RandomStream&, const RandomStream&) = default;
};

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(const RandomStream& stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() noexcept;

  /// Standard normal by Marsaglia's polar method (caches the spare draw).
  double normal() noexcept;

  /// Gamma(shape, scale = 1) by Marsaglia-Tsang, with the U^(1/a) boost for a < 1.
  double gamma(double shape) noexcept;

private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class DistributionTag {
  StdNormal,
  StudentT5,
  Laplace,
  SymNM3,
  ChiSq1,
  ChiSq5,
  ChiSq10,
  LogNormal01,
};

/// Parameters of the symmetric three-component normal mixture generator.
struct NM3Params {
  std::array<double, 3> means{-2.0, 0.0, 2.0};
  double variance = 1.0;
  std::array<double, 3> weights{0.25, 0.5, 0.25};

  /// Throws ConfigError unless weights are positive, sum to one, are
  /// mirror-equal, and the means are symmetric about zero.
  void validate() const;
};

struct SimDistribution {
  DistributionTag tag = DistributionTag::StdNormal;
  NM3Params nm3{};

  bool symmetric() const noexcept;
};

std::string to_string(DistributionTag tag);

/// Parses the short tags used on the command line and in reports
/// ("norm", "t5", "laplace", "nm3", "chisq1", "chisq5", "chisq10", "lognorm").
DistributionTag parse_distribution_tag(std::string_view text);

/// All tags accepted by parse_distribution_tag, in canonical order.
const std::vector<DistributionTag>& all_distribution_tags();

/// n independent draws from dist, fully determined by the stream.
std::vector<double> draw_sample(const SimDistribution& dist, std::size_t n, const RandomStream& stream);

}  // namespace symmix
