#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "symmix/error.hpp"
#include "symmix/random.hpp"

namespace symmix {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double b1 = 0.0;
};

Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  m.mean = static_cast<double>(oracle::mean(xs));
  const long double m2 = oracle::central_moment(xs, 2);
  const long double m3 = oracle::central_moment(xs, 3);
  m.var = static_cast<double>(m2);
  m.b1 = static_cast<double>(m3 / std::pow(m2, 1.5L));
  return m;
}

constexpr std::size_t kBig = 1'000'000;

TEST(RandomStream, SameAddressSameSequence) {
  const RandomStream s{42, 7};
  for (auto tag : all_distribution_tags()) {
    const SimDistribution d{tag, {}};
    EXPECT_EQ(draw_sample(d, 257, s), draw_sample(d, 257, s)) << to_string(tag);
  }
}

TEST(RandomStream, DistinctIndicesDoNotOverlap) {
  // No raw 64-bit output of one stream's prefix appears in another's.
  constexpr int kStreams = 64;
  constexpr int kPrefix = 512;
  std::set<std::uint64_t> seen;
  for (int s = 0; s < kStreams; ++s) {
    Xoshiro256 gen(RandomStream{2024, static_cast<std::uint64_t>(s)});
    for (int i = 0; i < kPrefix; ++i) EXPECT_TRUE(seen.insert(gen()).second) << "stream " << s << " draw " << i;
  }
  // Same index under different master seeds differ as well.
  Xoshiro256 a(RandomStream{1, 0});
  Xoshiro256 b(RandomStream{2, 0});
  EXPECT_NE(a(), b());
}

TEST(RandomStream, ChildStreamsAreDistinct) {
  const RandomStream parent{99, 3};
  EXPECT_NE(parent.child(0), parent.child(1));
  EXPECT_NE(parent.child(0).master_seed, parent.master_seed);
  Xoshiro256 a(parent.child(0));
  Xoshiro256 b(parent.child(1));
  EXPECT_NE(a(), b());
}

TEST(Xoshiro, UniformRanges) {
  Xoshiro256 gen(RandomStream{5, 5});
  for (int i = 0; i < 100000; ++i) {
    const double u = gen.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = gen.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(DrawSample, StandardNormalMoments) {
  const auto xs = draw_sample({DistributionTag::StdNormal, {}}, kBig, RandomStream{11, 0});
  const auto m = moments_of(xs);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  EXPECT_NEAR(m.var, 1.0, 0.02);
}

TEST(DrawSample, ChiSquareFiveMean) {
  const auto xs = draw_sample({DistributionTag::ChiSq5, {}}, kBig, RandomStream{12, 0});
  EXPECT_NEAR(moments_of(xs).mean, 5.0, 0.03);
}

TEST(DrawSample, ChiSquareMeansAndVariances) {
  // E = nu, Var = 2 nu.
  for (auto [tag, nu] : {std::pair{DistributionTag::ChiSq1, 1.0}, std::pair{DistributionTag::ChiSq10, 10.0}}) {
    const auto m = moments_of(draw_sample({tag, {}}, kBig, RandomStream{13, 0}));
    EXPECT_NEAR(m.mean, nu, 0.02 * nu + 0.01);
    EXPECT_NEAR(m.var, 2.0 * nu, 0.05 * 2.0 * nu);
  }
}

TEST(DrawSample, SymmetricTagsHaveNoSkew) {
  for (auto tag : {DistributionTag::StdNormal, DistributionTag::StudentT5, DistributionTag::Laplace,
                   DistributionTag::SymNM3}) {
    const auto m = moments_of(draw_sample({tag, {}}, kBig, RandomStream{21, 1}));
    EXPECT_NEAR(m.b1, 0.0, 0.02) << to_string(tag);
  }
}

TEST(DrawSample, KnownVariances) {
  // t5: 5/3. Laplace(1): 2. Default NM3: 1 + 2 * 0.25 * 4 = 3.
  EXPECT_NEAR(moments_of(draw_sample({DistributionTag::StudentT5, {}}, kBig, RandomStream{3, 3})).var, 5.0 / 3.0,
              0.05);
  EXPECT_NEAR(moments_of(draw_sample({DistributionTag::Laplace, {}}, kBig, RandomStream{3, 4})).var, 2.0, 0.03);
  EXPECT_NEAR(moments_of(draw_sample({DistributionTag::SymNM3, {}}, kBig, RandomStream{3, 5})).var, 3.0, 0.03);
}

TEST(DrawSample, SupportConstraints) {
  const auto ln = draw_sample({DistributionTag::LogNormal01, {}}, 200000, RandomStream{8, 8});
  EXPECT_TRUE(std::ranges::all_of(ln, [](double x) { return x > 0.0; }));
  for (auto tag : {DistributionTag::ChiSq1, DistributionTag::ChiSq5, DistributionTag::ChiSq10}) {
    const auto xs = draw_sample({tag, {}}, 200000, RandomStream{8, 9});
    EXPECT_TRUE(std::ranges::all_of(xs, [](double x) { return x >= 0.0; })) << to_string(tag);
  }
}

TEST(DrawSample, LogNormalMedianIsOne) {
  auto xs = draw_sample({DistributionTag::LogNormal01, {}}, 200001, RandomStream{8, 10});
  std::ranges::nth_element(xs, xs.begin() + 100000);
  EXPECT_NEAR(xs[100000], 1.0, 0.01);
}

TEST(DrawSample, RejectsBadInput) {
  EXPECT_THROW(draw_sample({DistributionTag::StdNormal, {}}, 0, RandomStream{}), DomainError);
  SimDistribution bad{DistributionTag::SymNM3, {}};
  bad.nm3.weights = {0.3, 0.4, 0.2};
  EXPECT_THROW(draw_sample(bad, 10, RandomStream{}), ConfigError);
  bad.nm3.weights = {0.25, 0.5, 0.25};
  bad.nm3.means = {-2.0, 0.0, 1.5};
  EXPECT_THROW(draw_sample(bad, 10, RandomStream{}), ConfigError);
  bad.nm3.means = {-2.0, 0.0, 2.0};
  bad.nm3.variance = 0.0;
  EXPECT_THROW(draw_sample(bad, 10, RandomStream{}), ConfigError);
}

TEST(DistributionTags, RoundTripAndErrors) {
  for (auto tag : all_distribution_tags()) EXPECT_EQ(parse_distribution_tag(to_string(tag)), tag);
  try {
    parse_distribution_tag("cauchy");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lognorm"), std::string::npos);
  }
  EXPECT_EQ(all_distribution_tags().size(), 8u);
}

}  // namespace
}  // namespace symmix
