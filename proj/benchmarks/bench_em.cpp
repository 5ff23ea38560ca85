#include <benchmark/benchmark.h>

#include "symmix/mixture.hpp"
#include "symmix/random.hpp"
#include "symmix/selection.hpp"
#include "symmix/symmetry_tests.hpp"

namespace {

symmix::Sample chisq_sample(std::size_t n) {
  return symmix::Sample(symmix::draw_sample(symmix::SimDistribution{symmix::DistributionTag::ChiSq1, {}}, n,
                                            symmix::RandomStream{7, n}));
}

void BM_EStep(benchmark::State& state) {
  const auto s = chisq_sample(static_cast<std::size_t>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  const auto p = symmix::init_params(s, k, false, 0, symmix::RandomStream{});
  for (auto _ : state) benchmark::DoNotOptimize(symmix::e_step(s, p));
  state.SetItemsProcessed(state.iterations() * state.range(0) * k);
}
BENCHMARK(BM_EStep)->Args({100, 3})->Args({100, 7})->Args({1000, 7});

void BM_FitEm(benchmark::State& state) {
  const auto s = chisq_sample(static_cast<std::size_t>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(symmix::fit_em(s, k, false, symmix::EmOptions{}));
}
BENCHMARK(BM_FitEm)->Args({100, 3})->Args({100, 7})->Unit(benchmark::kMillisecond);

void BM_SelectK(benchmark::State& state) {
  const auto s = chisq_sample(static_cast<std::size_t>(state.range(0)));
  symmix::SelectionOptions opt;
  opt.fit_constrained = false;
  for (auto _ : state) benchmark::DoNotOptimize(symmix::select_k(s, symmix::Criterion::BIC, 7, opt));
}
BENCHMARK(BM_SelectK)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Gupta(benchmark::State& state) {
  const auto s = chisq_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(symmix::gupta_test(s));
}
BENCHMARK(BM_Gupta)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
