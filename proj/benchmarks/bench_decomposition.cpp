#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "pcjoin/decomposition.hpp"

namespace {

pcj::Relation random_binary(pcj::Catalog& catalog, std::size_t n) {
  std::mt19937_64 rng(n);
  std::vector<pcj::Value> data;
  const std::size_t dom = n / 4;
  for (std::size_t i = 0; i < n; ++i) {
    data.push_back(catalog.intern("a" + std::to_string(rng() % dom)));
    data.push_back(catalog.intern("b" + std::to_string(rng() % dom)));
  }
  return pcj::Relation("R", {"A", "B"}, std::move(data));
}

const std::vector<pcj::ColumnSet> kPair = {pcj::column_bit(0), pcj::column_bit(1)};

void BM_DecomposeApprox(benchmark::State& state) {
  pcj::Catalog catalog;
  const auto r = random_binary(catalog, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pcj::decompose_approx(r, kPair, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecomposeApprox)->RangeMultiplier(10)->Range(10'000, 1'000'000)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

void BM_DecomposeExact(benchmark::State& state) {
  pcj::Catalog catalog;
  const auto r = random_binary(catalog, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pcj::decompose_exact(r, kPair, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecomposeExact)->RangeMultiplier(10)->Range(10'000, 100'000)->Complexity()
    ->Unit(benchmark::kMillisecond);

}  // namespace
