#include <benchmark/benchmark.h>

#include "pcjoin/generators.hpp"
#include "pcjoin/hexagon.hpp"
#include "pcjoin/join.hpp"

namespace {

// Odd cubes: the hexagon generators need n = m^3 with m odd.
void cube_args(benchmark::internal::Benchmark* b) {
  for (int m : {9, 15, 21, 27, 33}) b->Arg(m * m * m);
}

void BM_HexagonJoin(benchmark::State& state) {
  const auto inst = pcj::gen_pc_hexagon(static_cast<std::uint64_t>(state.range(0)), 1);
  const auto &r1 = inst.relation("R1"), &r2 = inst.relation("R2"), &r3 = inst.relation("R3"), &r4 = inst.relation("R4");
  for (auto _ : state) benchmark::DoNotOptimize(pcj::hexagon_join(r1, r2, r3, r4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HexagonJoin)->Apply(cube_args)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

void BM_GenericJoinPcHexagon(benchmark::State& state) {
  const auto inst = pcj::gen_pc_hexagon(static_cast<std::uint64_t>(state.range(0)), 1);
  const auto q = pcj::hexagon_query();
  for (auto _ : state) benchmark::DoNotOptimize(pcj::generic_join(q, inst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GenericJoinPcHexagon)->Apply(cube_args)->Complexity()->Unit(benchmark::kMillisecond);

void BM_GenericJoinHardDc(benchmark::State& state) {
  const auto inst = pcj::gen_hexagon_hard_dc(static_cast<std::uint64_t>(state.range(0)));
  const auto q = pcj::hexagon_query();
  for (auto _ : state) benchmark::DoNotOptimize(pcj::generic_join(q, inst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GenericJoinHardDc)->Arg(27)->Arg(125)->Arg(343)->Arg(729)->Complexity()->Unit(benchmark::kMillisecond);

}  // namespace
