#include <benchmark/benchmark.h>

#include <random>

#include "rpksim/engine.hpp"
#include "rpksim/properties.hpp"

namespace {

using namespace rpksim;

void BM_HonestHandshake(benchmark::State& state) {
  const auto scenario = *scenarios::find_builtin("honest-mutual-dane");
  for (auto _ : state) benchmark::DoNotOptimize(engine::run_scenario(scenario, 42));
}
BENCHMARK(BM_HonestHandshake);

void BM_AttackScenario(benchmark::State& state) {
  const auto scenario = *scenarios::find_builtin("preconfig-client-misbinding");
  for (auto _ : state) benchmark::DoNotOptimize(engine::run_scenario(scenario, 42));
}
BENCHMARK(BM_AttackScenario);

// Synthetic trace of n sessions, every fourth one missing its server event.
Trace synthetic_trace(std::size_t sessions) {
  std::mt19937_64 rng(7);
  Trace t;
  std::uint64_t seq = 0;
  auto key = [&] {
    Bytes b(32);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
  };
  for (std::size_t i = 0; i < sessions; ++i) {
    TraceEvent e;
    e.domain = "d" + std::to_string(i % 16);
    e.server_key = crypto::RawPublicKey{crypto::PublicKeyAlgorithm::kEd25519, key()};
    e.master_secret = key();
    e.kind = EventKind::kServerFinished;
    e.seq = ++seq;
    if (i % 4 != 3) t.push_back(e);
    e.kind = EventKind::kClientFinished;
    e.seq = ++seq;
    t.push_back(e);
  }
  return t;
}

void BM_ServerAuthCheck(benchmark::State& state) {
  const auto trace = synthetic_trace(static_cast<std::size_t>(state.range(0)));
  properties::CheckOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(properties::check_server_auth(trace, options));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ServerAuthCheck)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_Suite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(engine::run_suite(42));
}
BENCHMARK(BM_Suite)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
