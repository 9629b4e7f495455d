#include <cmath>

#include <benchmark/benchmark.h>

#include "kinetica/dsl.hpp"
#include "kinetica/lattice.hpp"
#include "kinetica/ssa.hpp"

using namespace kinetica;

namespace {

const ReactionNetwork& schloegl() {
  static const ReactionNetwork net = parse_network("0 <=> X @ 0.06, 0.292\n2 X <=> 3 X @ 0.25, 0.020833333333333332\n");
  return net;
}

SimConfig sim_config() {
  SimConfig config;
  config.scale = 200.0;
  config.t_end = 5.0;
  for (int i = 0; i <= 50; ++i) config.sample_times.push_back(0.1 * i);
  config.seed = 42;
  return config;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto config = sim_config();
  const auto law = InitialLaw::deterministic(state_from_concentrations({1.0}, config.scale));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble_serial(schloegl(), law, config, static_cast<std::size_t>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto config = sim_config();
  const auto law = InitialLaw::deterministic(state_from_concentrations({1.0}, config.scale));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble(schloegl(), law, config, static_cast<std::size_t>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void run_pde(benchmark::State& state, bool parallel) {
  const auto net = parse_network("A <=> B @ 1, 2\n");
  LatticeConfig config;
  config.dimension = 2;
  config.extent = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  config.jump_rates = {{0.75, 0.25, 0.5, 0.5}, {0.5, 0.5, 0.75, 0.25}};
  config.epsilon = 0.05;
  config.scaling = Scaling::euler;
  const auto profile = [](std::size_t v, double x, double y) {
    return v == 0 ? 1.0 + 0.5 * std::sin(x) * std::cos(y) : 0.5;
  };
  PdeOptions options;
  options.refine = 2;
  options.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(reference_pde(net, config, profile, {0.0, 0.2}, options));
}

void BM_PdeSerial(benchmark::State& state) { run_pde(state, false); }
void BM_PdeParallel(benchmark::State& state) { run_pde(state, true); }

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PdeSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PdeParallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
