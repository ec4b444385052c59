#include <benchmark/benchmark.h>

#include <cmath>

#include "nlkg/evolution.hpp"
#include "nlkg/functionals.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"

using namespace nlkg;

namespace {

Field bump(const GridPtr& g) {
  return Field::from_function(g, [](double r) { return std::exp(-r * r / 9.0); });
}

void BM_Laplacian(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  const Field f = bump(g);
  Field out(g);
  for (auto _ : state) {
    radial_laplacian(*g, f.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Laplacian)->Arg(4096)->Arg(16384);

void BM_Energy(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  const State s(bump(g), Field(g));
  for (auto _ : state) benchmark::DoNotOptimize(energy(s));
}
BENCHMARK(BM_Energy)->Arg(4096)->Arg(16384);

void BM_VerletSteps(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  const State s(bump(g), Field(g));
  EvolveConfig cfg;
  cfg.frame_stride = 0;
  cfg.stop_on_fate = false;
  const double t_final = 100 * cfg.dt_cfl * g->dr();
  for (auto _ : state) benchmark::DoNotOptimize(evolve(s, t_final, cfg).t_end);
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_VerletSteps)->Arg(4096)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_GroundBundle(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(make_bundle(g)->k);
}
BENCHMARK(BM_GroundBundle)->Arg(4096)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  const auto b = make_bundle(g);
  const State s(b->W + 0.01 * b->rho + 0.001 * bump(g), 0.005 * b->rho);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(s, *b).sigma);
}
BENCHMARK(BM_Decompose)->Arg(4096)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_SolitonDistance(benchmark::State& state) {
  const auto g = make_grid(5, static_cast<int>(state.range(0)), 100.0);
  const auto b = make_bundle(g);
  const State s(scaled_ground_state(g, 0.3) + 0.05 * bump(g), Field(g));
  for (auto _ : state) benchmark::DoNotOptimize(soliton_distance(s, *b));
}
BENCHMARK(BM_SolitonDistance)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace
