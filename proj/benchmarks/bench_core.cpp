#include <benchmark/benchmark.h>

#include <random>

#include "kemmer/currents.hpp"
#include "kemmer/fields.hpp"
#include "kemmer/grid.hpp"
#include "kemmer/guidance.hpp"

using namespace kemmer;

namespace {

ComplexVector random_state(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex{g(rng), g(rng)};
  return v;
}

void BM_EnergyMomentum(benchmark::State& state) {
  const Spin s = state.range(0) == 0 ? Spin::spin0 : Spin::spin1;
  const DkpRep& rep = representation(s);
  const ComplexVector psi = random_state(rep.dim, 42);
  for (auto _ : state) {
    Tensor2 th = energy_momentum(rep, psi);
    benchmark::DoNotOptimize(th);
  }
}
BENCHMARK(BM_EnergyMomentum)->Arg(0)->Arg(1);

void BM_MultiCurrent(benchmark::State& state) {
  const std::vector<Spin> kinds(2, state.range(0) == 0 ? Spin::spin0 : Spin::spin1);
  const MultiContext ctx(kinds, rest_observer());
  const ComplexVector psi = random_state(static_cast<int>(ctx.dim()), 43);
  for (auto _ : state) {
    MultiCurrent mc = ctx.evaluate(psi);
    benchmark::DoNotOptimize(mc);
  }
}
BENCHMARK(BM_MultiCurrent)->Arg(0)->Arg(1);

void BM_EmbeddedPsi(benchmark::State& state) {
  const ProcaField a = ProcaField::superposition(
      {proca_mode({1, 0}, Vec3{0.4, 0, 0}, 1.0, {Complex{0, 0}, Complex{1, 0}, Complex{0, 0.4}}),
       proca_mode({0.5, 0.2}, Vec3{0, 0.2, 0.3}, 1.0, {Complex{0.3, 0}, Complex{0, 0}, Complex{1, 0}})},
      1.0);
  const KemmerField f = embed_spin1(a);
  const Event e{0.4, Vec3{0.2, -0.1, 0.5}};
  for (auto _ : state) {
    ComplexVector psi = f.psi(e);
    benchmark::DoNotOptimize(psi);
  }
}
BENCHMARK(BM_EmbeddedPsi);

void BM_TrajectoryStep(benchmark::State& state) {
  const NrField f = NrField::two_slit(Spin::spin0, 1.0, 2.0, 0.35, 0.8);
  GuidanceConfig cfg;
  cfg.source = CurrentSource::nr_spin0;
  cfg.dt = 0.004;
  cfg.node_eps = 1e-15;
  const FlowFn flow = make_flow(f, cfg);
  double t = 0.0;
  for (auto _ : state) {
    Trajectory traj = integrate_flow(flow, 1, {Vec3{0.1, 0.9, 0.0}}, t, t + cfg.dt, cfg);
    benchmark::DoNotOptimize(traj);
  }
}
BENCHMARK(BM_TrajectoryStep);

void BM_GridSolve(benchmark::State& state) {
  const GridSpec spec{-16.0, 16.0, static_cast<int>(state.range(0)), 0.0, 0.5, 41};
  for (auto _ : state) {
    GridField g = GridField::solve_coupled_kg(
        spec, GridBoundary::dirichlet_zero, Potential1p1::linear_efield(0.4), 0.5, 1.0,
        [](double x) { return std::exp(Complex{-(x + 4.0) * (x + 4.0) / 4.0, 0.5 * x}); },
        [](double x) { return Complex{0, -1.1} * std::exp(Complex{-(x + 4.0) * (x + 4.0) / 4.0, 0.5 * x}); });
    benchmark::DoNotOptimize(g);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(spec.nx) * (spec.nt - 2));
}
BENCHMARK(BM_GridSolve)->Arg(321)->Arg(641);

}  // namespace

BENCHMARK_MAIN();
