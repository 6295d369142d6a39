#include <benchmark/benchmark.h>

#include <numbers>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"
#include "modlab/gabor.hpp"
#include "modlab/propagator.hpp"
#include "modlab/seminorms.hpp"
#include "modlab/solver.hpp"

using namespace modlab;

namespace {

constexpr double kL = 8.0 * std::numbers::pi;

ComplexField packet(const Grid& g) {
  return sample(g, [&](const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += x[a] * x[a];
    return std::exp(-0.5 * r2) * cplx(std::cos(2.0 * x[0]), std::sin(2.0 * x[0]));
  });
}

void BM_FourierRoundTrip(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = make_grid(2, kL, n);
  ComplexField f = packet(g);
  for (auto _ : state) {
    std::vector<cplx> v = f.v;
    fourier_forward_inplace(g, v);
    fourier_inverse_inplace(g, v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_FourierRoundTrip)->Arg(64)->Arg(128)->Arg(256);

void BM_ModulationNorm(benchmark::State& state) {
  const Grid g = make_grid(2, kL, static_cast<int>(state.range(0)));
  const Partition P = build_partition();
  const ComplexField f = packet(g);
  for (auto _ : state) benchmark::DoNotOptimize(modulation_norm(f, {0.5, 2.0, 1.0}, P));
}
BENCHMARK(BM_ModulationNorm)->Arg(64)->Arg(128);

void BM_FrameOperator1D(benchmark::State& state) {
  const Grid g = make_grid(1, 16.0 * std::numbers::pi, static_cast<int>(state.range(0)));
  const FrameTruncation t = default_truncation(g);
  const ComplexField f = packet(g);
  for (auto _ : state) benchmark::DoNotOptimize(frame_operator_apply(f, t).v.data());
}
BENCHMARK(BM_FrameOperator1D)->Arg(512)->Arg(1024);

void BM_PropagateSpectral(benchmark::State& state) {
  const Grid g = make_grid(2, kL, static_cast<int>(state.range(0)));
  const Signature eps = Signature::from({1, -1});
  const ComplexField f = packet(g);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_spectral(f, 0.5, eps).v.data());
}
BENCHMARK(BM_PropagateSpectral)->Arg(128)->Arg(256);

void BM_StrangStep(benchmark::State& state) {
  const Grid g = make_grid(2, kL, static_cast<int>(state.range(0)));
  SolverParams p;
  p.eps = Signature::from({1, -1});
  p.lambda = {1.0, 1.0, 0.0};
  p.dt = 1e-2;
  p.T = 1.0;
  ComplexField u = packet(g);
  u *= cplx(0.01);
  for (auto _ : state) u = strang_step(u, p);
}
BENCHMARK(BM_StrangStep)->Arg(64)->Arg(96);

void BM_CompositeSeminorm(benchmark::State& state) {
  const Grid g = make_grid(2, kL, 64);
  const Partition P = build_partition();
  const SpaceTimeField u = free_evolution(packet(g), 0.5, static_cast<int>(state.range(0)), Signature::from({1, -1}));
  const std::vector<SeminormId> ids = {SeminormId::parse("max2d"), SeminormId::parse("str2")};
  for (auto _ : state) benchmark::DoNotOptimize(composite_seminorm(u, ids, P));
}
BENCHMARK(BM_CompositeSeminorm)->Arg(8)->Arg(16);

}  // namespace
BENCHMARK_MAIN();
