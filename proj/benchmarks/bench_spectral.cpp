#include <benchmark/benchmark.h>

#include "specmatch/descriptors.hpp"
#include "specmatch/laplace.hpp"
#include "specmatch/shapes.hpp"

using namespace specmatch;

namespace {

const TriMesh& sphere(int subdiv) {
  static const TriMesh s2 = make_icosphere(2);
  static const TriMesh s3 = make_icosphere(3);
  static const TriMesh s4 = make_icosphere(4);
  return subdiv == 2 ? s2 : (subdiv == 3 ? s3 : s4);
}

void BM_BuildOperators(benchmark::State& state) {
  const TriMesh& mesh = sphere(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_operators(mesh));
  }
  state.SetLabel(std::to_string(mesh.vertex_count()) + " vertices");
}
BENCHMARK(BM_BuildOperators)->Arg(2)->Arg(3)->Arg(4);

void BM_SpectrumDense(benchmark::State& state) {
  const OperatorPair ops = build_operators(sphere(3));
  EigsOptions options;
  options.method = EigsMethod::Dense;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_spectrum(ops, static_cast<int>(state.range(0)), options));
  }
}
BENCHMARK(BM_SpectrumDense)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_SpectrumLanczos(benchmark::State& state) {
  const OperatorPair ops = build_operators(sphere(4));
  EigsOptions options;
  options.method = EigsMethod::ShiftInvertLanczos;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_spectrum(ops, static_cast<int>(state.range(0)), options));
  }
}
BENCHMARK(BM_SpectrumLanczos)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Hks(benchmark::State& state) {
  const LaplaceSpectrum spectrum = compute_spectrum(build_operators(sphere(3)), 300);
  const HksSchedule schedule = HksSchedule::from_spectrum(spectrum);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hks(spectrum, schedule));
  }
  state.SetLabel("642 vertices, 300 modes, 100 samples");
}
BENCHMARK(BM_Hks)->Unit(benchmark::kMillisecond);

void BM_Wks(benchmark::State& state) {
  const LaplaceSpectrum spectrum = compute_spectrum(build_operators(sphere(3)), 300);
  const WksSchedule schedule = WksSchedule::from_spectrum(spectrum);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wks(spectrum, schedule));
  }
  state.SetLabel("642 vertices, 300 modes, 100 samples");
}
BENCHMARK(BM_Wks)->Unit(benchmark::kMillisecond);

}  // namespace
