#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "fmto/exotic.hpp"
#include "fmto/optics.hpp"
#include "fmto/reference.hpp"
#include "fmto/spectral.hpp"

using namespace fmto;

namespace {

AngleSeries libration(double duration) {
  AngleSeries s;
  s.dt = 5e-3;
  const auto n = static_cast<std::size_t>(duration / s.dt) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    s.timestamps.push_back(t);
    s.angles.push_back(1e-5 * std::cos(2 * pi * 4.99 * t));
    s.angular_rates.push_back(-2 * pi * 4.99 * 1e-5 * std::sin(2 * pi * 4.99 * t));
  }
  return s;
}

std::pair<std::vector<double>, std::vector<double>> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> t(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) / 50.0;
    x[i] = g(rng);
  }
  return {t, x};
}

void render(benchmark::State& st, Exec exec) {
  const auto s = libration(20.0);
  RenderOptions o;
  o.seed = 3;
  o.jitter_sigma = 2e-3;
  for (auto _ : st) benchmark::DoNotOptimize(render_frames(s, {}, o, 0, 0, exec).pixels.data());
  st.SetItemsProcessed(st.iterations() * 1000);
}

void BM_render_serial(benchmark::State& st) { render(st, Exec::serial); }
void BM_render_parallel(benchmark::State& st) { render(st, Exec::parallel); }

void BM_render_reference(benchmark::State& st) {
  const auto s = libration(20.0);
  RenderOptions o;
  o.seed = 3;
  for (auto _ : st) benchmark::DoNotOptimize(reference::render_frames(s, {}, o).pixels.data());
  st.SetItemsProcessed(st.iterations() * 1000);
}

void BM_track(benchmark::State& st) {
  const auto frames = render_frames(libration(20.0), {}, {});
  for (auto _ : st) benchmark::DoNotOptimize(track_centroid(frames).positions.data());
  st.SetItemsProcessed(st.iterations() * static_cast<long>(frames.size()));
}

void welch(benchmark::State& st, Exec exec) {
  const auto [t, x] = noise(300000);
  for (auto _ : st) benchmark::DoNotOptimize(welch_psd(t, x, {}, exec).average.psd.data());
}

void BM_welch_serial(benchmark::State& st) { welch(st, Exec::serial); }
void BM_welch_parallel(benchmark::State& st) { welch(st, Exec::parallel); }

void BM_welch_reference(benchmark::State& st) {
  const auto [t, x] = noise(12000);
  WelchOptions o;
  o.segment_length = 20.0;
  for (auto _ : st) benchmark::DoNotOptimize(reference::welch_psd(t, x, o).average.psd.data());
}

void bounds(benchmark::State& st, Exec exec) {
  const auto grid = log_grid(1e-4, 1e-1, 2000);
  const auto c = ExoticSourceConfig::reference();
  for (auto _ : st) benchmark::DoNotOptimize(coupling_bound_curve(c, grid, 55e-15, 1e4, exec).data());
}

void BM_bounds_serial(benchmark::State& st) { bounds(st, Exec::serial); }
void BM_bounds_parallel(benchmark::State& st) { bounds(st, Exec::parallel); }

void BM_pseudo_field_numeric(benchmark::State& st) {
  const auto c = ExoticSourceConfig::reference();
  for (auto _ : st) benchmark::DoNotOptimize(pseudo_field_numeric(c, 1e-3, 1.0));
}

}  // namespace

BENCHMARK(BM_render_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_render_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_render_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_track)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_welch_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_welch_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_welch_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bounds_serial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_bounds_parallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_pseudo_field_numeric)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
