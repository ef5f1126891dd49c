#include <benchmark/benchmark.h>

#include <vector>

#include "quadosc/calibration.hpp"
#include "quadosc/config.hpp"
#include "quadosc/crawler.hpp"
#include "quadosc/oscillator.hpp"
#include "quadosc/pipeline.hpp"
#include "quadosc/quadrature.hpp"
#include "quadosc/signal.hpp"
#include "quadosc/trace_io.hpp"

using namespace quadosc;

namespace {

void BM_OscillatorSnaps(benchmark::State& state) {
  osc::Config cfg;
  cfg.left_sma = io::default_sma();
  cfg.right_sma = cfg.left_sma;
  cfg.current = 0.24;
  const int snaps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(osc::simulate(cfg, snaps));
  state.SetItemsProcessed(state.iterations() * snaps);
}
BENCHMARK(BM_OscillatorSnaps)->Arg(30)->Arg(300);

void BM_QuadratureCycles(benchmark::State& state) {
  const auto cfg = pipeline::matched_config(io::default_sma(), 0.24, 0.05);
  const int cycles = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(quad::simulate(cfg, cycles));
  state.SetItemsProcessed(state.iterations() * cycles);
}
BENCHMARK(BM_QuadratureCycles)->Arg(20)->Arg(100);

void BM_QuadratureNoisy(benchmark::State& state) {
  auto cfg = pipeline::matched_config(io::default_sma(), 0.24, 0.05);
  cfg.noise = quad::NoiseSpec{0.02};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.rng_seed = seed++;
    benchmark::DoNotOptimize(quad::simulate(cfg, 100));
  }
}
BENCHMARK(BM_QuadratureNoisy);

void BM_Calibrate(benchmark::State& state) {
  const std::vector<calib::PeriodObservation> obs = {{0.23, 6.0}, {0.26, 2.2}};
  for (auto _ : state) benchmark::DoNotOptimize(calib::calibrate_thermal(obs, sma::ThermalParams{}));
}
BENCHMARK(BM_Calibrate);

void BM_BinarizePhase(benchmark::State& state) {
  const auto r = quad::simulate(pipeline::matched_config(io::default_sma(), 0.24, 0.05), 50);
  const auto a = io::sample_wave(r.p1_waves[0], 100.0);
  const auto b = io::sample_wave(r.p2_waves[0], 100.0);
  for (auto _ : state) {
    const auto wa = signal::binarize(a).wave;
    const auto wb = signal::binarize(b).wave;
    benchmark::DoNotOptimize(signal::phase_offset(wa, wb));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(a.samples.size() + b.samples.size()));
}
BENCHMARK(BM_BinarizePhase);

void BM_GaitCycle(benchmark::State& state) {
  const crawler::Geometry g;
  const auto seq = crawler::default_sequence();
  for (auto _ : state) benchmark::DoNotOptimize(crawler::run_cycle(g, seq));
}
BENCHMARK(BM_GaitCycle);

void BM_SweepDCycle(benchmark::State& state) {
  std::vector<calib::Axis> axes(2);
  axes[0].name = "current_a";
  for (int i = 0; i < 7; ++i) axes[0].values.push_back(0.23 + 0.005 * i);
  axes[1].name = "tau_act_s";
  axes[1].values = {0.5, 1.0, 2.0, 4.0};
  calib::SweepBase base;
  base.sma = io::default_sma();
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(calib::sweep(axes, calib::Objective::d_cycle, base, threads));
}
BENCHMARK(BM_SweepDCycle)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
