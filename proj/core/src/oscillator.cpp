#include "quadosc/oscillator.hpp"

#include <algorithm>
#include <cmath>

#include "quadosc/error.hpp"

namespace quadosc::osc {

const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

void Config::validate() const {
  left_sma.validate();
  right_sma.validate();
  if (!(current > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "oscillator '" + label + "': current must be > 0");
  }
}

State initial_state(const Config& cfg) {
  State s;
  s.left = sma::ambient_state(cfg.left_sma);
  s.right = sma::ambient_state(cfg.right_sma);
  return s;
}

namespace {

const sma::ThermalParams& params(const Config& cfg, Side side) {
  return side == Side::left ? cfg.left_sma : cfg.right_sma;
}

}  // namespace

State evolve(const State& s, const Config& cfg, double current, double dt) {
  State out = s;
  const Side on = s.beam.side;
  const Side off = opposite(on);
  out.sma(on) = sma::step(s.sma(on), params(cfg, on), current, dt);
  out.sma(off) = sma::step(s.sma(off), params(cfg, off), 0.0, dt);
  out.clock = s.clock + dt;
  return out;
}

std::optional<double> time_to_snap(const State& s, const Config& cfg, double current) {
  const Side on = s.beam.side;
  const Side off = opposite(on);
  const auto& p = params(cfg, on);
  const auto heat = sma::time_to_threshold(s.sma(on), p, current, p.t_act);
  if (!heat) return std::nullopt;
  const auto& q = params(cfg, off);
  const double release = sma::time_to_cool(s.sma(off), q, q.t_rel).value_or(0.0);
  return std::max(*heat, release);
}

State snap(const State& s, const Config& cfg) {
  State out = s;
  const Side fired = s.beam.side;
  out.sma(fired).temperature = params(cfg, fired).t_act;
  out.sma(fired).contracted = true;
  out.sma(opposite(fired)).contracted = false;
  out.beam.side = opposite(fired);
  return out;
}

std::optional<SnapResult> advance_to_next_snap(const State& s, const Config& cfg) {
  const auto dt = time_to_snap(s, cfg, cfg.current);
  if (!dt) return std::nullopt;
  return SnapResult{*dt, snap(evolve(s, cfg, cfg.current, *dt), cfg)};
}

std::vector<double> Run::half_periods() const {
  std::vector<double> out;
  double prev = 0.0;
  for (double t : snap_times) {
    out.push_back(t - prev);
    prev = t;
  }
  return out;
}

double Run::steady_state_period() const {
  const auto n = snap_times.size();
  if (n < 3) throw Error(ErrorCode::insufficient_edges, "need at least 3 snaps for a period");
  return snap_times[n - 1] - snap_times[n - 3];
}

signal::SignalTrace sample_beam(const signal::SquareWave& left_high, double amplitude,
                                double sample_period, std::string label) {
  if (!(sample_period > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sample period must be > 0");
  }
  signal::SignalTrace trace;
  trace.label = std::move(label);
  const double t0 = left_high.start;
  const auto n = static_cast<std::size_t>(std::floor((left_high.stop - t0) / sample_period + 1e-9));
  trace.samples.reserve(n + 1);
  std::size_t next_edge = 0;
  signal::Level level = left_high.initial_level;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = t0 + static_cast<double>(i) * sample_period;
    while (next_edge < left_high.edges.size() && left_high.edges[next_edge].t <= t) {
      level = !level;
      ++next_edge;
    }
    trace.samples.push_back({t, level == signal::Level::high ? -amplitude : amplitude});
  }
  return trace;
}

Run simulate(const Config& cfg, int n_snaps, double sample_period) {
  cfg.validate();
  if (n_snaps < 2) throw Error(ErrorCode::invalid_argument, "simulate needs n_snaps >= 2");

  Run run;
  State s = initial_state(cfg);
  run.a.label = cfg.label + ".A";
  run.a.initial_level = s.beam.side == Side::left ? signal::Level::high : signal::Level::low;
  run.a.start = 0.0;

  for (int i = 0; i < n_snaps; ++i) {
    const auto r = advance_to_next_snap(s, cfg);
    if (!r) {
      throw Error(ErrorCode::stalled,
                  "oscillator '" + cfg.label + "' stalled: current " +
                      std::to_string(cfg.current) + " A cannot reach activation temperature");
    }
    s = r->state;
    run.snap_times.push_back(s.clock);
    run.sides.push_back(s.beam.side);
    run.a.toggle(s.clock);
  }
  run.a.stop = s.clock;
  run.a_bar = run.a.complement(cfg.label + ".A_bar");
  run.beam_trace = sample_beam(run.a, s.beam.amplitude, sample_period, cfg.label);
  return run;
}

}  // namespace quadosc::osc
