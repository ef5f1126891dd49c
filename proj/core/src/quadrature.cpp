#include "quadosc/quadrature.hpp"

#include <random>

#include "quadosc/error.hpp"

namespace quadosc::quad {

using osc::Side;

const char* to_string(OscId id) {
  switch (id) {
    case OscId::central: return "central";
    case OscId::p1: return "p1";
    case OscId::p2: return "p2";
  }
  return "?";
}

const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::double_snap: return "DoubleSnap";
    case FaultKind::missed_snap: return "MissedSnap";
    case FaultKind::stalled: return "Stalled";
  }
  return "?";
}

void Gating::validate() const {
  const bool ok = (on_left == OscId::p1 && on_right == OscId::p2) ||
                  (on_left == OscId::p2 && on_right == OscId::p1);
  if (!ok) throw Error(ErrorCode::invalid_argument, "gating must map {left,right} onto {p1,p2}");
}

void Config::validate() const {
  central.validate();
  // Peripherals may be left unpowered (current 0) to isolate the central.
  for (const auto* p : {&p1, &p2}) {
    p->left_sma.validate();
    p->right_sma.validate();
    if (p->current < 0.0) {
      throw Error(ErrorCode::invalid_argument, "peripheral current must be >= 0");
    }
  }
  gating.validate();
  if (noise && !(noise->sigma_tau >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sigma_tau must be >= 0");
  }
  if (!(sample_period > 0.0)) throw Error(ErrorCode::invalid_argument, "sample period must be > 0");
}

const osc::Config& Config::get(OscId id) const {
  return id == OscId::central ? central : id == OscId::p1 ? p1 : p2;
}
osc::Config& Config::get(OscId id) {
  return id == OscId::central ? central : id == OscId::p1 ? p1 : p2;
}

const osc::State& SystemState::get(OscId id) const {
  return id == OscId::central ? central : id == OscId::p1 ? p1 : p2;
}
osc::State& SystemState::get(OscId id) {
  return id == OscId::central ? central : id == OscId::p1 ? p1 : p2;
}

SystemState initial_state(const Config& cfg) {
  return {osc::initial_state(cfg.central), osc::initial_state(cfg.p1),
          osc::initial_state(cfg.p2), 0.0};
}

OscId gates_closed(const SystemState& s, const Config& cfg) {
  return cfg.gating.powered(osc::active_contact(s.central));
}

int stage_of(const SystemState& s, const Gating& g) {
  // (central, first-gated, second-gated) sides walk a 3-bit Gray cycle.
  static constexpr int kStage[2][2][2] = {
      // central left: first L/R x second L/R
      {{1, 6}, {2, 5}},
      // central right
      {{8, 7}, {3, 4}},
  };
  const int c = s.central.beam.side == Side::right;
  const int f = s.get(g.on_left).beam.side == Side::right;
  const int b = s.get(g.on_right).beam.side == Side::right;
  return kStage[c][f][b];
}

namespace {

osc::Config jittered(const osc::Config& c, const std::array<double, 2>& m) {
  osc::Config out = c;
  out.left_sma.tau *= m[0];
  if (out.left_sma.tau_cool) *out.left_sma.tau_cool *= m[0];
  out.right_sma.tau *= m[1];
  if (out.right_sma.tau_cool) *out.right_sma.tau_cool *= m[1];
  return out;
}

std::size_t index(OscId id) { return static_cast<std::size_t>(id); }

}  // namespace

std::variant<EventStep, SyncFault> advance_event(const SystemState& s, const Config& cfg,
                                                 const TauJitter& jitter) {
  const std::array<osc::Config, 3> eff{jittered(cfg.central, jitter[0]),
                                       jittered(cfg.p1, jitter[1]),
                                       jittered(cfg.p2, jitter[2])};
  const OscId powered = gates_closed(s, cfg);
  const OscId idle = powered == OscId::p1 ? OscId::p2 : OscId::p1;
  const auto& c_cfg = eff[index(OscId::central)];
  const auto& p_cfg = eff[index(powered)];
  const auto& i_cfg = eff[index(idle)];

  const auto t_central = osc::time_to_snap(s.central, c_cfg, c_cfg.current);
  if (!t_central) return SyncFault{FaultKind::stalled, OscId::central, s.clock};
  const auto t_periph = osc::time_to_snap(s.get(powered), p_cfg, p_cfg.current);

  const bool periph_first = t_periph && *t_periph <= *t_central;
  const double dt = periph_first ? *t_periph : *t_central;
  const OscId fired = periph_first ? powered : OscId::central;

  EventStep out;
  out.state = s;
  out.state.central = osc::evolve(s.central, c_cfg, c_cfg.current, dt);
  out.state.get(powered) = osc::evolve(s.get(powered), p_cfg, p_cfg.current, dt);
  out.state.get(idle) = osc::evolve(s.get(idle), i_cfg, 0.0, dt);
  out.state.clock = s.clock + dt;
  out.state.get(fired) = osc::snap(out.state.get(fired), eff[index(fired)]);

  out.event.t = out.state.clock;
  out.event.id = fired;
  out.event.side_after = out.state.get(fired).beam.side;
  out.event.stage = stage_of(out.state, cfg.gating);
  return out;
}

std::vector<SyncFault> check_sync(const EventLog& log) {
  std::vector<SyncFault> faults;
  OscId powered = log.gating.powered(log.initial_central);
  int snaps = 0;
  for (const auto& e : log.events) {
    if (e.id == OscId::central) {
      if (snaps == 0) faults.push_back({FaultKind::missed_snap, powered, e.t});
      powered = log.gating.powered(e.side_after);
      snaps = 0;
    } else if (e.id == powered) {
      if (++snaps == 2) faults.push_back({FaultKind::double_snap, powered, e.t});
    }
  }
  return faults;
}

std::vector<Lead> lead_times(const EventLog& log) {
  std::vector<Lead> out;
  OscId powered = log.gating.powered(log.initial_central);
  double start = 0.0;
  bool seen = false;
  for (const auto& e : log.events) {
    if (e.id == OscId::central) {
      powered = log.gating.powered(e.side_after);
      start = e.t;
      seen = false;
    } else if (e.id == powered && !seen) {
      out.push_back({powered, start, e.t - start});
      seen = true;
    }
  }
  return out;
}

std::array<signal::SquareWave, 4> Result::quadrature_signals() const {
  return {p1_waves[0], p1_waves[1], p2_waves[0], p2_waves[1]};
}

Result simulate(const Config& cfg, int n_cycles) {
  cfg.validate();
  if (n_cycles < 1) throw Error(ErrorCode::invalid_argument, "n_quadrature_cycles must be >= 1");

  Result res;
  SystemState s = initial_state(cfg);
  res.log.initial_central = s.central.beam.side;
  res.log.gating = cfg.gating;
  res.stages.push_back({0.0, stage_of(s, cfg.gating)});

  std::array<signal::SquareWave, 3> primary;
  for (OscId id : {OscId::central, OscId::p1, OscId::p2}) {
    auto& w = primary[index(id)];
    w.label = cfg.get(id).label + ".A";
    w.initial_level = s.get(id).beam.side == Side::left ? signal::Level::high : signal::Level::low;
  }

  std::mt19937_64 rng(cfg.rng_seed);
  const double sigma = cfg.noise ? cfg.noise->sigma_tau : 0.0;
  std::lognormal_distribution<double> draw(0.0, sigma > 0.0 ? sigma : 1.0);
  TauJitter jitter = kNoJitter;
  auto redraw = [&] {
    if (sigma <= 0.0) return;
    for (auto& osc_m : jitter) {
      for (double& m : osc_m) m = draw(rng);
    }
  };
  redraw();

  const int target = 4 * n_cycles;
  // A runaway peripheral can fire many times per window; bound the log.
  const std::size_t max_events = static_cast<std::size_t>(target) * 64 + 64;
  std::optional<SyncFault> stall;
  while (res.central_snaps < target && res.log.events.size() < max_events) {
    auto next = advance_event(s, cfg, jitter);
    if (auto* fault = std::get_if<SyncFault>(&next)) {
      stall = *fault;
      break;
    }
    auto& step = std::get<EventStep>(next);
    s = step.state;
    res.log.events.push_back(step.event);
    res.stages.push_back({step.event.t, step.event.stage});
    primary[index(step.event.id)].toggle(step.event.t);
    if (step.event.id == OscId::central) {
      ++res.central_snaps;
      redraw();
    }
  }

  res.duration = s.clock;
  res.faults = check_sync(res.log);
  if (stall) res.faults.push_back(*stall);

  std::array<std::array<signal::SquareWave, 2>*, 3> pairs{&res.central_waves, &res.p1_waves,
                                                          &res.p2_waves};
  for (OscId id : {OscId::central, OscId::p1, OscId::p2}) {
    auto& w = primary[index(id)];
    w.start = 0.0;
    w.stop = res.duration;
    auto& pair = *pairs[index(id)];
    pair[0] = w;
    pair[1] = w.complement(cfg.get(id).label + ".A_bar");
    if (res.duration > 0.0) {
      res.beam_traces[index(id)] = osc::sample_beam(w, s.get(id).beam.amplitude, cfg.sample_period,
                                                    cfg.get(id).label);
    }
  }
  return res;
}

}  // namespace quadosc::quad
