#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quadosc/oscillator.hpp"
#include "quadosc/signal.hpp"

namespace quadosc::quad {

enum class OscId : std::uint8_t { central, p1, p2 };
const char* to_string(OscId id);

/// Which peripheral each half of the central oscillator's split contact
/// powers. Must be a bijection onto {p1, p2}.
struct Gating {
  OscId on_left = OscId::p1;
  OscId on_right = OscId::p2;

  OscId powered(osc::Side central_side) const {
    return central_side == osc::Side::left ? on_left : on_right;
  }
  void validate() const;
  bool operator==(const Gating&) const = default;
};

/// Multiplicative lognormal jitter on every actuator's tau, redrawn at the
/// start of each central half cycle.
struct NoiseSpec {
  double sigma_tau = 0.0;  // relative
  bool operator==(const NoiseSpec&) const = default;
};

struct Config {
  osc::Config central;
  osc::Config p1;
  osc::Config p2;
  Gating gating;
  std::optional<NoiseSpec> noise;
  std::uint64_t rng_seed = 0;
  double sample_period = 0.01;  // s, beam trace sampling

  void validate() const;
  const osc::Config& get(OscId id) const;
  osc::Config& get(OscId id);
};

struct SystemState {
  osc::State central;
  osc::State p1;
  osc::State p2;
  double clock = 0.0;

  const osc::State& get(OscId id) const;
  osc::State& get(OscId id);
};

SystemState initial_state(const Config& cfg);

/// The one peripheral whose circuit the central contact currently closes.
OscId gates_closed(const SystemState& s, const Config& cfg);

/// Stage 1..8 of the quadrature cycle from the three beam sides. Stage 1 is
/// every beam on the left with the left-gated peripheral just powered.
int stage_of(const SystemState& s, const Gating& g);

struct Event {
  double t = 0.0;
  OscId id = OscId::central;
  osc::Side side_after = osc::Side::left;
  int stage = 1;  // stage entered by this event
};

struct EventLog {
  osc::Side initial_central = osc::Side::left;
  Gating gating;
  std::vector<Event> events;
};

enum class FaultKind : std::uint8_t { double_snap, missed_snap, stalled };
const char* to_string(FaultKind k);

struct SyncFault {
  FaultKind kind = FaultKind::missed_snap;
  OscId oscillator = OscId::p1;
  double at = 0.0;

  bool operator==(const SyncFault&) const = default;
};

struct EventStep {
  Event event;
  SystemState state;
};

/// Per-actuator tau multipliers, indexed [oscillator][side].
using TauJitter = std::array<std::array<double, 2>, 3>;
inline constexpr TauJitter kNoJitter{{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};

/// Advance all six actuators exactly to the next snap-through. Peripheral
/// snaps win ties with the central oscillator.
std::variant<EventStep, SyncFault> advance_event(const SystemState& s, const Config& cfg,
                                                 const TauJitter& jitter = kNoJitter);

/// Each window between consecutive central snaps must contain exactly one
/// snap of the peripheral it powers: a second one is DoubleSnap (reported at
/// its time), none is MissedSnap (reported at the closing central snap).
/// The trailing open window is only checked for double snaps.
std::vector<SyncFault> check_sync(const EventLog& log);

/// Time from each window's opening central snap (or t = 0) to the powered
/// peripheral's first snap in that window.
struct Lead {
  OscId peripheral = OscId::p1;
  double window_start = 0.0;
  double lead = 0.0;
};
std::vector<Lead> lead_times(const EventLog& log);

struct StageVisit {
  double t = 0.0;
  int stage = 1;
};

struct Result {
  EventLog log;
  std::vector<StageVisit> stages;  // includes the initial stage at t = 0
  std::vector<SyncFault> faults;
  // Complementary pairs per oscillator: index 0 high while the beam is left.
  std::array<signal::SquareWave, 2> central_waves;
  std::array<signal::SquareWave, 2> p1_waves;
  std::array<signal::SquareWave, 2> p2_waves;
  std::array<signal::SignalTrace, 3> beam_traces;  // central, p1, p2
  int central_snaps = 0;
  double duration = 0.0;

  bool fault_free() const { return faults.empty(); }
  /// P1 pair followed by P2 pair.
  std::array<signal::SquareWave, 4> quadrature_signals() const;
};

/// Run until the central oscillator has snapped 4 * n_cycles times (one
/// quadrature cycle is two central periods). Faults are collected, never
/// thrown; a central stall ends the run early.
Result simulate(const Config& cfg, int n_cycles);

}  // namespace quadosc::quad
