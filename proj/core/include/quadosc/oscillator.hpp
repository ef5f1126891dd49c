#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadosc/signal.hpp"
#include "quadosc/sma_thermal.hpp"

namespace quadosc::osc {

enum class Side : std::uint8_t { left, right };

inline Side opposite(Side s) { return s == Side::left ? Side::right : Side::left; }
const char* to_string(Side s);

/// Bi-stable beam reduced to which equilibrium it sits in. Rendered center
/// displacement is +amplitude on the right, -amplitude on the left.
struct BeamState {
  Side side = Side::left;
  double amplitude = 1.0;  // mm

  double displacement() const { return side == Side::right ? amplitude : -amplitude; }
  bool operator==(const BeamState&) const = default;
};

struct Config {
  sma::ThermalParams left_sma;
  sma::ThermalParams right_sma;
  double current = 0.3;  // A
  std::string label = "osc";

  void validate() const;
};

struct State {
  BeamState beam;
  sma::State left;
  sma::State right;
  double clock = 0.0;  // s

  const sma::State& sma(Side s) const { return s == Side::left ? left : right; }
  sma::State& sma(Side s) { return s == Side::left ? left : right; }
  bool operator==(const State&) const = default;
};

/// Beam on the left, both actuators at ambient.
State initial_state(const Config& cfg);

/// Contact grounding the circuit; it always sits on the beam's side.
inline Side active_contact(const State& s) { return s.beam.side; }

/// Evolve temperatures for dt without snapping: the active-side actuator is
/// driven at `current`, the other one cools.
State evolve(const State& s, const Config& cfg, double current, double dt);

/// Time until the beam can snap: the active actuator must reach t_act at
/// `current` and the antagonist must have cooled to t_rel. nullopt if the
/// active side never reaches t_act.
std::optional<double> time_to_snap(const State& s, const Config& cfg, double current);

/// Flip the beam. The actuator that fired is pinned to its activation
/// temperature and marked contracted; the antagonist is marked released.
State snap(const State& s, const Config& cfg);

struct SnapResult {
  double snap_time = 0.0;  // s, measured from s.clock
  State state;
};

/// Heat to the next snap-through at cfg.current. nullopt means stalled.
std::optional<SnapResult> advance_to_next_snap(const State& s, const Config& cfg);

struct Run {
  std::vector<double> snap_times;  // absolute, s
  std::vector<Side> sides;         // beam side after each snap
  signal::SignalTrace beam_trace;
  signal::SquareWave a;      // high while the beam is on the left
  signal::SquareWave a_bar;  // complement of a

  std::vector<double> half_periods() const;
  /// Last full cycle (two half periods).
  double steady_state_period() const;
};

/// Simulate n_snaps snap-throughs from a fresh start. Throws Error(stalled)
/// when the drive current cannot reach t_act.
Run simulate(const Config& cfg, int n_snaps, double sample_period = 0.01);

/// Sample the displacement profile of a beam whose wave is high while the
/// beam sits left, over [wave.start, wave.stop].
signal::SignalTrace sample_beam(const signal::SquareWave& left_high, double amplitude,
                                double sample_period, std::string label);

}  // namespace quadosc::osc
