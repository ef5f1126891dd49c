#pragma once

#include <optional>

namespace quadosc::sma {

enum class Kind { fiber, spring };

/// Lumped single-node thermal model of one SMA actuator.
///
/// The wire relaxes exponentially toward t_amb + k * I^2 with time constant
/// tau while driven, and toward t_amb with tau_cool (defaults to tau) when the
/// current is zero. Electrical resistance is folded into k.
struct ThermalParams {
  double tau = 2.0;                   // s
  std::optional<double> tau_cool;     // s, unpowered relaxation constant
  double k = 1000.0;                  // degC / A^2
  double t_amb = 25.0;                // degC
  double t_act = 70.0;                // degC, contraction threshold
  double t_rel = 65.0;                // degC, release threshold
  Kind kind = Kind::fiber;

  /// Throws Error(invalid_argument) when tau, k or the temperature ordering
  /// t_amb < t_rel <= t_act is violated.
  void validate() const;

  /// Relaxation constant in effect for a given drive current.
  double time_constant(double current) const {
    return current > 0.0 ? tau : tau_cool.value_or(tau);
  }

  bool operator==(const ThermalParams&) const = default;
};

struct State {
  double temperature = 25.0;  // degC
  bool contracted = false;

  bool operator==(const State&) const = default;
};

/// Fresh actuator sitting at ambient.
inline State ambient_state(const ThermalParams& p) { return {p.t_amb, false}; }

double steady_state_temp(const ThermalParams& p, double current);

/// Exact exponential update over dt. The contracted flag is set when the new
/// temperature reaches t_act and cleared below t_rel.
State step(const State& s, const ThermalParams& p, double current, double dt);

/// Time for the temperature to reach `threshold` at constant current.
/// Zero if already there, nullopt if the asymptote never gets there.
std::optional<double> time_to_threshold(const State& s, const ThermalParams& p,
                                        double current, double threshold);

/// Time for an unpowered actuator to cool to `threshold`. Zero if already at
/// or below it, nullopt if the threshold is at or below ambient.
std::optional<double> time_to_cool(const State& s, const ThermalParams& p, double threshold);

}  // namespace quadosc::sma
