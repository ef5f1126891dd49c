#include "quadosc/sma_thermal.hpp"

#include <cmath>
#include <string>

#include "quadosc/error.hpp"

namespace quadosc::sma {

void ThermalParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invalid_argument, "SMA thermal params: " + what);
  };
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be > 0");
  if (tau_cool && !(*tau_cool > 0.0)) fail("tau_cool must be > 0");
  if (!(k > 0.0) || !std::isfinite(k)) fail("k must be > 0");
  if (!(t_amb < t_rel)) fail("t_amb must be below t_rel");
  if (!(t_rel <= t_act)) fail("t_rel must not exceed t_act");
}

double steady_state_temp(const ThermalParams& p, double current) {
  if (current < 0.0) {
    throw Error(ErrorCode::invalid_argument, "current must be >= 0");
  }
  return p.t_amb + p.k * current * current;
}

State step(const State& s, const ThermalParams& p, double current, double dt) {
  if (dt < 0.0) throw Error(ErrorCode::invalid_argument, "dt must be >= 0");
  if (dt == 0.0) return s;

  const double t_ss = steady_state_temp(p, current);
  State out = s;
  out.temperature = t_ss + (s.temperature - t_ss) * std::exp(-dt / p.time_constant(current));
  if (out.temperature >= p.t_act) {
    out.contracted = true;
  } else if (out.temperature < p.t_rel) {
    out.contracted = false;
  }
  return out;
}

std::optional<double> time_to_threshold(const State& s, const ThermalParams& p,
                                        double current, double threshold) {
  if (s.temperature >= threshold) return 0.0;
  const double t_ss = steady_state_temp(p, current);
  if (t_ss <= threshold) return std::nullopt;
  return p.time_constant(current) *
         std::log((t_ss - s.temperature) / (t_ss - threshold));
}

std::optional<double> time_to_cool(const State& s, const ThermalParams& p, double threshold) {
  if (s.temperature <= threshold) return 0.0;
  if (threshold <= p.t_amb) return std::nullopt;
  return p.time_constant(0.0) * std::log((s.temperature - p.t_amb) / (threshold - p.t_amb));
}

}  // namespace quadosc::sma
