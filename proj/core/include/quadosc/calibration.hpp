#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadosc/crawler.hpp"
#include "quadosc/sma_thermal.hpp"

namespace quadosc::calib {

struct PeriodObservation {
  double current = 0.0;  // A
  double period = 0.0;   // s

  bool operator==(const PeriodObservation&) const = default;
};

/// Steady-state full period of a symmetric oscillator: the half-cycle map is
/// iterated from a cold start to its fixed point. nullopt when the oscillator
/// stalls or has no sustained oscillation.
std::optional<double> predict_period(const sma::ThermalParams& p, double current);

struct CalibrationResult {
  sma::ThermalParams params;
  std::vector<double> residuals;  // predicted / observed - 1, per observation
  bool converged = false;
  int iterations = 0;
  std::string method;
};

/// Fit tau and k to observed periods. t_amb, t_act, t_rel and kind are taken
/// from `fixed`; tau_cool is cleared so heating and cooling share tau.
///
/// Two observations are solved exactly with damped Newton on (ln tau, ln k),
/// falling back to bisection on k with tau eliminated by scaling. More
/// observations minimise the summed squared relative residual with a
/// coordinate pattern search. Throws Error(infeasible_observations) when an
/// observation could not oscillate for any k up to 1e7 degC/A^2.
CalibrationResult calibrate_thermal(std::span<const PeriodObservation> observations,
                                    const sma::ThermalParams& fixed);

enum class Sense { minimize, maximize };

struct ScalarOptimum {
  double arg = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search. The objective must be unimodal on [lo, hi]; the
/// returned argument is then within tol of the optimum.
ScalarOptimum optimize_scalar(const std::function<double(double)>& objective, double lo,
                              double hi, double tol, Sense sense = Sense::minimize);

struct Axis {
  std::string name;
  std::vector<double> values;

  bool operator==(const Axis&) const = default;
};

/// Axis names accepted by sweep().
std::span<const std::string_view> sweep_axis_names();

enum class Objective { period, d_cycle, speed };
const char* to_string(Objective o);
Objective objective_from_string(std::string_view s);

/// Baseline every grid point starts from before its axis values are applied.
struct SweepBase {
  sma::ThermalParams sma;
  crawler::Geometry geometry;
  double current = 0.24;          // A, central
  double surplus = 0.05;          // peripheral current excess over central
  double tau_act = 2.0;           // s
  int cycles = 6;                 // quadrature cycles for the speed objective
  crawler::OnMapping mapping = crawler::OnMapping::rotated;
};

struct SweepRow {
  std::vector<double> point;
  std::optional<double> value;
  std::string error;
};

struct SweepTable {
  std::vector<std::string> axes;
  std::string objective;
  std::vector<SweepRow> rows;
};

/// Evaluate `objective` on the full grid. Rows are ordered lexicographically
/// with the first axis varying slowest, regardless of `threads`.
SweepTable sweep(std::span<const Axis> axes, Objective objective, const SweepBase& base,
                 unsigned threads = 1);

}  // namespace quadosc::calib
