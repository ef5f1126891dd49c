#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadosc/signal.hpp"

namespace quadosc::crawler {

/// Trapezoidal two-legged body. Leg angles are measured between the top edge
/// and the leg; feet sit outboard for angles above 90 degrees.
struct Geometry {
  double l1 = 60.0;          // mm, top edge
  double l2 = 28.0;          // mm, leg
  double alpha_deg = 100.0;  // rest leg angle
  double dtheta_deg = 30.0;  // rotation when actuated
  double weight = 1.0;
  double mu = 0.5;  // uniform floor friction; does not enter the displacement

  /// 90 < alpha, alpha + dtheta < 180, dtheta >= 0, positive sizes.
  void validate() const;
  bool operator==(const Geometry&) const = default;
};

struct LegPose {
  bool front_rotated = false;
  bool back_rotated = false;

  bool operator==(const LegPose&) const = default;
};

/// Absolute leg angles in degrees.
struct LegAngles {
  double front_deg = 100.0;
  double back_deg = 100.0;

  bool operator==(const LegAngles&) const = default;
};

LegAngles angles(const Geometry& g, LegPose pose);

struct FootPositions {
  double x_back = 0.0;   // mm
  double x_front = 0.0;  // mm
  double c = 0.0;        // mm, foot separation
};

/// Back leg attached at x = 0, front at x = l1, forward is +x.
FootPositions foot_positions(const Geometry& g, const LegAngles& a);
FootPositions foot_positions(const Geometry& g, LegPose pose);

/// Horizontal distance from the back foot to the center of mass, with mass
/// spread uniformly along the top edge and both legs.
double center_of_mass(const Geometry& g, const LegAngles& a);
double center_of_mass(const Geometry& g, LegPose pose);

struct StaticsResult {
  double c = 0.0;
  double x_cm = 0.0;
  double n_front = 0.0;
  double n_back = 0.0;
};

/// Moment balance about each foot. Mirror-image poses give bit-identical
/// swapped forces, and a symmetric pose splits the weight exactly in half.
StaticsResult normal_forces(const Geometry& g, const LegAngles& a);
StaticsResult normal_forces(const Geometry& g, LegPose pose);

enum class Foot { front, back, both };

struct Transition {
  LegAngles from;
  LegAngles to;
  Foot sliding = Foot::front;
  double front_disp = 0.0;  // mm
  double back_disp = 0.0;   // mm
  bool tie = false;         // forces tied; the change in span was split

  /// Displacement of the midpoint between the feet.
  double displacement() const { return 0.5 * (front_disp + back_disp); }
};

/// Quasi-static resolution of one leg moving. The foot with the lower normal
/// force averaged over both endpoint poses slides and absorbs the whole
/// change in foot separation; the other stays anchored.
Transition step_transition(const Geometry& g, const LegAngles& from, const LegAngles& to);
Transition step_transition(const Geometry& g, LegPose from, LegPose to);

struct GaitReport {
  std::vector<Transition> transitions;
  double d_cycle = 0.0;  // mm
  std::optional<double> start_time;    // s
  std::optional<double> cycle_period;  // s
  std::optional<double> speed;         // mm/s
  bool ambiguous = false;              // some transition hit a force tie
};

/// (0,0) -> (1,0) -> (1,1) -> (0,1) -> (0,0), first bit front.
std::vector<LegPose> default_sequence();

/// Sequence must close on itself and change exactly one leg per step.
GaitReport run_cycle(const Geometry& g, std::span<const LegPose> sequence);

/// d = 2 l2 [sin(alpha + dtheta - 90) - sin(alpha - 90)], valid on the
/// closed domain 90 <= alpha <= alpha + dtheta <= 180.
double displacement_closed_form(const Geometry& g);

/// (predicted - measured) / predicted.
double backsliding_ratio(double d_pred, double d_meas);

/// Rotation reached by a first-order actuator held on for t_on.
double effective_rotation(const Geometry& g, double t_on, double tau_act);

enum class OnMapping { rotated, unrotated };

struct TrajectoryPoint {
  double t = 0.0;
  double x_front = 0.0;
  double x_back = 0.0;
  LegPose pose;  // which legs are actuated
};

struct DriveResult {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<GaitReport> cycles;  // complete cycles only
  signal::QuadratureCheck quadrature;
  std::vector<std::string> warnings;

  double mean_d() const;
  double mean_speed() const;
  double sigma_d() const;
};

/// Step the robot through the pose changes encoded by two leg signals. Each
/// actuation rotates its leg by effective_rotation() of that actuation's
/// on-time. A cycle starts whenever the front leg is actuated. Signals that
/// are not in quadrature produce warnings, not errors.
DriveResult drive_with_signals(const Geometry& g, const signal::SquareWave& front,
                               const signal::SquareWave& back, OnMapping mapping,
                               double tau_act);

}  // namespace quadosc::crawler
