#include "quadosc/crawler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quadosc/error.hpp"

namespace quadosc::crawler {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// sin of the leg's angle from the downward vertical.
double outboard(double leg_deg) { return std::sin((leg_deg - 90.0) * kDeg); }

// Distance from the "near" foot to the center of mass. Written so that the
// front and back arms are the same expression with arguments swapped.
double moment_arm(const Geometry& g, double s_near, double s_far) {
  const double l1 = g.l1;
  const double l2 = g.l2;
  const double first = l2 * (0.5 * l2 * s_near);
  const double top = l1 * (l2 * s_near + 0.5 * l1);
  const double last = l2 * (l2 * s_near + l1 + 0.5 * l2 * s_far);
  return (first + top + last) / (l1 + 2.0 * l2);
}

}  // namespace

void Geometry::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invalid_argument, "crawler geometry: " + what);
  };
  if (!(l1 > 0.0) || !(l2 > 0.0)) fail("l1 and l2 must be > 0");
  if (!(weight > 0.0)) fail("weight must be > 0");
  if (!(mu > 0.0)) fail("mu must be > 0");
  if (!(dtheta_deg >= 0.0)) fail("dtheta must be >= 0");
  if (!(alpha_deg > 90.0) || !(alpha_deg + dtheta_deg < 180.0)) {
    fail("need 90 < alpha and alpha + dtheta < 180");
  }
}

LegAngles angles(const Geometry& g, LegPose pose) {
  return {g.alpha_deg + (pose.front_rotated ? g.dtheta_deg : 0.0),
          g.alpha_deg + (pose.back_rotated ? g.dtheta_deg : 0.0)};
}

FootPositions foot_positions(const Geometry& g, const LegAngles& a) {
  FootPositions f;
  f.x_back = -g.l2 * outboard(a.back_deg);
  f.x_front = g.l1 + g.l2 * outboard(a.front_deg);
  f.c = f.x_front - f.x_back;
  return f;
}

FootPositions foot_positions(const Geometry& g, LegPose pose) {
  return foot_positions(g, angles(g, pose));
}

double center_of_mass(const Geometry& g, const LegAngles& a) {
  return moment_arm(g, outboard(a.back_deg), outboard(a.front_deg));
}

double center_of_mass(const Geometry& g, LegPose pose) { return center_of_mass(g, angles(g, pose)); }

StaticsResult normal_forces(const Geometry& g, const LegAngles& a) {
  const double sb = outboard(a.back_deg);
  const double sf = outboard(a.front_deg);
  const double arm_back = moment_arm(g, sb, sf);   // back foot -> CoM
  const double arm_front = moment_arm(g, sf, sb);  // front foot -> CoM
  const double span = arm_back + arm_front;

  StaticsResult r;
  r.c = foot_positions(g, a).c;
  r.x_cm = arm_back;
  r.n_front = g.weight * (arm_back / span);
  r.n_back = g.weight * (arm_front / span);
  return r;
}

StaticsResult normal_forces(const Geometry& g, LegPose pose) {
  return normal_forces(g, angles(g, pose));
}

Transition step_transition(const Geometry& g, const LegAngles& from, const LegAngles& to) {
  const bool front_moves = from.front_deg != to.front_deg;
  const bool back_moves = from.back_deg != to.back_deg;
  if (front_moves && back_moves) {
    throw Error(ErrorCode::invalid_argument, "transition must move exactly one leg");
  }

  Transition tr;
  tr.from = from;
  tr.to = to;
  const double dc = foot_positions(g, to).c - foot_positions(g, from).c;
  const auto a = normal_forces(g, from);
  const auto b = normal_forces(g, to);
  const double front_load = 0.5 * (a.n_front + b.n_front);
  const double back_load = 0.5 * (a.n_back + b.n_back);

  if (front_load < back_load) {
    tr.sliding = Foot::front;
    tr.front_disp = dc;
  } else if (back_load < front_load) {
    tr.sliding = Foot::back;
    tr.back_disp = -dc;
  } else {
    tr.sliding = Foot::both;
    tr.front_disp = 0.5 * dc;
    tr.back_disp = -0.5 * dc;
    tr.tie = dc != 0.0;
  }
  return tr;
}

Transition step_transition(const Geometry& g, LegPose from, LegPose to) {
  const int changed = (from.front_rotated != to.front_rotated) + (from.back_rotated != to.back_rotated);
  if (changed != 1) {
    throw Error(ErrorCode::invalid_argument, "transition must change exactly one leg");
  }
  return step_transition(g, angles(g, from), angles(g, to));
}

std::vector<LegPose> default_sequence() {
  return {{false, false}, {true, false}, {true, true}, {false, true}, {false, false}};
}

GaitReport run_cycle(const Geometry& g, std::span<const LegPose> sequence) {
  g.validate();
  if (sequence.size() < 2 || sequence.front() != sequence.back()) {
    throw Error(ErrorCode::invalid_argument, "gait sequence must start and end on the same pose");
  }
  GaitReport rep;
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    rep.transitions.push_back(step_transition(g, sequence[i - 1], sequence[i]));
    rep.d_cycle += rep.transitions.back().displacement();
    rep.ambiguous = rep.ambiguous || rep.transitions.back().tie;
  }
  return rep;
}

double displacement_closed_form(const Geometry& g) {
  if (!(g.alpha_deg >= 90.0) || !(g.dtheta_deg >= 0.0) || !(g.alpha_deg + g.dtheta_deg <= 180.0)) {
    throw Error(ErrorCode::invalid_argument, "closed form needs 90 <= alpha <= alpha + dtheta <= 180");
  }
  return 2.0 * g.l2 *
         (std::sin((g.alpha_deg + g.dtheta_deg - 90.0) * kDeg) - std::sin((g.alpha_deg - 90.0) * kDeg));
}

double backsliding_ratio(double d_pred, double d_meas) {
  if (!(d_pred > 0.0)) {
    throw Error(ErrorCode::non_positive_prediction, "backsliding ratio needs a positive prediction");
  }
  return (d_pred - d_meas) / d_pred;
}

double effective_rotation(const Geometry& g, double t_on, double tau_act) {
  if (!(t_on >= 0.0) || !(tau_act > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "effective rotation needs t_on >= 0 and tau_act > 0");
  }
  return g.dtheta_deg * (1.0 - std::exp(-t_on / tau_act));
}

double DriveResult::mean_d() const {
  if (cycles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : cycles) sum += c.d_cycle;
  return sum / static_cast<double>(cycles.size());
}

double DriveResult::sigma_d() const {
  if (cycles.empty()) return 0.0;
  const double m = mean_d();
  double ss = 0.0;
  for (const auto& c : cycles) ss += (c.d_cycle - m) * (c.d_cycle - m);
  return std::sqrt(ss / static_cast<double>(cycles.size()));
}

double DriveResult::mean_speed() const {
  if (cycles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : cycles) sum += c.speed.value_or(0.0);
  return sum / static_cast<double>(cycles.size());
}

namespace {

enum class Leg { front, back };

struct LegEvent {
  double t = 0.0;
  Leg leg = Leg::front;
  bool actuated = false;
  double rotation = 0.0;  // deg, only meaningful when actuated
};

// Actuation changes of one leg, each carrying the rotation its on-time earns.
std::vector<LegEvent> leg_events(const Geometry& g, const signal::SquareWave& w, Leg leg,
                                 signal::Level on_level, double tau_act, double& initial_rotation) {
  std::vector<LegEvent> out;
  auto on_until = [&](std::size_t next_edge) {
    return next_edge < w.edges.size() ? w.edges[next_edge].t : w.stop;
  };
  initial_rotation = 0.0;
  if (w.initial_level == on_level) {
    initial_rotation = effective_rotation(g, std::max(0.0, on_until(0) - w.start), tau_act);
  }
  signal::Level level = w.initial_level;
  for (std::size_t i = 0; i < w.edges.size(); ++i) {
    level = !level;
    LegEvent e{w.edges[i].t, leg, level == on_level, 0.0};
    if (e.actuated) e.rotation = effective_rotation(g, std::max(0.0, on_until(i + 1) - e.t), tau_act);
    out.push_back(e);
  }
  return out;
}

}  // namespace

DriveResult drive_with_signals(const Geometry& g, const signal::SquareWave& front,
                               const signal::SquareWave& back, OnMapping mapping,
                               double tau_act) {
  g.validate();
  DriveResult res;
  res.quadrature = signal::validate_quadrature(front, back);
  for (const auto& v : res.quadrature.violations) res.warnings.push_back("quadrature: " + v);

  const signal::Level on_level =
      mapping == OnMapping::rotated ? signal::Level::high : signal::Level::low;
  double front_rot0 = 0.0;
  double back_rot0 = 0.0;
  auto events = leg_events(g, front, Leg::front, on_level, tau_act, front_rot0);
  const auto back_events = leg_events(g, back, Leg::back, on_level, tau_act, back_rot0);
  events.insert(events.end(), back_events.begin(), back_events.end());
  std::stable_sort(events.begin(), events.end(),
                   [](const LegEvent& a, const LegEvent& b) { return a.t < b.t; });

  LegAngles pose_angles{g.alpha_deg + front_rot0, g.alpha_deg + back_rot0};
  LegPose actuated{front.initial_level == on_level, back.initial_level == on_level};
  const auto feet = foot_positions(g, pose_angles);
  double x_back = 0.0;
  double x_front = feet.c;
  const double t0 = std::min(front.start, back.start);
  res.trajectory.push_back({t0, x_front, x_back, actuated});

  std::optional<GaitReport> open;
  double open_mid = 0.0;
  for (const auto& e : events) {
    if (e.leg == Leg::front && e.actuated) {
      const double mid = 0.5 * (x_front + x_back);
      if (open) {
        open->d_cycle = mid - open_mid;
        open->cycle_period = e.t - *open->start_time;
        open->speed = open->d_cycle / *open->cycle_period;
        res.cycles.push_back(*open);
      }
      open = GaitReport{};
      open->start_time = e.t;
      open_mid = mid;
    }

    LegAngles next = pose_angles;
    const double angle = g.alpha_deg + (e.actuated ? e.rotation : 0.0);
    if (e.leg == Leg::front) {
      next.front_deg = angle;
      actuated.front_rotated = e.actuated;
    } else {
      next.back_deg = angle;
      actuated.back_rotated = e.actuated;
    }
    const Transition tr = step_transition(g, pose_angles, next);
    x_front += tr.front_disp;
    x_back += tr.back_disp;
    pose_angles = next;
    res.trajectory.push_back({e.t, x_front, x_back, actuated});
    if (open) {
      open->transitions.push_back(tr);
      open->ambiguous = open->ambiguous || tr.tie;
    }
  }
  if (res.cycles.empty()) res.warnings.push_back("no complete gait cycle in the signals");
  return res;
}

}  // namespace quadosc::crawler
