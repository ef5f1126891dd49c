#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quadosc/crawler.hpp"
#include "quadosc/error.hpp"

using namespace quadosc;
using namespace quadosc::crawler;

namespace {

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

Geometry paper_like() { return Geometry{60.0, 28.0, 100.0, 30.0, 1.0, 0.5}; }

signal::SquareWave periodic(double period, double offset, int cycles, double stop) {
  signal::SquareWave w;
  w.start = 0.0;
  w.stop = stop;
  for (int k = 0; k < cycles; ++k) {
    w.toggle(offset + k * period);
    w.toggle(offset + (k + 0.5) * period);
  }
  return w;
}

}  // namespace

TEST(Geometry, Validation) {
  EXPECT_NO_THROW(paper_like().validate());
  auto g = paper_like();
  g.alpha_deg = 170.0;
  EXPECT_THROW(g.validate(), Error);
  g = paper_like();
  g.l2 = -1.0;
  EXPECT_THROW(g.validate(), Error);
}

TEST(FootPositions, SymmetricSpan) {
  const auto f = foot_positions(paper_like(), LegPose{});
  EXPECT_NEAR(f.c, 60.0 + 2.0 * 28.0 * std::sin(rad(10.0)), 1e-12);
  EXPECT_NEAR(f.c, 69.72, 5e-3);
}

TEST(CenterOfMass, SymmetricIsMidspan) {
  const auto g = paper_like();
  const auto f = foot_positions(g, LegPose{});
  EXPECT_DOUBLE_EQ(center_of_mass(g, LegPose{}), f.c / 2.0);
  EXPECT_DOUBLE_EQ(center_of_mass(g, LegPose{true, true}), foot_positions(g, LegPose{true, true}).c / 2.0);
}

TEST(CenterOfMass, FrontRotatedOracle) {
  // independent midpoint-mass sum measured from the back foot
  const double back_off = 28.0 * std::sin(rad(10.0));
  const double front_top = 60.0;
  const double front_mid = front_top + 14.0 * std::sin(rad(40.0));
  const double back_mid = -14.0 * std::sin(rad(10.0));
  const double x = (60.0 * 30.0 + 28.0 * back_mid + 28.0 * front_mid) / 116.0 + back_off;
  EXPECT_NEAR(center_of_mass(paper_like(), LegPose{true, false}), x, 1e-9);
  EXPECT_NEAR(x, 36.45, 5e-3);
}

TEST(NormalForces, SymmetricHalves) {
  for (LegPose p : {LegPose{false, false}, LegPose{true, true}}) {
    const auto s = normal_forces(paper_like(), p);
    EXPECT_EQ(s.n_front, 0.5);
    EXPECT_EQ(s.n_back, 0.5);
  }
}

TEST(NormalForces, FrontRotatedShiftsRearward) {
  const auto s = normal_forces(paper_like(), LegPose{true, false});
  EXPECT_NEAR(s.n_front, 0.440, 1e-3);
  EXPECT_NEAR(s.n_back, 0.560, 1e-3);
  EXPECT_LT(s.n_front, s.n_back);
}

TEST(NormalForces, ConservationAndMirror) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Geometry g;
    g.l1 = 20.0 + 80.0 * u(rng);
    g.l2 = 10.0 + 40.0 * u(rng);
    g.weight = 0.1 + 5.0 * u(rng);
    const LegAngles a{90.0 + 89.0 * u(rng), 90.0 + 89.0 * u(rng)};
    const auto s = normal_forces(g, a);
    EXPECT_NEAR(s.n_front + s.n_back, g.weight, 1e-12 * g.weight);
    const auto m = normal_forces(g, LegAngles{a.back_deg, a.front_deg});
    EXPECT_EQ(m.n_front, s.n_back);
    EXPECT_EQ(m.n_back, s.n_front);
  }
}

TEST(StepTransition, FrontExtensionSlidesFront) {
  const auto g = paper_like();
  const auto t = step_transition(g, LegPose{false, false}, LegPose{true, false});
  EXPECT_EQ(t.sliding, Foot::front);
  EXPECT_NEAR(t.front_disp, 28.0 * (std::sin(rad(40.0)) - std::sin(rad(10.0))), 1e-12);
  EXPECT_EQ(t.back_disp, 0.0);
}

TEST(StepTransition, BackExtensionAlsoSlidesFront) {
  const auto g = paper_like();
  const auto t = step_transition(g, LegPose{true, false}, LegPose{true, true});
  EXPECT_EQ(t.sliding, Foot::front);
  EXPECT_NEAR(t.front_disp, 28.0 * (std::sin(rad(40.0)) - std::sin(rad(10.0))), 1e-12);
  EXPECT_EQ(t.back_disp, 0.0);
}

TEST(StepTransition, ZeroRotationNoMotion) {
  auto g = paper_like();
  g.dtheta_deg = 0.0;
  const auto t = step_transition(g, LegPose{false, false}, LegPose{true, false});
  EXPECT_EQ(t.displacement(), 0.0);
}

TEST(StepTransition, RejectsTwoLegChange) {
  EXPECT_THROW(step_transition(paper_like(), LegPose{false, false}, LegPose{true, true}), Error);
}

TEST(RunCycle, PaperLikeGeometry) {
  const auto seq = default_sequence();
  const auto r = run_cycle(paper_like(), seq);
  EXPECT_NEAR(r.d_cycle, 2.0 * 28.0 * (std::sin(rad(40.0)) - std::sin(rad(10.0))), 1e-12);
  EXPECT_NEAR(r.d_cycle, 26.27, 5e-3);
  EXPECT_FALSE(r.ambiguous);
  ASSERT_EQ(r.transitions.size(), 4u);
  for (const auto& t : r.transitions) EXPECT_GE(t.displacement(), 0.0);
}

TEST(RunCycle, ZeroRotation) {
  auto g = paper_like();
  g.dtheta_deg = 0.0;
  const auto seq = default_sequence();
  EXPECT_EQ(run_cycle(g, seq).d_cycle, 0.0);
}

TEST(RunCycle, ReversalNegates) {
  auto seq = default_sequence();
  const double fwd = run_cycle(paper_like(), seq).d_cycle;
  std::reverse(seq.begin(), seq.end());
  EXPECT_NEAR(run_cycle(paper_like(), seq).d_cycle, -fwd, 1e-12);
}

TEST(RunCycle, RequiresClosedSequence) {
  const std::vector<LegPose> open = {{false, false}, {true, false}, {true, true}};
  EXPECT_THROW(run_cycle(paper_like(), open), Error);
}

TEST(RunCycle, FrictionIndependent) {
  const auto seq = default_sequence();
  auto g = paper_like();
  g.mu = 0.2;
  const auto a = run_cycle(g, seq);
  for (double mu : {0.5, 1.0}) {
    g.mu = mu;
    const auto b = run_cycle(g, seq);
    EXPECT_EQ(a.d_cycle, b.d_cycle);
    for (std::size_t i = 0; i < a.transitions.size(); ++i) {
      EXPECT_EQ(a.transitions[i].front_disp, b.transitions[i].front_disp);
      EXPECT_EQ(a.transitions[i].back_disp, b.transitions[i].back_disp);
    }
  }
}

TEST(ClosedForm, Cases) {
  auto g = paper_like();
  EXPECT_NEAR(displacement_closed_form(g), 26.27, 5e-3);
  g.dtheta_deg = 0.0;
  EXPECT_EQ(displacement_closed_form(g), 0.0);
  g.alpha_deg = 90.0;
  g.dtheta_deg = 90.0;
  g.l2 = 30.0;
  EXPECT_NEAR(displacement_closed_form(g), 60.0, 1e-12);
}

TEST(Backsliding, Cases) {
  EXPECT_NEAR(backsliding_ratio(26.6, 20.8), 0.218, 1e-3);
  EXPECT_EQ(backsliding_ratio(10.0, 10.0), 0.0);
  EXPECT_EQ(backsliding_ratio(10.0, 0.0), 1.0);
  try {
    backsliding_ratio(0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_positive_prediction);
  }
}

TEST(EffectiveRotation, Limits) {
  const auto g = paper_like();
  EXPECT_EQ(effective_rotation(g, 0.0, 1.0), 0.0);
  EXPECT_NEAR(effective_rotation(g, 1e4, 1.0), 30.0, 1e-12);
  EXPECT_NEAR(effective_rotation(g, 1.5, 1.5), 30.0 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_THROW(effective_rotation(g, 2.0, 0.0), Error);
}

TEST(Drive, LongOnTimeRecoversClosedForm) {
  const auto g = paper_like();
  const double T = 8.0;
  const auto front = periodic(T, 1.0, 6, 6 * T + 3.0);
  const auto back = periodic(T, 1.0 + T / 4.0, 6, 6 * T + 3.0);
  const auto r = drive_with_signals(g, front, back, OnMapping::rotated, 1e-3);
  ASSERT_GE(r.cycles.size(), 4u);
  EXPECT_TRUE(r.quadrature.ok());
  for (const auto& c : r.cycles) EXPECT_NEAR(c.d_cycle, displacement_closed_form(g), 1e-9);
  EXPECT_NEAR(r.mean_speed(), displacement_closed_form(g) / T, 1e-9);
}

TEST(Drive, ShortOnTimeLosesDistance) {
  const auto g = paper_like();
  const double closed = displacement_closed_form(g);
  double prev = closed;
  for (double T : {8.0, 4.0, 2.0}) {
    const auto front = periodic(T, 1.0, 6, 6 * T + 3.0);
    const auto back = periodic(T, 1.0 + T / 4.0, 6, 6 * T + 3.0);
    const auto r = drive_with_signals(g, front, back, OnMapping::rotated, 2.0);
    ASSERT_FALSE(r.cycles.empty());
    EXPECT_LT(r.mean_d(), prev);
    EXPECT_GT(r.mean_d(), 0.0);
    prev = r.mean_d();
  }
}

TEST(Drive, NonQuadratureWarns) {
  const auto g = paper_like();
  const auto w = periodic(4.0, 1.0, 5, 22.0);
  const auto r = drive_with_signals(g, w, w, OnMapping::rotated, 0.1);
  EXPECT_FALSE(r.quadrature.ok());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Drive, UnrotatedMappingStillWalksForward) {
  const auto g = paper_like();
  const double T = 8.0;
  const auto front = periodic(T, 1.0, 6, 6 * T + 3.0);
  const auto back = periodic(T, 1.0 + T / 4.0, 6, 6 * T + 3.0);
  const auto r = drive_with_signals(g, front, back, OnMapping::unrotated, 1e-3);
  ASSERT_FALSE(r.cycles.empty());
  EXPECT_NE(r.mean_d(), 0.0);
}
