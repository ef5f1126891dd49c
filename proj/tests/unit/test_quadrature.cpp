#include <gtest/gtest.h>

#include <cmath>

#include "quadosc/config.hpp"
#include "quadosc/error.hpp"
#include "quadosc/pipeline.hpp"
#include "quadosc/quadrature.hpp"

using namespace quadosc;
using namespace quadosc::quad;
using osc::Side;

namespace {

Config matched(double central = 0.24, double surplus = 0.05) {
  return pipeline::matched_config(io::default_sma(), central, surplus);
}

SystemState with_central(const Config& cfg, Side side) {
  auto s = initial_state(cfg);
  s.central.beam.side = side;
  return s;
}

signal::SquareWave tail(const signal::SquareWave& w, double from) { return w.slice(from, w.stop); }

int count(const std::vector<SyncFault>& f, FaultKind k) {
  return static_cast<int>(std::count_if(f.begin(), f.end(), [k](const SyncFault& x) { return x.kind == k; }));
}

}  // namespace

TEST(Gating, DefaultMap) {
  const auto cfg = matched();
  EXPECT_EQ(gates_closed(with_central(cfg, Side::left), cfg), OscId::p1);
  EXPECT_EQ(gates_closed(with_central(cfg, Side::right), cfg), OscId::p2);
}

TEST(Gating, SwappedMapInverts) {
  auto cfg = matched();
  cfg.gating = {OscId::p2, OscId::p1};
  EXPECT_EQ(gates_closed(with_central(cfg, Side::left), cfg), OscId::p2);
  EXPECT_EQ(gates_closed(with_central(cfg, Side::right), cfg), OscId::p1);
}

TEST(Gating, MustBeBijection) {
  EXPECT_THROW((Gating{OscId::p1, OscId::p1}.validate()), Error);
  EXPECT_THROW((Gating{OscId::central, OscId::p1}.validate()), Error);
}

TEST(Stage, InitialIsOne) {
  const auto cfg = matched();
  EXPECT_EQ(stage_of(initial_state(cfg), cfg.gating), 1);
}

TEST(AdvanceEvent, PeripheralBeatsCentral) {
  const auto cfg = matched();
  const auto r = advance_event(initial_state(cfg), cfg);
  ASSERT_TRUE(std::holds_alternative<EventStep>(r));
  const auto& e = std::get<EventStep>(r).event;
  EXPECT_EQ(e.id, OscId::p1);
  EXPECT_EQ(e.side_after, Side::right);
  EXPECT_EQ(e.stage, 2);
}

TEST(AdvanceEvent, UnpoweredPeripheralsStayCold) {
  auto cfg = matched();
  cfg.p1.current = 0.0;
  cfg.p2.current = 0.0;
  auto s = initial_state(cfg);
  for (int i = 0; i < 6; ++i) {
    const auto r = advance_event(s, cfg);
    ASSERT_TRUE(std::holds_alternative<EventStep>(r));
    const auto& step = std::get<EventStep>(r);
    EXPECT_EQ(step.event.id, OscId::central);
    for (OscId id : {OscId::p1, OscId::p2}) {
      EXPECT_EQ(step.state.get(id).left.temperature, cfg.p1.left_sma.t_amb);
      EXPECT_EQ(step.state.get(id).right.temperature, cfg.p1.left_sma.t_amb);
    }
    s = step.state;
  }
}

TEST(AdvanceEvent, CentralStall) {
  auto cfg = matched(0.2);
  const auto r = advance_event(initial_state(cfg), cfg);
  // p1 at 0.21 A also stalls, so nothing can fire
  ASSERT_TRUE(std::holds_alternative<SyncFault>(r));
  EXPECT_EQ(std::get<SyncFault>(r).kind, FaultKind::stalled);
}

TEST(CheckSync, FaultFreeLog) {
  EventLog log;
  log.events = {{0.5, OscId::p1, Side::right, 2}, {1.0, OscId::central, Side::right, 3},
                {1.4, OscId::p2, Side::right, 4}, {2.0, OscId::central, Side::left, 5}};
  EXPECT_TRUE(check_sync(log).empty());
}

TEST(CheckSync, DoubleSnapAtSecondTime) {
  EventLog log;
  log.events = {{0.5, OscId::p1, Side::right, 2}, {0.8, OscId::p1, Side::left, 1},
                {1.0, OscId::central, Side::right, 8}};
  const auto f = check_sync(log);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], (SyncFault{FaultKind::double_snap, OscId::p1, 0.8}));
}

TEST(CheckSync, MissedSnapAtClosingCentral) {
  EventLog log;
  log.events = {{1.0, OscId::central, Side::right, 8}};
  const auto f = check_sync(log);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], (SyncFault{FaultKind::missed_snap, OscId::p1, 1.0}));
}

TEST(Simulate, MatchedRunIsFaultFreeAndCyclic) {
  const auto r = simulate(matched(), 20);
  EXPECT_TRUE(r.fault_free());
  EXPECT_EQ(r.central_snaps, 80);
  ASSERT_EQ(r.stages.size(), 1u + 8u * 20u);
  for (std::size_t i = 1; i < r.stages.size(); ++i)
    EXPECT_EQ(r.stages[i].stage, r.stages[i - 1].stage % 8 + 1) << i;
}

TEST(Simulate, PeriodDoublingAndQuarterPhase) {
  const auto r = simulate(matched(), 20);
  ASSERT_TRUE(r.fault_free());
  const double t0 = r.log.events[8 * 10].t;  // past the start-up transient
  const auto c = signal::period_stats(tail(r.central_waves[0], t0));
  const auto p1 = signal::period_stats(tail(r.p1_waves[0], t0));
  const auto p2 = signal::period_stats(tail(r.p2_waves[0], t0));
  EXPECT_NEAR(p1.t_avg, 2.0 * c.t_avg, 1e-6 * p1.t_avg);
  EXPECT_NEAR(p2.t_avg, 2.0 * c.t_avg, 1e-6 * p2.t_avg);
  const auto ph = signal::phase_offset(tail(r.p1_waves[0], t0), tail(r.p2_waves[0], t0));
  EXPECT_NEAR(ph.dphi_avg, 90.0, 1e-3);
}

TEST(Simulate, GrayOrder) {
  const auto r = simulate(matched(), 10);
  const auto q = signal::validate_quadrature(r.p1_waves[0], r.p2_waves[0]);
  EXPECT_TRUE(q.ok());
}

TEST(Simulate, ComplementaryPairs) {
  const auto r = simulate(matched(), 4);
  for (const auto* pair : {&r.central_waves, &r.p1_waves, &r.p2_waves}) {
    const auto& [a, b] = *pair;
    ASSERT_EQ(a.edges.size(), b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      EXPECT_EQ(a.edges[i].t, b.edges[i].t);
      EXPECT_NE(a.edges[i].direction, b.edges[i].direction);
    }
  }
}

TEST(Simulate, LowPeripheralMissesSnaps) {
  auto cfg = matched();
  cfg.p1.current = 0.2;
  const auto r = simulate(cfg, 4);
  EXPECT_GT(count(r.faults, FaultKind::missed_snap), 0);
  EXPECT_EQ(r.faults.front().kind, FaultKind::missed_snap);
  EXPECT_EQ(r.faults.front().oscillator, OscId::p1);
}

TEST(Simulate, StrongPeripheralDoubleSnaps) {
  auto cfg = matched();
  cfg.p1.current = 0.48;
  const auto r = simulate(cfg, 4);
  EXPECT_GT(count(r.faults, FaultKind::double_snap), 0);
}

TEST(Simulate, DeterministicPerSeed) {
  auto cfg = matched();
  cfg.noise = NoiseSpec{0.02};
  cfg.rng_seed = 42;
  const auto a = simulate(cfg, 10);
  const auto b = simulate(cfg, 10);
  ASSERT_EQ(a.log.events.size(), b.log.events.size());
  for (std::size_t i = 0; i < a.log.events.size(); ++i) {
    EXPECT_EQ(a.log.events[i].t, b.log.events[i].t);
    EXPECT_EQ(a.log.events[i].id, b.log.events[i].id);
  }
  cfg.rng_seed = 43;
  const auto c = simulate(cfg, 10);
  EXPECT_NE(a.log.events.back().t, c.log.events.back().t);
}

TEST(Simulate, ZeroNoiseEqualsDeterministic) {
  auto cfg = matched();
  const auto a = simulate(cfg, 5);
  cfg.noise = NoiseSpec{0.0};
  cfg.rng_seed = 9;
  const auto b = simulate(cfg, 5);
  ASSERT_EQ(a.log.events.size(), b.log.events.size());
  for (std::size_t i = 0; i < a.log.events.size(); ++i) EXPECT_EQ(a.log.events[i].t, b.log.events[i].t);
}

TEST(LeadTimes, EqualForMatchedPeripheralsInSteadyState) {
  const auto r = simulate(matched(), 20);
  const auto leads = lead_times(r.log);
  ASSERT_GE(leads.size(), 40u);
  const auto& a = leads[leads.size() - 2];
  const auto& b = leads[leads.size() - 1];
  EXPECT_NE(a.peripheral, b.peripheral);
  EXPECT_NEAR(a.lead, b.lead, 1e-9);
}

TEST(Pipeline, MatchedConfigLabels) {
  const auto cfg = matched(0.25, 0.1);
  EXPECT_EQ(cfg.central.label, "central");
  EXPECT_NEAR(cfg.p1.current, 0.275, 1e-15);
  EXPECT_EQ(cfg.p1.current, cfg.p2.current);
}
