#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quadosc::signal {

struct Sample {
  double t = 0.0;  // s
  double y = 0.0;

  bool operator==(const Sample&) const = default;
};

/// Sampled time series. Times must be strictly increasing.
struct SignalTrace {
  std::vector<Sample> samples;
  std::string label;

  /// Throws Error(empty_trace) for < 2 samples, Error(non_monotone_time) if
  /// times do not strictly increase.
  void validate() const;
  double start() const { return samples.front().t; }
  double stop() const { return samples.back().t; }
};

enum class Level : std::uint8_t { low = 0, high = 1 };
enum class Direction : std::uint8_t { rising, falling };

inline Level operator!(Level l) { return l == Level::high ? Level::low : Level::high; }

struct Edge {
  double t = 0.0;
  Direction direction = Direction::rising;

  bool operator==(const Edge&) const = default;
};

/// Two-level signal stored as an initial level plus an alternating edge list
/// over the observation window [start, stop].
struct SquareWave {
  Level initial_level = Level::low;
  std::vector<Edge> edges;
  std::string label;
  double start = 0.0;
  double stop = 0.0;

  /// Appends an edge toggling the current level. Time must exceed the last
  /// edge time.
  void toggle(double t);
  Level final_level() const;
  Level level_at(double t) const;
  std::vector<double> edge_times(Direction d) const;
  /// Complementary signal with the same edge times.
  SquareWave complement(std::string label) const;
  /// Portion of the wave inside [from, to]; the initial level becomes the
  /// level at `from`.
  SquareWave slice(double from, double to) const;
  /// Checks edge-time ordering and direction alternation.
  bool well_formed() const;
};

struct BinarizeResult {
  SquareWave wave;
  /// Set when the trace crossed neither threshold.
  bool degenerate = false;
};

/// Hysteresis comparator. Edge times are interpolated linearly between the
/// two samples bracketing the threshold that triggered the switch.
BinarizeResult binarize(const SignalTrace& trace, double low_thr, double high_thr);

/// binarize() with thresholds at midrange -/+ 50% of the half range.
BinarizeResult binarize(const SignalTrace& trace);

struct PeriodStats {
  double t_avg = 0.0;
  double sigma_t = 0.0;  // population standard deviation
  int n = 0;             // number of periods
};

/// Periods from consecutive rising edges.
PeriodStats period_stats(const SquareWave& wave);

struct PhaseReport {
  double t_avg = 0.0;      // s, reference period
  double sigma_t = 0.0;    // s
  double dt_avg = 0.0;     // s, mean edge lag of `other` behind reference
  double dphi_avg = 0.0;   // degrees
  double sigma_dphi = 0.0; // degrees, population spread of per-pair phase
  int n_cycles = 0;
  int n_pairs = 0;
};

/// Average phase lag of `other` behind `reference`. Every reference edge is
/// paired with the first same-direction edge of `other` at or after it and
/// less than one reference period later; both directions contribute.
PhaseReport phase_offset(const SquareWave& reference, const SquareWave& other);

/// Fraction of [from, to] spent high.
double duty_cycle(const SquareWave& wave, double from, double to);

/// 2-bit state, bit 1 = front level, bit 0 = back level.
using QuadState = std::uint8_t;

struct QuadratureCheck {
  std::vector<QuadState> states;
  std::vector<double> times;  // entry time of each state; first is wave start
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Merges the two edge streams and requires the 2-bit state to walk the
/// cycle 10 -> 11 -> 01 -> 00 -> 10 with no skips or repeats.
QuadratureCheck validate_quadrature(const SquareWave& front, const SquareWave& back);

std::string format_state(QuadState s);

}  // namespace quadosc::signal
