#include "quadosc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "quadosc/error.hpp"

namespace quadosc::signal {

void SignalTrace::validate() const {
  if (samples.size() < 2) {
    throw Error(ErrorCode::empty_trace, "trace '" + label + "' has fewer than 2 samples");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::non_monotone_time,
                  "trace '" + label + "': time not strictly increasing at sample " +
                      std::to_string(i));
    }
  }
}

void SquareWave::toggle(double t) {
  if (!edges.empty() && !(t > edges.back().t)) {
    throw Error(ErrorCode::invalid_argument, "square wave edges must be strictly increasing");
  }
  const Level next = !final_level();
  edges.push_back({t, next == Level::high ? Direction::rising : Direction::falling});
}

Level SquareWave::final_level() const {
  return edges.size() % 2 == 0 ? initial_level : !initial_level;
}

Level SquareWave::level_at(double t) const {
  // Edges at exactly t have already taken effect.
  auto it = std::upper_bound(edges.begin(), edges.end(), t,
                             [](double v, const Edge& e) { return v < e.t; });
  const auto n = static_cast<std::size_t>(it - edges.begin());
  return n % 2 == 0 ? initial_level : !initial_level;
}

std::vector<double> SquareWave::edge_times(Direction d) const {
  std::vector<double> out;
  for (const auto& e : edges) {
    if (e.direction == d) out.push_back(e.t);
  }
  return out;
}

SquareWave SquareWave::complement(std::string new_label) const {
  SquareWave out;
  out.initial_level = !initial_level;
  out.label = std::move(new_label);
  out.start = start;
  out.stop = stop;
  out.edges.reserve(edges.size());
  for (const auto& e : edges) {
    out.edges.push_back(
        {e.t, e.direction == Direction::rising ? Direction::falling : Direction::rising});
  }
  return out;
}

SquareWave SquareWave::slice(double from, double to) const {
  SquareWave out;
  out.label = label;
  out.start = from;
  out.stop = to;
  out.initial_level = level_at(from);
  for (const auto& e : edges) {
    if (e.t > from && e.t <= to) out.edges.push_back(e);
  }
  return out;
}

bool SquareWave::well_formed() const {
  Level level = initial_level;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i > 0 && !(edges[i].t > edges[i - 1].t)) return false;
    const Direction expected = level == Level::low ? Direction::rising : Direction::falling;
    if (edges[i].direction != expected) return false;
    level = !level;
  }
  return true;
}

BinarizeResult binarize(const SignalTrace& trace, double low_thr, double high_thr) {
  trace.validate();
  if (!(low_thr < high_thr)) {
    throw Error(ErrorCode::invalid_argument, "binarize: low threshold must be below high");
  }
  const auto& s = trace.samples;

  BinarizeResult out;
  SquareWave& w = out.wave;
  w.label = trace.label;
  w.start = trace.start();
  w.stop = trace.stop();
  const double mid = 0.5 * (low_thr + high_thr);
  w.initial_level = s.front().y >= mid ? Level::high : Level::low;

  Level level = w.initial_level;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const Sample& a = s[i - 1];
    const Sample& b = s[i];
    double thr = 0.0;
    if (level == Level::low && b.y >= high_thr) {
      thr = high_thr;
    } else if (level == Level::high && b.y <= low_thr) {
      thr = low_thr;
    } else {
      continue;
    }
    const double frac = (thr - a.y) / (b.y - a.y);
    w.toggle(a.t + frac * (b.t - a.t));
    level = !level;
  }
  out.degenerate = w.edges.empty();
  return out;
}

BinarizeResult binarize(const SignalTrace& trace) {
  trace.validate();
  const auto [lo, hi] = std::minmax_element(
      trace.samples.begin(), trace.samples.end(),
      [](const Sample& a, const Sample& b) { return a.y < b.y; });
  const double half = 0.5 * (hi->y - lo->y);
  if (!(half > 0.0)) {
    BinarizeResult out;
    out.wave.label = trace.label;
    out.wave.start = trace.start();
    out.wave.stop = trace.stop();
    out.wave.initial_level = Level::low;
    out.degenerate = true;
    return out;
  }
  const double mid = 0.5 * (hi->y + lo->y);
  return binarize(trace, mid - 0.5 * half, mid + 0.5 * half);
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double sigma = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.sigma = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

}  // namespace

PeriodStats period_stats(const SquareWave& wave) {
  const auto rising = wave.edge_times(Direction::rising);
  if (rising.size() < 2) {
    throw Error(ErrorCode::insufficient_edges,
                "wave '" + wave.label + "' needs at least 2 rising edges");
  }
  std::vector<double> periods;
  for (std::size_t i = 1; i < rising.size(); ++i) periods.push_back(rising[i] - rising[i - 1]);
  const auto ms = mean_std(periods);
  return {ms.mean, ms.sigma, static_cast<int>(periods.size())};
}

PhaseReport phase_offset(const SquareWave& reference, const SquareWave& other) {
  const PeriodStats ref = period_stats(reference);
  period_stats(other);  // precondition: both waves oscillate

  std::vector<double> lags;
  for (Direction d : {Direction::rising, Direction::falling}) {
    const auto r = reference.edge_times(d);
    const auto o = other.edge_times(d);
    for (std::size_t j = 0; j < r.size(); ++j) {
      double period = ref.t_avg;
      if (j + 1 < r.size()) {
        period = r[j + 1] - r[j];
      } else if (j > 0) {
        period = r[j] - r[j - 1];
      }
      auto it = std::lower_bound(o.begin(), o.end(), r[j]);
      if (it != o.end() && *it - r[j] < period) lags.push_back(*it - r[j]);
    }
  }
  if (lags.empty()) {
    throw Error(ErrorCode::no_pairable_edges,
                "no edge of '" + other.label + "' pairs with '" + reference.label + "'");
  }

  PhaseReport rep;
  rep.t_avg = ref.t_avg;
  rep.sigma_t = ref.sigma_t;
  rep.n_cycles = ref.n;
  rep.n_pairs = static_cast<int>(lags.size());
  std::vector<double> phases;
  phases.reserve(lags.size());
  for (double lag : lags) phases.push_back(360.0 * lag / ref.t_avg);
  rep.dt_avg = mean_std(lags).mean;
  rep.dphi_avg = 360.0 * rep.dt_avg / rep.t_avg;
  rep.sigma_dphi = mean_std(phases).sigma;
  return rep;
}

double duty_cycle(const SquareWave& wave, double from, double to) {
  const PeriodStats ps = period_stats(wave);
  if (!(to > from) || (to - from) < ps.t_avg * (1.0 - 1e-9)) {
    throw Error(ErrorCode::insufficient_edges, "duty window shorter than one period");
  }
  double high = 0.0;
  double t = from;
  Level level = wave.level_at(from);
  for (const auto& e : wave.edges) {
    if (e.t <= from) continue;
    if (e.t >= to) break;
    if (level == Level::high) high += e.t - t;
    t = e.t;
    level = !level;
  }
  if (level == Level::high) high += to - t;
  return high / (to - from);
}

namespace {

QuadState gray_successor(QuadState s) {
  switch (s) {
    case 0b10: return 0b11;
    case 0b11: return 0b01;
    case 0b01: return 0b00;
    default: return 0b10;
  }
}

QuadState bits(Level front, Level back) {
  return static_cast<QuadState>((static_cast<int>(front) << 1) | static_cast<int>(back));
}

}  // namespace

std::string format_state(QuadState s) {
  return std::string{(s & 0b10) ? '1' : '0', (s & 0b01) ? '1' : '0'};
}

QuadratureCheck validate_quadrature(const SquareWave& front, const SquareWave& back) {
  QuadratureCheck out;
  Level f = front.initial_level;
  Level b = back.initial_level;
  out.states.push_back(bits(f, b));
  out.times.push_back(std::min(front.start, back.start));

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < front.edges.size() || j < back.edges.size()) {
    double t = 0.0;
    const bool take_f = i < front.edges.size() &&
                        (j >= back.edges.size() || front.edges[i].t <= back.edges[j].t);
    const bool take_b = j < back.edges.size() &&
                        (i >= front.edges.size() || back.edges[j].t <= front.edges[i].t);
    if (take_f) {
      t = front.edges[i++].t;
      f = !f;
    }
    if (take_b) {
      t = back.edges[j++].t;
      b = !b;
    }
    const QuadState prev = out.states.back();
    const QuadState next = bits(f, b);
    if (next != gray_successor(prev)) {
      out.violations.push_back("t=" + std::to_string(t) + ": " + format_state(prev) + " -> " +
                               format_state(next));
    }
    out.states.push_back(next);
    out.times.push_back(t);
  }

  const std::set<QuadState> distinct(out.states.begin(), out.states.end());
  if (distinct.size() < 4) {
    out.violations.push_back("only " + std::to_string(distinct.size()) + " of 4 states visited");
  }
  return out;
}

}  // namespace quadosc::signal
