#include "quadosc/calibration.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "quadosc/error.hpp"
#include "quadosc/pipeline.hpp"

namespace quadosc::calib {

namespace {

constexpr double kMaxK = 1e7;  // degC / A^2, upper end of the fit range
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::optional<double> predict_period(const sma::ThermalParams& p, double current) {
  if (!(current > 0.0)) throw Error(ErrorCode::invalid_argument, "current must be > 0");
  const auto cold = sma::time_to_threshold(sma::ambient_state(p), p, current, p.t_act);
  if (!cold) return std::nullopt;
  const double release = sma::time_to_cool({p.t_act, true}, p, p.t_rel).value_or(0.0);
  // Without a release wait the map has a positive fixed point only if its
  // slope at h = 0 exceeds one; otherwise the half period collapses to zero.
  const double t_ss = sma::steady_state_temp(p, current);
  const double slope0 = (p.tau / p.time_constant(0.0)) * (p.t_act - p.t_amb) / (t_ss - p.t_act);
  if (release <= 0.0 && slope0 <= 1.0) return std::nullopt;

  // Half period h maps to the next one through the temperature the idle
  // actuator cooled to during h. The map is increasing and concave, so
  // iterating from the cold start descends monotonically onto the largest
  // fixed point.
  auto next = [&](double h) {
    const auto cooled = sma::step({p.t_act, true}, p, 0.0, h);
    return std::max(*sma::time_to_threshold(cooled, p, current, p.t_act), release);
  };
  double h = *cold;
  for (int i = 0; i < 1'000'000; ++i) {
    const double h_next = next(h);
    if (std::abs(h_next - h) <= 1e-13 * std::max(1.0, h)) {
      h = h_next;
      break;
    }
    h = h_next;
  }
  if (!(h > 1e-12)) return std::nullopt;
  return 2.0 * h;
}

namespace {

sma::ThermalParams with(const sma::ThermalParams& base, double tau, double k) {
  sma::ThermalParams p = base;
  p.tau = tau;
  p.k = k;
  p.tau_cool.reset();
  return p;
}

// Relative residuals; +inf for observations the parameters cannot reach.
std::vector<double> residuals(std::span<const PeriodObservation> obs, const sma::ThermalParams& p) {
  std::vector<double> r;
  r.reserve(obs.size());
  for (const auto& o : obs) {
    const auto pred = predict_period(p, o.current);
    r.push_back(pred ? *pred / o.period - 1.0 : kInf);
  }
  return r;
}

double sum_sq(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

double k_stall(const sma::ThermalParams& p, double current) {
  return (p.t_act - p.t_amb) / (current * current);
}

// Newton on u = (ln tau, ln k) for two observations.
std::optional<std::array<double, 2>> newton(std::span<const PeriodObservation> obs,
                                            const sma::ThermalParams& base,
                                            std::array<double, 2> u, int& iterations) {
  auto eval = [&](const std::array<double, 2>& v) {
    return residuals(obs, with(base, std::exp(v[0]), std::exp(v[1])));
  };
  auto r = eval(u);
  for (int it = 0; it < 60; ++it) {
    ++iterations;
    if (std::max(std::abs(r[0]), std::abs(r[1])) < 1e-12) return u;
    if (!std::isfinite(r[0]) || !std::isfinite(r[1])) return std::nullopt;

    std::array<std::array<double, 2>, 2> jac{};
    for (int j = 0; j < 2; ++j) {
      auto up = u;
      const double h = 1e-7;
      up[j] += h;
      const auto rp = eval(up);
      if (!std::isfinite(rp[0]) || !std::isfinite(rp[1])) return std::nullopt;
      jac[0][j] = (rp[0] - r[0]) / h;
      jac[1][j] = (rp[1] - r[1]) / h;
    }
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (!(std::abs(det) > 1e-300)) return std::nullopt;
    const std::array<double, 2> delta{(-r[0] * jac[1][1] + r[1] * jac[0][1]) / det,
                                      (-r[1] * jac[0][0] + r[0] * jac[1][0]) / det};

    // Backtrack until the residual norm drops.
    const double norm = sum_sq(r);
    double lambda = 1.0;
    bool accepted = false;
    for (int b = 0; b < 40 && !accepted; ++b, lambda *= 0.5) {
      const std::array<double, 2> trial{u[0] + lambda * delta[0], u[1] + lambda * delta[1]};
      const auto rt = eval(trial);
      if (sum_sq(rt) < norm) {
        u = trial;
        r = rt;
        accepted = true;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return std::max(std::abs(r[0]), std::abs(r[1])) < 1e-9 ? std::optional(u) : std::nullopt;
}

// Period at tau = 1. With a shared heating/cooling constant the period is
// proportional to tau, so the ratio of two periods depends on k alone.
std::optional<double> unit_period(const sma::ThermalParams& base, double k, double current) {
  return predict_period(with(base, 1.0, k), current);
}

// Same base with the release wait disabled (t_rel = t_act), leaving only the
// heating-limited branch of the period map.
sma::ThermalParams heat_limited(const sma::ThermalParams& base) {
  sma::ThermalParams p = base;
  p.t_rel = p.t_act;
  return p;
}

// A fit whose half period is pinned to the release wait cannot express a
// current dependence at that observation.
bool release_bound(std::span<const PeriodObservation> obs, const sma::ThermalParams& p) {
  const auto free = heat_limited(p);
  for (const auto& o : obs) {
    const auto a = predict_period(p, o.current);
    const auto b = predict_period(free, o.current);
    if (!a || !b || *a != *b) return true;
  }
  return false;
}

struct Bracket {
  double lo = 0.0;  // ln k
  double hi = 0.0;
};

// ln(P(I_lo) / P(I_hi)) at tau = 1 minus the observed log ratio.
struct RatioGap {
  const sma::ThermalParams& base;
  PeriodObservation lo_obs;
  PeriodObservation hi_obs;

  std::optional<double> operator()(double ln_k) const {
    const double k = std::exp(ln_k);
    const auto a = unit_period(base, k, lo_obs.current);
    const auto b = unit_period(base, k, hi_obs.current);
    if (!a || !b) return std::nullopt;
    return std::log(*a / *b) - std::log(lo_obs.period / hi_obs.period);
  }
};

RatioGap ratio_gap(std::span<const PeriodObservation> obs, const sma::ThermalParams& base) {
  const bool ordered = obs[0].current < obs[1].current;
  return {base, ordered ? obs[0] : obs[1], ordered ? obs[1] : obs[0]};
}

// The period ratio diverges at the stall point of the lower current. Walk
// up in k from there and bracket the first crossing, i.e. the root on the
// stall-dominated branch.
std::optional<Bracket> first_root(const RatioGap& gap) {
  constexpr int kSteps = 400;
  const double start = std::log(k_stall(gap.base, gap.lo_obs.current)) + 1e-9;
  const double stop = std::log(kMaxK);
  if (!(stop > start)) return std::nullopt;
  double prev_x = start;
  auto prev = gap(start);
  for (int i = 1; i <= kSteps; ++i) {
    const double x = start + (stop - start) * i / kSteps;
    const auto g = gap(x);
    if (prev && g && (*prev > 0.0) != (*g > 0.0)) return Bracket{prev_x, x};
    prev_x = x;
    prev = g;
  }
  return std::nullopt;
}

std::optional<std::array<double, 2>> bisect_k(const RatioGap& gap, Bracket br, int& iterations) {
  auto g_lo = gap(br.lo);
  if (!g_lo) return std::nullopt;
  for (int i = 0; i < 200 && br.hi - br.lo > 1e-15 * std::abs(br.hi); ++i) {
    ++iterations;
    const double mid = 0.5 * (br.lo + br.hi);
    const auto gm = gap(mid);
    if (!gm) return std::nullopt;
    if ((*gm > 0.0) == (*g_lo > 0.0)) {
      br.lo = mid;
      g_lo = gm;
    } else {
      br.hi = mid;
    }
  }
  const double ln_k = 0.5 * (br.lo + br.hi);
  const auto unit = unit_period(gap.base, std::exp(ln_k), gap.lo_obs.current);
  if (!unit) return std::nullopt;
  return std::array<double, 2>{std::log(gap.lo_obs.period / *unit), ln_k};
}

std::array<double, 2> initial_guess(std::span<const PeriodObservation> obs,
                                    const sma::ThermalParams& base) {
  double min_current = obs[0].current;
  for (const auto& o : obs) min_current = std::min(min_current, o.current);
  const double k = 1.5 * k_stall(base, min_current);
  double tau = 1.0;
  if (const auto unit = unit_period(base, k, obs[0].current)) tau = obs[0].period / *unit;
  return {std::log(tau), std::log(k)};
}

// Compass search over (ln tau, ln k) on the summed squared residual.
std::array<double, 2> pattern_search(std::span<const PeriodObservation> obs,
                                     const sma::ThermalParams& base, std::array<double, 2> u,
                                     int& iterations, bool& converged) {
  auto cost = [&](const std::array<double, 2>& v) {
    return sum_sq(residuals(obs, with(base, std::exp(v[0]), std::exp(v[1]))));
  };
  double best = cost(u);
  double step = 0.25;
  converged = false;
  while (iterations < 200000) {
    ++iterations;
    bool improved = false;
    for (int j = 0; j < 2; ++j) {
      for (double sign : {1.0, -1.0}) {
        auto trial = u;
        trial[j] += sign * step;
        const double c = cost(trial);
        if (c < best) {
          best = c;
          u = trial;
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if (step < 1e-12) {
        converged = std::isfinite(best);
        break;
      }
    }
  }
  return u;
}

}  // namespace

CalibrationResult calibrate_thermal(std::span<const PeriodObservation> obs,
                                    const sma::ThermalParams& fixed) {
  if (obs.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "calibration needs at least 2 observations");
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i].current > 0.0) || !(obs[i].period > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "observations need current > 0 and period > 0");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (obs[i].current == obs[j].current) {
        throw Error(ErrorCode::invalid_argument, "observation currents must be distinct");
      }
    }
    if (fixed.t_amb + kMaxK * obs[i].current * obs[i].current <= fixed.t_act) {
      throw Error(ErrorCode::infeasible_observations,
                  "current " + std::to_string(obs[i].current) +
                      " A cannot reach the activation temperature for any k in range");
    }
  }

  CalibrationResult res;
  res.params = with(fixed, fixed.tau, fixed.k);
  std::optional<std::array<double, 2>> fit;

  if (obs.size() == 2) {
    const RatioGap gap = ratio_gap(obs, fixed);
    const auto bracket = first_root(gap);
    if (bracket) {
      // Newton from the bracket midpoint; bisection if it escapes or fails.
      const double ln_k = 0.5 * (bracket->lo + bracket->hi);
      double tau = 1.0;
      if (const auto unit = unit_period(fixed, std::exp(ln_k), gap.lo_obs.current)) {
        tau = gap.lo_obs.period / *unit;
      }
      fit = newton(obs, fixed, {std::log(tau), ln_k}, res.iterations);
      res.method = "newton";
      if (fit && ((*fit)[1] < bracket->lo || (*fit)[1] > bracket->hi ||
                  release_bound(obs, with(fixed, std::exp((*fit)[0]), std::exp((*fit)[1]))))) {
        fit.reset();
      }
      if (!fit) {
        fit = bisect_k(gap, *bracket, res.iterations);
        res.method = "bisection";
      }
    } else {
      res.method = "scan";
    }
    res.converged = fit.has_value();
  } else {
    // Seed from an exact fit of the extreme currents when one exists.
    auto [lo_it, hi_it] = std::minmax_element(
        obs.begin(), obs.end(),
        [](const PeriodObservation& a, const PeriodObservation& b) { return a.current < b.current; });
    const std::array<PeriodObservation, 2> ends{*lo_it, *hi_it};
    std::optional<std::array<double, 2>> start;
    const RatioGap gap = ratio_gap(ends, fixed);
    if (const auto br = first_root(gap)) start = bisect_k(gap, *br, res.iterations);
    bool converged = false;
    fit = pattern_search(obs, fixed, start.value_or(initial_guess(obs, fixed)), res.iterations,
                         converged);
    res.method = "pattern_search";
    res.converged = converged;
  }

  if (fit) res.params = with(fixed, std::exp((*fit)[0]), std::exp((*fit)[1]));
  res.residuals = residuals(obs, res.params);
  for (double r : res.residuals) {
    if (!std::isfinite(r)) res.converged = false;
  }
  if (obs.size() == 2 && res.converged) {
    res.converged = std::abs(res.residuals[0]) < 1e-6 && std::abs(res.residuals[1]) < 1e-6 &&
                    !release_bound(obs, res.params);
  }
  return res;
}

ScalarOptimum optimize_scalar(const std::function<double(double)>& objective, double lo,
                              double hi, double tol, Sense sense) {
  if (!(lo < hi) || !(tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "optimize_scalar needs lo < hi and tol > 0");
  }
  ScalarOptimum out;
  auto f = [&](double x) {
    ++out.evaluations;
    const double v = objective(x);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite_objective,
                  "objective is not finite at x = " + std::to_string(x));
    }
    return sense == Sense::minimize ? v : -v;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 2.0 * tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  out.arg = 0.5 * (a + b);
  out.value = objective(out.arg);
  ++out.evaluations;
  return out;
}

namespace {

constexpr std::array<std::string_view, 9> kAxisNames{
    "current_a", "surplus", "tau_s", "k_c_per_a2", "tau_act_s",
    "l1_mm",     "l2_mm",   "alpha_deg", "dtheta_deg"};

void apply(SweepBase& b, std::string_view axis, double v) {
  if (axis == "current_a") b.current = v;
  else if (axis == "surplus") b.surplus = v;
  else if (axis == "tau_s") b.sma.tau = v;
  else if (axis == "k_c_per_a2") b.sma.k = v;
  else if (axis == "tau_act_s") b.tau_act = v;
  else if (axis == "l1_mm") b.geometry.l1 = v;
  else if (axis == "l2_mm") b.geometry.l2 = v;
  else if (axis == "alpha_deg") b.geometry.alpha_deg = v;
  else if (axis == "dtheta_deg") b.geometry.dtheta_deg = v;
}

double evaluate(Objective o, const SweepBase& b) {
  switch (o) {
    case Objective::period: {
      b.sma.validate();
      const auto p = predict_period(b.sma, b.current);
      if (!p) throw Error(ErrorCode::stalled, "oscillator stalls");
      return *p;
    }
    case Objective::d_cycle: {
      const auto seq = crawler::default_sequence();
      return crawler::run_cycle(b.geometry, seq).d_cycle;
    }
    case Objective::speed: {
      const auto cfg = pipeline::matched_config(b.sma, b.current, b.surplus);
      const auto r = pipeline::run(cfg, b.cycles, b.geometry, b.mapping, b.tau_act);
      if (r.drive.cycles.empty()) throw Error(ErrorCode::insufficient_edges, "no gait cycle");
      return r.drive.mean_speed();
    }
  }
  return 0.0;
}

}  // namespace

std::span<const std::string_view> sweep_axis_names() { return kAxisNames; }

const char* to_string(Objective o) {
  switch (o) {
    case Objective::period: return "period_s";
    case Objective::d_cycle: return "d_cycle_mm";
    case Objective::speed: return "speed_mm_per_s";
  }
  return "?";
}

Objective objective_from_string(std::string_view s) {
  if (s == "period" || s == "period_s") return Objective::period;
  if (s == "d_cycle" || s == "d_cycle_mm") return Objective::d_cycle;
  if (s == "speed" || s == "speed_mm_per_s") return Objective::speed;
  throw Error(ErrorCode::invalid_argument, "unknown sweep objective '" + std::string(s) + "'");
}

SweepTable sweep(std::span<const Axis> axes, Objective objective, const SweepBase& base,
                 unsigned threads) {
  if (axes.empty()) throw Error(ErrorCode::invalid_argument, "sweep needs at least one axis");
  std::size_t n_rows = 1;
  SweepTable table;
  table.objective = to_string(objective);
  for (const auto& a : axes) {
    if (std::find(kAxisNames.begin(), kAxisNames.end(), a.name) == kAxisNames.end()) {
      throw Error(ErrorCode::invalid_argument, "unknown sweep axis '" + a.name + "'");
    }
    if (a.values.empty()) throw Error(ErrorCode::invalid_argument, "axis '" + a.name + "' is empty");
    n_rows *= a.values.size();
    table.axes.push_back(a.name);
  }

  table.rows.resize(n_rows);
  auto fill = [&](std::size_t row) {
    SweepBase b = base;
    SweepRow& out = table.rows[row];
    out.point.resize(axes.size());
    std::size_t rem = row;
    for (std::size_t j = axes.size(); j-- > 0;) {
      const auto& vals = axes[j].values;
      out.point[j] = vals[rem % vals.size()];
      rem /= vals.size();
    }
    for (std::size_t j = 0; j < axes.size(); ++j) apply(b, axes[j].name, out.point[j]);
    try {
      out.value = evaluate(objective, b);
    } catch (const Error& e) {
      out.error = std::string(to_string(e.code())) + ": " + e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_rows)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_rows; ++i) fill(i);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n_rows; i = next++) fill(i);
    });
  }
  pool.clear();
  return table;
}

}  // namespace quadosc::calib
