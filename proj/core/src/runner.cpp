#include "quadosc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "quadosc/calibration.hpp"
#include "quadosc/crawler.hpp"
#include "quadosc/error.hpp"
#include "quadosc/oscillator.hpp"
#include "quadosc/pipeline.hpp"
#include "quadosc/plot.hpp"
#include "quadosc/quadrature.hpp"
#include "quadosc/trace_io.hpp"

namespace quadosc::io {

namespace fs = std::filesystem;

namespace {

// Collects output files; a null root means evaluate-only.
struct Sink {
  const fs::path* root = nullptr;
  SummaryReport* report = nullptr;

  void write(const std::string& name, const std::function<void(const fs::path&)>& fn) {
    if (!root) return;
    fn(*root / name);
    report->files.push_back(name);
  }
  void wave(const std::string& name, const signal::SquareWave& w, double rate) {
    if (!root) return;
    const auto edges = export_wave_csv(w, *root / name, rate);
    report->files.push_back(name);
    report->files.push_back(edges.filename().string());
  }
};

double duty_whole_cycles(const signal::SquareWave& w) {
  const auto rises = w.edge_times(signal::Direction::rising);
  if (rises.size() < 2) return signal::duty_cycle(w, w.start, w.stop);
  return signal::duty_cycle(w, rises.front(), rises.back());
}

signal::SignalTrace scaled(signal::SignalTrace tr, double factor, std::string label) {
  for (auto& s : tr.samples) s.y *= factor;
  tr.label = std::move(label);
  return tr;
}

void add_faults(SummaryReport& r, const std::vector<quad::SyncFault>& faults) {
  std::int64_t n_double = 0, n_missed = 0, n_stalled = 0;
  for (const auto& f : faults) {
    if (f.kind == quad::FaultKind::double_snap) ++n_double;
    if (f.kind == quad::FaultKind::missed_snap) ++n_missed;
    if (f.kind == quad::FaultKind::stalled) ++n_stalled;
  }
  r.add("faults_double_snap", n_double);
  r.add("faults_missed_snap", n_missed);
  r.add("faults_stalled", n_stalled);
  if (!faults.empty()) {
    const auto& f = faults.front();
    r.warnings.push_back(std::string("first fault: ") + quad::to_string(f.kind) + " on " +
                         quad::to_string(f.oscillator) + " at t = " + format_number(f.at) + " s");
  }
}

void add_phase(SummaryReport& r, const signal::PhaseReport& p) {
  r.add("t_avg", p.t_avg, "s");
  r.add("sigma_t", p.sigma_t, "s");
  r.add("dt_avg", p.dt_avg, "s");
  r.add("dphi_avg", p.dphi_avg, "deg");
  r.add("sigma_dphi", p.sigma_dphi, "deg");
  r.add("n_cycles", static_cast<std::int64_t>(p.n_cycles));
  r.add("n_pairs", static_cast<std::int64_t>(p.n_pairs));
}

void add_quadrature_check(SummaryReport& r, const signal::QuadratureCheck& q) {
  r.add("quadrature_ok", q.ok());
  r.add("quadrature_violations", static_cast<std::int64_t>(q.violations.size()));
  for (std::size_t i = 0; i < std::min<std::size_t>(q.violations.size(), 5); ++i)
    r.warnings.push_back("quadrature: " + q.violations[i]);
}

void require_seed(const RunConfig& cfg) {
  if (cfg.noise && cfg.noise->sigma_tau > 0.0 && !cfg.seed)
    throw Error(ErrorCode::invalid_config, "noise is enabled: a seed is required (run.seed or --seed)");
}

void quadrature_outputs(const quad::Result& q, const RunConfig& cfg, Sink& sink) {
  const double rate = cfg.sample_rate_hz;
  sink.write("event_log.csv", [&](const fs::path& p) { export_event_log_csv(q.log, p); });
  const char* beams[3] = {"beam_central.csv", "beam_p1.csv", "beam_p2.csv"};
  const char* labels[3] = {"central_mm", "p1_mm", "p2_mm"};
  for (int i = 0; i < 3; ++i)
    sink.write(beams[i], [&](const fs::path& p) { export_trace_csv(scaled(q.beam_traces[i], 1.0, labels[i]), p); });
  sink.wave("wave_central_a.csv", q.central_waves[0], rate);
  sink.wave("wave_p1_a.csv", q.p1_waves[0], rate);
  sink.wave("wave_p1_a_bar.csv", q.p1_waves[1], rate);
  sink.wave("wave_p2_a.csv", q.p2_waves[0], rate);
  sink.wave("wave_p2_a_bar.csv", q.p2_waves[1], rate);
}

std::vector<PlotLane> quadrature_lanes(const quad::Result& q) {
  return {{"central A", q.central_waves[0]}, {"P1 A", q.p1_waves[0]}, {"P1 A-bar", q.p1_waves[1]},
          {"P2 A", q.p2_waves[0]},           {"P2 A-bar", q.p2_waves[1]}};
}

void quadrature_metrics(SummaryReport& r, const quad::Result& q, int cycles) {
  r.add("central_snaps", static_cast<std::int64_t>(q.central_snaps));
  r.add("duration", q.duration, "s");
  add_faults(r, q.faults);
  const auto central = signal::period_stats(q.central_waves[0]);
  r.add("central_period", central.t_avg, "s");
  r.add("central_sigma_t", central.sigma_t, "s");
  const auto p1 = signal::period_stats(q.p1_waves[0]);
  const auto p2 = signal::period_stats(q.p2_waves[0]);
  r.add("p1_period", p1.t_avg, "s");
  r.add("p2_period", p2.t_avg, "s");
  r.add("p1_duty", duty_whole_cycles(q.p1_waves[0]));
  r.add("p2_duty", duty_whole_cycles(q.p2_waves[0]));
  r.add("stages_per_cycle",
        static_cast<double>(q.stages.size() > 0 ? q.stages.size() - 1 : 0) / cycles);
}

void run_oscillator(const RunConfig& cfg, SummaryReport& r, Sink& sink) {
  const auto oc = cfg.oscillator_config();
  const auto run = osc::simulate(oc, cfg.oscillator.snaps, 1.0 / cfg.sample_rate_hz);
  const auto beam = scaled(run.beam_trace, cfg.oscillator.amplitude_mm, oc.label + "_mm");

  const auto halves = run.half_periods();
  r.add("snaps", static_cast<std::int64_t>(run.snap_times.size()));
  r.add("half_periods", halves, "s");
  r.add("steady_period", run.steady_state_period(), "s");
  if (const auto pred = calib::predict_period(cfg.sma, oc.current)) r.add("predicted_period", *pred, "s");
  const auto st = signal::period_stats(run.a);
  r.add("t_avg", st.t_avg, "s");
  r.add("sigma_t", st.sigma_t, "s");
  const auto& s = run.snap_times;
  if (s.size() >= 5) {
    // last two periods, clear of the start-up transient
    const auto tail = run.a.slice(s[s.size() - 5], s.back());
    r.add("duty", signal::duty_cycle(tail, tail.start, tail.stop));
  }

  sink.write("beam_trace.csv", [&](const fs::path& p) { export_trace_csv(beam, p); });
  sink.wave("wave_a.csv", run.a, cfg.sample_rate_hz);
  sink.wave("wave_a_bar.csv", run.a_bar, cfg.sample_rate_hz);
  const std::vector<PlotLane> lanes = {{"beam (mm)", beam}, {"A", run.a}, {"A-bar", run.a_bar}};
  sink.write("plot.svg", [&](const fs::path& p) { render_plot(lanes, p, "oscillator " + oc.label); });
}

void run_quadrature(const RunConfig& cfg, SummaryReport& r, Sink& sink) {
  require_seed(cfg);
  const auto qc = cfg.quadrature_config();
  const auto q = quad::simulate(qc, cfg.quadrature.cycles);
  quadrature_metrics(r, q, cfg.quadrature.cycles);
  try {
    add_phase(r, signal::phase_offset(q.p1_waves[0], q.p2_waves[0]));
  } catch (const Error& e) {
    r.warnings.push_back(std::string("phase: ") + e.what());
  }
  add_quadrature_check(r, signal::validate_quadrature(q.p1_waves[0], q.p2_waves[0]));
  quadrature_outputs(q, cfg, sink);
  const auto lanes = quadrature_lanes(q);
  sink.write("plot.svg", [&](const fs::path& p) { render_plot(lanes, p, "quadrature network"); });
}

void add_backsliding(SummaryReport& r, const RunConfig& cfg, double closed_form) {
  const double pred = cfg.crawler.predicted_d_mm.value_or(closed_form);
  r.add("d_predicted", pred, "mm");
  if (cfg.crawler.measured_d_mm) {
    r.add("d_measured", *cfg.crawler.measured_d_mm, "mm");
    r.add("backsliding_ratio", crawler::backsliding_ratio(pred, *cfg.crawler.measured_d_mm));
  }
}

void run_crawler(const RunConfig& cfg, SummaryReport& r, Sink&) {
  const auto& g = cfg.crawler.geometry;
  for (const auto& [name, pose] : std::vector<std::pair<std::string, crawler::LegPose>>{
           {"00", {false, false}}, {"10", {true, false}}, {"11", {true, true}}, {"01", {false, true}}}) {
    const auto s = crawler::normal_forces(g, pose);
    r.add("pose_" + name + "_n_front", s.n_front, "N");
    r.add("pose_" + name + "_n_back", s.n_back, "N");
  }
  auto seq = crawler::default_sequence();
  const auto gait = crawler::run_cycle(g, seq);
  std::vector<double> steps;
  for (const auto& t : gait.transitions) steps.push_back(t.displacement());
  std::reverse(seq.begin(), seq.end());
  const auto reversed = crawler::run_cycle(g, seq);
  const double closed = crawler::displacement_closed_form(g);
  r.add("d_cycle", gait.d_cycle, "mm");
  r.add("transition_displacements", steps, "mm");
  r.add("d_closed_form", closed, "mm");
  r.add("d_reversed", reversed.d_cycle, "mm");
  r.add("ambiguous", gait.ambiguous);
  add_backsliding(r, cfg, closed);
}

void run_pipeline(const RunConfig& cfg, SummaryReport& r, Sink& sink) {
  require_seed(cfg);
  const auto qc = cfg.quadrature_config();
  const auto res = pipeline::run(qc, cfg.quadrature.cycles, cfg.crawler.geometry,
                                 cfg.crawler.on_maps_to, cfg.crawler.tau_act_s);
  quadrature_metrics(r, res.quadrature, cfg.quadrature.cycles);
  add_phase(r, res.phase);
  add_quadrature_check(r, res.drive.quadrature);

  std::vector<double> d;
  for (const auto& c : res.drive.cycles) d.push_back(c.d_cycle);
  const double closed = crawler::displacement_closed_form(cfg.crawler.geometry);
  r.add("gait_cycles", static_cast<std::int64_t>(d.size()));
  r.add("d_per_cycle", d, "mm");
  r.add("d_cycle_mean", res.drive.mean_d(), "mm");
  r.add("d_cycle_sigma", res.drive.sigma_d(), "mm");
  r.add("speed", res.drive.mean_speed(), "mm/s");
  r.add("d_closed_form", closed, "mm");
  r.add("actuation_completeness", closed > 0.0 ? res.drive.mean_d() / closed : 0.0);
  add_backsliding(r, cfg, closed);
  r.notes.push_back(
      "The hardware figure of 6.9 +/- 2.3 mm per cycle is not a target: the robot dimensions and "
      "actuator time constant behind it are unpublished. Only the ordering (shorter periods give "
      "smaller steps) and the long-period limit are checked.");
  for (const auto& w : res.drive.warnings)
    if (!w.starts_with("quadrature: ")) r.warnings.push_back(w);

  quadrature_outputs(res.quadrature, cfg, sink);
  sink.write("trajectory.csv", [&](const fs::path& p) { export_trajectory_csv(res.drive, p); });
  auto lanes = quadrature_lanes(res.quadrature);
  signal::SignalTrace xf{{}, "x_front_mm"};
  signal::SignalTrace xb{{}, "x_back_mm"};
  for (const auto& p : res.drive.trajectory) {
    if (!xf.samples.empty() && p.t <= xf.samples.back().t) {
      xf.samples.back() = {p.t, p.x_front};
      xb.samples.back() = {p.t, p.x_back};
      continue;
    }
    xf.samples.push_back({p.t, p.x_front});
    xb.samples.push_back({p.t, p.x_back});
  }
  lanes.push_back({"front foot (mm)", xf});
  lanes.push_back({"back foot (mm)", xb});
  sink.write("plot.svg", [&](const fs::path& p) { render_plot(lanes, p, "quadrature-driven crawler"); });
}

void run_analyze(const RunConfig& cfg, SummaryReport& r, Sink& sink) {
  const auto& a = cfg.analyze;
  const auto front = import_tracker_csv(a.trace_csv, {a.time_column, a.front_column});
  const auto back = import_tracker_csv(a.trace_csv, {a.time_column, a.back_column});
  r.add("skipped_rows", static_cast<std::int64_t>(std::max(front.skipped_rows, back.skipped_rows)));
  if (front.skipped_rows > 0 || back.skipped_rows > 0)
    r.warnings.push_back("skipped " + std::to_string(std::max(front.skipped_rows, back.skipped_rows)) +
                         " malformed rows");

  auto bin = [&](const signal::SignalTrace& tr) {
    return a.low_threshold ? signal::binarize(tr, *a.low_threshold, *a.high_threshold)
                           : signal::binarize(tr);
  };
  auto bf = bin(front.trace);
  auto bb = bin(back.trace);
  if (bf.degenerate) r.warnings.push_back("front trace never crossed a threshold");
  if (bb.degenerate) r.warnings.push_back("back trace never crossed a threshold");
  bf.wave.label = a.front_column;
  bb.wave.label = a.back_column;

  add_phase(r, signal::phase_offset(bf.wave, bb.wave));
  r.add("front_duty", duty_whole_cycles(bf.wave));
  r.add("back_duty", duty_whole_cycles(bb.wave));
  add_quadrature_check(r, signal::validate_quadrature(bf.wave, bb.wave));

  sink.wave("wave_front.csv", bf.wave, cfg.sample_rate_hz);
  sink.wave("wave_back.csv", bb.wave, cfg.sample_rate_hz);
  const std::vector<PlotLane> lanes = {{a.front_column, front.trace},
                                       {a.front_column + " binary", bf.wave},
                                       {a.back_column, back.trace},
                                       {a.back_column + " binary", bb.wave}};
  sink.write("plot.svg", [&](const fs::path& p) { render_plot(lanes, p, "tracked displacement"); });
}

void run_calibrate(const RunConfig& cfg, SummaryReport& r, Sink&) {
  const auto& obs = cfg.calibrate.observations;
  const auto fit = calib::calibrate_thermal(obs, cfg.sma);
  r.add("tau", fit.params.tau, "s");
  r.add("k", fit.params.k, "degC/A^2");
  r.add("residuals", fit.residuals);
  double worst = 0.0;
  for (double x : fit.residuals) worst = std::max(worst, std::abs(x));
  r.add("max_abs_residual", worst);
  r.add("converged", fit.converged);
  r.add("iterations", static_cast<std::int64_t>(fit.iterations));
  r.add("method", fit.method);

  double lo = obs.front().current;
  double hi = lo;
  for (const auto& o : obs) {
    lo = std::min(lo, o.current);
    hi = std::max(hi, o.current);
  }
  std::vector<double> grid;
  std::vector<double> periods;
  const int n = static_cast<int>(std::floor((hi - lo) / 0.005 + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double c = lo + 0.005 * i;
    const auto p = calib::predict_period(fit.params, c);
    grid.push_back(c);
    periods.push_back(p ? *p : std::nan(""));
  }
  r.add("grid_current", grid, "A");
  r.add("grid_period", periods, "s");
  if (!fit.converged) r.warnings.push_back("calibration did not converge");
}

void run_sweep(const RunConfig& cfg, SummaryReport& r, Sink& sink) {
  const auto table = calib::sweep(cfg.sweep.axes, cfg.sweep.objective, cfg.sweep_base(), cfg.sweep.threads);
  std::int64_t failed = 0;
  for (const auto& row : table.rows)
    if (!row.value) ++failed;
  r.add("rows", static_cast<std::int64_t>(table.rows.size()));
  r.add("failed_rows", failed);
  sink.write("sweep.csv", [&](const fs::path& p) { export_sweep_csv(table, p); });
}

SummaryReport execute(const RunConfig& cfg, const fs::path* root) {
  SummaryReport r;
  r.mode = cfg.mode;
  r.config = config_entries(cfg);
  r.seed = cfg.seed;
  r.tool_version = tool_version();
  Sink sink{root, &r};
  try {
    switch (cfg.mode) {
      case Mode::oscillator: run_oscillator(cfg, r, sink); break;
      case Mode::quadrature: run_quadrature(cfg, r, sink); break;
      case Mode::crawler: run_crawler(cfg, r, sink); break;
      case Mode::pipeline: run_pipeline(cfg, r, sink); break;
      case Mode::analyze: run_analyze(cfg, r, sink); break;
      case Mode::calibrate: run_calibrate(cfg, r, sink); break;
      case Mode::sweep: run_sweep(cfg, r, sink); break;
    }
  } catch (const Error& e) {
    throw Error(e.code(), std::string(to_string(cfg.mode)) + ": " + e.what());
  }
  return r;
}

}  // namespace

SummaryReport evaluate(const RunConfig& cfg) { return execute(cfg, nullptr); }

SummaryReport run(const RunConfig& cfg) {
  const fs::path root(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::io, root.string() + ": " + ec.message());
  auto r = execute(cfg, &root);
  r.files.push_back("report.json");
  write_report(r, root / "report.json");
  return r;
}

}  // namespace quadosc::io
