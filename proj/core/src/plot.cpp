#include "quadosc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "quadosc/error.hpp"
#include "quadosc/trace_io.hpp"

namespace quadosc::io {

namespace {

constexpr double kWidth = 960.0;
constexpr double kLeft = 110.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kLaneH = 70.0;
constexpr double kGap = 14.0;
constexpr double kAxisH = 40.0;

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> time_span(const PlotLane& lane) {
  if (const auto* tr = std::get_if<signal::SignalTrace>(&lane.data)) {
    if (tr->samples.empty()) return {0.0, 0.0};
    return {tr->samples.front().t, tr->samples.back().t};
  }
  const auto& w = std::get<signal::SquareWave>(lane.data);
  return {w.start, w.stop};
}

double tick_step(double span) {
  const double raw = span / 8.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(std::span<const PlotLane> lanes, std::string_view title) {
  if (lanes.empty()) throw Error(ErrorCode::invalid_argument, "nothing to plot");

  double t0 = std::numeric_limits<double>::infinity();
  double t1 = -t0;
  for (const auto& l : lanes) {
    const auto [a, b] = time_span(l);
    t0 = std::min(t0, a);
    t1 = std::max(t1, b);
  }
  if (!(t1 > t0)) t1 = t0 + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + static_cast<double>(lanes.size()) * (kLaneH + kGap) + kAxisH;
  auto xs = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * plot_w; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(kWidth) + "\" height=\"" +
       fx(height) + "\" viewBox=\"0 0 " + fx(kWidth) + " " + fx(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s += "<text x=\"" + fx(kLeft) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(title) + "</text>\n";

  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto& lane = lanes[i];
    const double top = kTop + static_cast<double>(i) * (kLaneH + kGap);
    const double bottom = top + kLaneH;
    s += "<g class=\"lane\" data-label=\"" + escape(lane.label) + "\">\n";
    s += "<rect x=\"" + fx(kLeft) + "\" y=\"" + fx(top) + "\" width=\"" + fx(plot_w) +
         "\" height=\"" + fx(kLaneH) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    s += "<text x=\"" + fx(kLeft - 8) + "\" y=\"" + fx(top + kLaneH / 2 + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + escape(lane.label) +
         "</text>\n";

    std::string pts;
    auto add = [&](double x, double y) {
      if (!pts.empty()) pts += ' ';
      pts += fx(x) + "," + fx(y);
    };
    if (const auto* tr = std::get_if<signal::SignalTrace>(&lane.data)) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& p : tr->samples) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
      }
      if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
      }
      for (const auto& p : tr->samples)
        add(xs(p.t), bottom - 6 - (p.y - lo) / (hi - lo) * (kLaneH - 12));
    } else {
      const auto& w = std::get<signal::SquareWave>(lane.data);
      const double y_hi = top + 8;
      const double y_lo = bottom - 8;
      signal::Level lvl = w.initial_level;
      double t = w.start;
      auto band = [&](double a, double b) {
        s += "<rect x=\"" + fx(xs(a)) + "\" y=\"" + fx(top) + "\" width=\"" + fx(xs(b) - xs(a)) +
             "\" height=\"" + fx(kLaneH) + "\" fill=\"#dde8f5\"/>\n";
      };
      add(xs(t), lvl == signal::Level::high ? y_hi : y_lo);
      for (const auto& e : w.edges) {
        if (lvl == signal::Level::high) band(t, e.t);
        add(xs(e.t), lvl == signal::Level::high ? y_hi : y_lo);
        lvl = !lvl;
        add(xs(e.t), lvl == signal::Level::high ? y_hi : y_lo);
        t = e.t;
      }
      if (lvl == signal::Level::high) band(t, w.stop);
      add(xs(w.stop), lvl == signal::Level::high ? y_hi : y_lo);
    }
    s += "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
    s += "</g>\n";
  }

  const double axis_y = kTop + static_cast<double>(lanes.size()) * (kLaneH + kGap);
  s += "<line x1=\"" + fx(kLeft) + "\" y1=\"" + fx(axis_y) + "\" x2=\"" + fx(kLeft + plot_w) +
       "\" y2=\"" + fx(axis_y) + "\" stroke=\"black\"/>\n";
  const double step = tick_step(t1 - t0);
  for (double k = std::ceil(t0 / step); k * step <= t1 + 1e-9 * step; k += 1.0) {
    const double t = k * step;
    s += "<line x1=\"" + fx(xs(t)) + "\" y1=\"" + fx(axis_y) + "\" x2=\"" + fx(xs(t)) + "\" y2=\"" +
         fx(axis_y + 5) + "\" stroke=\"black\"/>\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    s += "<text x=\"" + fx(xs(t)) + "\" y=\"" + fx(axis_y + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + buf + "</text>\n";
  }
  s += "<text x=\"" + fx(kLeft + plot_w / 2) + "\" y=\"" + fx(axis_y + 34) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">time (s)</text>\n";
  s += "</svg>\n";
  return s;
}

void render_plot(std::span<const PlotLane> lanes, const std::filesystem::path& path,
                 std::string_view title) {
  write_text(path, render_svg(lanes, title));
}

}  // namespace quadosc::io
