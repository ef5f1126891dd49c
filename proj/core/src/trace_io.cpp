#include "quadosc/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quadosc/config.hpp"
#include "quadosc/error.hpp"

namespace quadosc::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = line.find(',', pos);
    out.push_back(trim(line.substr(pos, c == std::string_view::npos ? c : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

bool parse_cell(std::string_view s, double& v) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::io, path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, path.string() + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, path.string() + ": write failed");
}

const char* side_name(osc::Side s) { return s == osc::Side::left ? "left" : "right"; }

}  // namespace

ImportResult import_tracker_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open trace");
  ImportResult res;
  res.trace.label = columns.value;

  std::string line;
  int line_no = 0;
  std::optional<std::pair<std::size_t, std::size_t>> idx;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto row = cells(line);
    if (!idx) {
      const auto t = std::find(row.begin(), row.end(), columns.time);
      const auto v = std::find(row.begin(), row.end(), columns.value);
      if (t != row.end() && v != row.end())
        idx = {static_cast<std::size_t>(t - row.begin()), static_cast<std::size_t>(v - row.begin())};
      continue;
    }
    double t = 0.0;
    double y = 0.0;
    if (idx->first >= row.size() || idx->second >= row.size() || !parse_cell(row[idx->first], t) ||
        !parse_cell(row[idx->second], y)) {
      ++res.skipped_rows;
      continue;
    }
    if (!res.trace.samples.empty() && t <= res.trace.samples.back().t)
      throw Error(ErrorCode::non_monotone_time,
                  path.string() + ":" + std::to_string(line_no) + ": time does not increase");
    res.trace.samples.push_back({t, y});
  }
  if (!idx)
    throw Error(ErrorCode::io, path.string() + ": no header naming columns '" + columns.time +
                                   "' and '" + columns.value + "'");
  if (res.trace.samples.size() < 2)
    throw Error(ErrorCode::empty_trace, path.string() + ": fewer than two usable rows");
  return res;
}

void export_trace_csv(const signal::SignalTrace& trace, const std::filesystem::path& path) {
  if (trace.samples.empty()) throw Error(ErrorCode::empty_trace, path.string() + ": empty trace");
  auto out = open_out(path);
  out << "time_s," << (trace.label.empty() ? "value" : trace.label) << "\n";
  for (const auto& s : trace.samples) out << format_number(s.t) << "," << format_number(s.y) << "\n";
  finish(out, path);
}

signal::SignalTrace sample_wave(const signal::SquareWave& wave, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::invalid_argument, "sample rate must be positive");
  signal::SignalTrace tr;
  tr.label = wave.label;
  const double span = wave.stop - wave.start;
  if (!(span >= 0.0)) return tr;
  const auto n = static_cast<long>(std::floor(span * sample_rate_hz + 1e-9)) + 1;
  tr.samples.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double t = wave.start + static_cast<double>(i) / sample_rate_hz;
    tr.samples.push_back({t, wave.level_at(t) == signal::Level::high ? 1.0 : 0.0});
  }
  return tr;
}

std::filesystem::path export_wave_csv(const signal::SquareWave& wave,
                                      const std::filesystem::path& path, double sample_rate_hz) {
  export_trace_csv(sample_wave(wave, sample_rate_hz), path);
  auto edges_path = path;
  edges_path.replace_filename(path.stem().string() + "_edges.csv");
  auto out = open_out(edges_path);
  out << "time_s,direction\n";
  for (const auto& e : wave.edges)
    out << format_number(e.t) << "," << (e.direction == signal::Direction::rising ? "rising" : "falling")
        << "\n";
  finish(out, edges_path);
  return edges_path;
}

void export_event_log_csv(const quad::EventLog& log, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_s,event_kind,oscillator_id,beam_side_after,stage_index\n";
  for (const auto& e : log.events) {
    out << format_number(e.t) << ","
        << (e.id == quad::OscId::central ? "central_snap" : "peripheral_snap") << ","
        << quad::to_string(e.id) << "," << side_name(e.side_after) << "," << e.stage << "\n";
  }
  finish(out, path);
}

void export_trajectory_csv(const crawler::DriveResult& drive, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_s,x_front_mm,x_back_mm,pose_bits\n";
  for (const auto& p : drive.trajectory) {
    const int bits = (p.pose.front_rotated ? 2 : 0) | (p.pose.back_rotated ? 1 : 0);
    out << format_number(p.t) << "," << format_number(p.x_front) << "," << format_number(p.x_back)
        << "," << (bits >> 1) << (bits & 1) << "\n";
  }
  finish(out, path);
}

void export_sweep_csv(const calib::SweepTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& a : table.axes) out << a << ",";
  out << table.objective << ",error\n";
  for (const auto& r : table.rows) {
    for (double v : r.point) out << format_number(v) << ",";
    if (r.value) out << format_number(*r.value);
    out << ",";
    if (!r.error.empty()) {
      std::string quoted = r.error;
      std::size_t at = 0;
      while ((at = quoted.find('"', at)) != std::string::npos) {
        quoted.insert(at, 1, '"');
        at += 2;
      }
      out << '"' << quoted << '"';
    }
    out << "\n";
  }
  finish(out, path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace quadosc::io
