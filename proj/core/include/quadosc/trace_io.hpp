#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "quadosc/calibration.hpp"
#include "quadosc/crawler.hpp"
#include "quadosc/quadrature.hpp"
#include "quadosc/signal.hpp"

namespace quadosc::io {

struct ColumnMap {
  std::string time = "t";
  std::string value;
};

struct ImportResult {
  signal::SignalTrace trace;
  int skipped_rows = 0;  // rows with a missing or non-numeric cell
};

/// Reads a motion-tracker style CSV. Lines before the header row (the first
/// line naming both mapped columns) are ignored. The trace label is the
/// value column name.
ImportResult import_tracker_csv(const std::filesystem::path& path, const ColumnMap& columns);

/// Writes "time_s,<label>" followed by one row per sample.
void export_trace_csv(const signal::SignalTrace& trace, const std::filesystem::path& path);

/// Writes 0/1 level samples at `sample_rate_hz` over the wave window to
/// `path` and the edge list to `<stem>_edges.csv` beside it. Returns the
/// edge-list path.
std::filesystem::path export_wave_csv(const signal::SquareWave& wave,
                                      const std::filesystem::path& path,
                                      double sample_rate_hz);

/// Level samples a wave would be exported as.
signal::SignalTrace sample_wave(const signal::SquareWave& wave, double sample_rate_hz);

void export_event_log_csv(const quad::EventLog& log, const std::filesystem::path& path);
void export_trajectory_csv(const crawler::DriveResult& drive, const std::filesystem::path& path);
void export_sweep_csv(const calib::SweepTable& table, const std::filesystem::path& path);

/// Writes `text` verbatim, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace quadosc::io
