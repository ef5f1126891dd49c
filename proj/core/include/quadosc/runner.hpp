#pragma once

#include "quadosc/config.hpp"
#include "quadosc/report.hpp"

namespace quadosc::io {

/// Execute one experiment, writing its traces, logs, plot and report.json
/// into cfg.out_dir. Module errors are rethrown with the mode prefixed.
SummaryReport run(const RunConfig& cfg);

/// run() without touching the filesystem.
SummaryReport evaluate(const RunConfig& cfg);

}  // namespace quadosc::io
