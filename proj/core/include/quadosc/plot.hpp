#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "quadosc/signal.hpp"

namespace quadosc::io {

/// One horizontal strip of a stacked time plot. Traces are drawn as
/// polylines scaled to the lane; square waves as steps with shaded high bands.
struct PlotLane {
  std::string label;
  std::variant<signal::SignalTrace, signal::SquareWave> data;
};

/// Standalone SVG document. Output depends only on the inputs.
std::string render_svg(std::span<const PlotLane> lanes, std::string_view title = {});

/// render_svg() written to `path`. Throws Error(invalid_argument) for no
/// lanes and Error(io) on write failure.
void render_plot(std::span<const PlotLane> lanes, const std::filesystem::path& path,
                 std::string_view title = {});

}  // namespace quadosc::io
