#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quadosc/config.hpp"

namespace quadosc::io {

using MetricValue = std::variant<double, std::int64_t, bool, std::string, std::vector<double>>;

struct Metric {
  std::string name;
  MetricValue value;
  std::string unit;  // empty for dimensionless
};

/// Machine-readable result of one run. Metrics keep insertion order.
struct SummaryReport {
  Mode mode = Mode::oscillator;
  std::vector<ConfigEntry> config;
  std::vector<Metric> metrics;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;
  std::vector<std::string> files;  // relative to the output directory
  std::optional<std::uint64_t> seed;
  std::string tool_version;

  void add(std::string name, MetricValue value, std::string unit = {});
  const Metric* find(std::string_view name) const;
  /// Numeric metric by name; throws std::out_of_range when absent or not a
  /// number.
  double number(std::string_view name) const;
};

std::string tool_version();

/// Pretty-printed JSON with a fixed key order and trailing newline.
std::string to_json(const SummaryReport& report);
void write_report(const SummaryReport& report, const std::filesystem::path& path);

}  // namespace quadosc::io
