#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "quadosc/calibration.hpp"
#include "quadosc/crawler.hpp"
#include "quadosc/quadrature.hpp"
#include "quadosc/sma_thermal.hpp"

namespace quadosc::io {

enum class Mode { oscillator, quadrature, crawler, pipeline, analyze, calibrate, sweep };
const char* to_string(Mode m);
Mode mode_from_string(std::string_view s);

/// Thermal constants fitted to the 2.2 s / 6.0 s period endpoints at
/// 0.26 A / 0.23 A with t_amb = 25, t_act = 70, t_rel = 65 degC.
sma::ThermalParams default_sma();

struct OscillatorBlock {
  double current_a = 0.24;
  int snaps = 30;
  double amplitude_mm = 1.0;
  std::string label = "osc";
  bool operator==(const OscillatorBlock&) const = default;
};

struct QuadratureBlock {
  double central_current_a = 0.24;
  double p1_current_a = 0.252;
  double p2_current_a = 0.252;
  quad::OscId left_contact_powers = quad::OscId::p1;
  int cycles = 20;
  bool operator==(const QuadratureBlock&) const = default;
};

struct CrawlerBlock {
  crawler::Geometry geometry;
  double tau_act_s = 2.0;
  crawler::OnMapping on_maps_to = crawler::OnMapping::rotated;
  std::optional<double> predicted_d_mm;  // defaults to the closed form
  std::optional<double> measured_d_mm;
  bool operator==(const CrawlerBlock&) const = default;
};

struct AnalyzeBlock {
  std::string trace_csv;
  std::string time_column = "t";
  std::string front_column;
  std::string back_column;
  std::optional<double> low_threshold;
  std::optional<double> high_threshold;
  bool operator==(const AnalyzeBlock&) const = default;
};

struct CalibrateBlock {
  std::vector<calib::PeriodObservation> observations;
  bool operator==(const CalibrateBlock&) const = default;
};

struct SweepBlock {
  calib::Objective objective = calib::Objective::period;
  std::vector<calib::Axis> axes;
  unsigned threads = 1;
  double surplus = 0.05;
  int cycles = 6;
  bool operator==(const SweepBlock&) const = default;
};

/// One experiment. Only the sections listed in `sections` were given in the
/// source file; the rest hold defaults.
struct RunConfig {
  Mode mode = Mode::oscillator;
  std::optional<std::uint64_t> seed;
  double sample_rate_hz = 100.0;
  std::string out_dir = "out";

  sma::ThermalParams sma = default_sma();
  OscillatorBlock oscillator;
  QuadratureBlock quadrature;
  std::optional<quad::NoiseSpec> noise;
  CrawlerBlock crawler;
  AnalyzeBlock analyze;
  CalibrateBlock calibrate;
  SweepBlock sweep;

  std::set<std::string> sections;

  bool operator==(const RunConfig&) const = default;

  osc::Config oscillator_config() const;
  quad::Config quadrature_config() const;
  calib::SweepBase sweep_base() const;
};

/// Strict parser for `key = value` lines grouped under `[section]` headers.
/// `#` and `;` start comments. Unknown sections or keys, duplicates,
/// malformed values and sections missing for the mode are errors carrying
/// the line number.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form: present sections in fixed order, every key spelled out,
/// shortest round-trip number formatting.
std::string serialize_config(const RunConfig& cfg);

/// Ordered (section, key, value) triples of the canonical form.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
};
std::vector<ConfigEntry> config_entries(const RunConfig& cfg);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace quadosc::io
