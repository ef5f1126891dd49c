#include "quadosc/report.hpp"

#include <stdexcept>

#include "json.hpp"

#include "quadosc/trace_io.hpp"

#ifndef QUADOSC_VERSION
#define QUADOSC_VERSION "0.0.0"
#endif

namespace quadosc::io {

using ojson = nlohmann::ordered_json;

void SummaryReport::add(std::string name, MetricValue value, std::string unit) {
  metrics.push_back({std::move(name), std::move(value), std::move(unit)});
}

const Metric* SummaryReport::find(std::string_view name) const {
  for (const auto& m : metrics)
    if (m.name == name) return &m;
  return nullptr;
}

double SummaryReport::number(std::string_view name) const {
  const auto* m = find(name);
  if (!m) throw std::out_of_range("no metric '" + std::string(name) + "'");
  if (const auto* d = std::get_if<double>(&m->value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&m->value)) return static_cast<double>(*i);
  if (const auto* b = std::get_if<bool>(&m->value)) return *b ? 1.0 : 0.0;
  throw std::out_of_range("metric '" + std::string(name) + "' is not a number");
}

std::string tool_version() { return QUADOSC_VERSION; }

std::string to_json(const SummaryReport& r) {
  ojson j;
  j["mode"] = to_string(r.mode);
  j["provenance"] = {{"tool", "quadosc"},
                     {"tool_version", r.tool_version},
                     {"seed", r.seed ? ojson(*r.seed) : ojson(nullptr)}};

  ojson cfg = ojson::object();
  for (const auto& e : r.config) cfg[e.section][e.key] = e.value;
  j["config"] = cfg;

  ojson metrics = ojson::object();
  ojson units = ojson::object();
  for (const auto& m : r.metrics) {
    std::visit([&](const auto& v) { metrics[m.name] = v; }, m.value);
    units[m.name] = m.unit;
  }
  j["metrics"] = metrics;
  j["units"] = units;
  j["notes"] = r.notes;
  j["warnings"] = r.warnings;
  j["files"] = r.files;
  return j.dump(2) + "\n";
}

void write_report(const SummaryReport& report, const std::filesystem::path& path) {
  write_text(path, to_json(report));
}

}  // namespace quadosc::io
