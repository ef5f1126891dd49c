#include "quadosc/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "quadosc/error.hpp"

namespace quadosc::io {

namespace {

constexpr std::array<std::string_view, 9> kSectionOrder = {
    "run", "sma", "oscillator", "quadrature", "noise", "crawler", "analyze", "calibrate", "sweep"};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Value errors are reported by the caller with the line number attached.
struct BadValue {
  std::string what;
};

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw BadValue{"expected a number, got '" + std::string(s) + "'"};
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw BadValue{"expected an integer, got '" + std::string(s) + "'"};
  return v;
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  for (auto item : split(s, ',')) {
    // lo:hi:count expands to an inclusive linear grid
    if (item.find(':') != std::string_view::npos) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) throw BadValue{"range must be lo:hi:count"};
      const double lo = parse_double(parts[0]);
      const double hi = parse_double(parts[1]);
      const int n = parse_int<int>(parts[2]);
      if (n < 2) throw BadValue{"range count must be >= 2"};
      for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    } else {
      out.push_back(parse_double(item));
    }
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v[i]);
  }
  return s;
}

const char* objective_key(calib::Objective o) {
  switch (o) {
    case calib::Objective::period: return "period";
    case calib::Objective::d_cycle: return "d_cycle";
    case calib::Objective::speed: return "speed";
  }
  return "period";
}

using Getter = std::function<std::optional<std::string>(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, std::string_view)>;

struct KeySpec {
  std::string_view key;
  Setter set;
  Getter get;
};

KeySpec num(std::string_view key, double RunConfig::*outer) {
  return {key, [outer](RunConfig& c, std::string_view v) { c.*outer = parse_double(v); },
          [outer](const RunConfig& c) { return std::optional(format_number(c.*outer)); }};
}

template <class F>
KeySpec num_at(std::string_view key, F field) {
  return {key, [field](RunConfig& c, std::string_view v) { field(c) = parse_double(v); },
          [field](const RunConfig& c) {
            return std::optional(format_number(field(const_cast<RunConfig&>(c))));
          }};
}

template <class F>
KeySpec opt_num_at(std::string_view key, F field) {
  return {key, [field](RunConfig& c, std::string_view v) { field(c) = parse_double(v); },
          [field](const RunConfig& c) -> std::optional<std::string> {
            const auto& o = field(const_cast<RunConfig&>(c));
            if (!o) return std::nullopt;
            return format_number(*o);
          }};
}

template <class F>
KeySpec int_at(std::string_view key, F field) {
  return {key, [field](RunConfig& c, std::string_view v) { field(c) = parse_int<int>(v); },
          [field](const RunConfig& c) {
            return std::optional(std::to_string(field(const_cast<RunConfig&>(c))));
          }};
}

template <class F>
KeySpec str_at(std::string_view key, F field) {
  return {key, [field](RunConfig& c, std::string_view v) { field(c) = std::string(v); },
          [field](const RunConfig& c) {
            return std::optional(std::string(field(const_cast<RunConfig&>(c))));
          }};
}

const std::map<std::string_view, std::vector<KeySpec>>& key_table() {
  static const auto table = [] {
    std::map<std::string_view, std::vector<KeySpec>> t;
    t["run"] = {
        {"mode",
         [](RunConfig& c, std::string_view v) {
           try {
             c.mode = mode_from_string(v);
           } catch (const Error& e) {
             throw BadValue{e.what()};
           }
         },
         [](const RunConfig& c) { return std::optional<std::string>(to_string(c.mode)); }},
        {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>(v); },
         [](const RunConfig& c) -> std::optional<std::string> {
           if (!c.seed) return std::nullopt;
           return std::to_string(*c.seed);
         }},
        num("sample_rate_hz", &RunConfig::sample_rate_hz),
        str_at("out_dir", [](RunConfig& c) -> std::string& { return c.out_dir; }),
    };
    t["sma"] = {
        num_at("tau_s", [](RunConfig& c) -> double& { return c.sma.tau; }),
        opt_num_at("tau_cool_s", [](RunConfig& c) -> std::optional<double>& { return c.sma.tau_cool; }),
        num_at("k_c_per_a2", [](RunConfig& c) -> double& { return c.sma.k; }),
        num_at("t_amb_c", [](RunConfig& c) -> double& { return c.sma.t_amb; }),
        num_at("t_act_c", [](RunConfig& c) -> double& { return c.sma.t_act; }),
        num_at("t_rel_c", [](RunConfig& c) -> double& { return c.sma.t_rel; }),
        {"kind",
         [](RunConfig& c, std::string_view v) {
           if (v == "fiber") c.sma.kind = sma::Kind::fiber;
           else if (v == "spring") c.sma.kind = sma::Kind::spring;
           else throw BadValue{"kind must be fiber or spring"};
         },
         [](const RunConfig& c) {
           return std::optional<std::string>(c.sma.kind == sma::Kind::fiber ? "fiber" : "spring");
         }},
    };
    t["oscillator"] = {
        num_at("current_a", [](RunConfig& c) -> double& { return c.oscillator.current_a; }),
        int_at("snaps", [](RunConfig& c) -> int& { return c.oscillator.snaps; }),
        num_at("amplitude_mm", [](RunConfig& c) -> double& { return c.oscillator.amplitude_mm; }),
        str_at("label", [](RunConfig& c) -> std::string& { return c.oscillator.label; }),
    };
    t["quadrature"] = {
        num_at("central_current_a", [](RunConfig& c) -> double& { return c.quadrature.central_current_a; }),
        num_at("p1_current_a", [](RunConfig& c) -> double& { return c.quadrature.p1_current_a; }),
        num_at("p2_current_a", [](RunConfig& c) -> double& { return c.quadrature.p2_current_a; }),
        {"left_contact_powers",
         [](RunConfig& c, std::string_view v) {
           if (v == "p1") c.quadrature.left_contact_powers = quad::OscId::p1;
           else if (v == "p2") c.quadrature.left_contact_powers = quad::OscId::p2;
           else throw BadValue{"left_contact_powers must be p1 or p2"};
         },
         [](const RunConfig& c) {
           return std::optional<std::string>(quad::to_string(c.quadrature.left_contact_powers));
         }},
        int_at("cycles", [](RunConfig& c) -> int& { return c.quadrature.cycles; }),
    };
    t["noise"] = {
        {"sigma_tau",
         [](RunConfig& c, std::string_view v) { c.noise = quad::NoiseSpec{parse_double(v)}; },
         [](const RunConfig& c) {
           return std::optional(format_number(c.noise ? c.noise->sigma_tau : 0.0));
         }},
    };
    t["crawler"] = {
        num_at("l1_mm", [](RunConfig& c) -> double& { return c.crawler.geometry.l1; }),
        num_at("l2_mm", [](RunConfig& c) -> double& { return c.crawler.geometry.l2; }),
        num_at("alpha_deg", [](RunConfig& c) -> double& { return c.crawler.geometry.alpha_deg; }),
        num_at("dtheta_deg", [](RunConfig& c) -> double& { return c.crawler.geometry.dtheta_deg; }),
        num_at("weight_n", [](RunConfig& c) -> double& { return c.crawler.geometry.weight; }),
        num_at("mu", [](RunConfig& c) -> double& { return c.crawler.geometry.mu; }),
        num_at("tau_act_s", [](RunConfig& c) -> double& { return c.crawler.tau_act_s; }),
        {"on_maps_to",
         [](RunConfig& c, std::string_view v) {
           if (v == "rotated") c.crawler.on_maps_to = crawler::OnMapping::rotated;
           else if (v == "unrotated") c.crawler.on_maps_to = crawler::OnMapping::unrotated;
           else throw BadValue{"on_maps_to must be rotated or unrotated"};
         },
         [](const RunConfig& c) {
           return std::optional<std::string>(
               c.crawler.on_maps_to == crawler::OnMapping::rotated ? "rotated" : "unrotated");
         }},
        opt_num_at("predicted_d_mm", [](RunConfig& c) -> std::optional<double>& { return c.crawler.predicted_d_mm; }),
        opt_num_at("measured_d_mm", [](RunConfig& c) -> std::optional<double>& { return c.crawler.measured_d_mm; }),
    };
    t["analyze"] = {
        str_at("trace_csv", [](RunConfig& c) -> std::string& { return c.analyze.trace_csv; }),
        str_at("time_column", [](RunConfig& c) -> std::string& { return c.analyze.time_column; }),
        str_at("front_column", [](RunConfig& c) -> std::string& { return c.analyze.front_column; }),
        str_at("back_column", [](RunConfig& c) -> std::string& { return c.analyze.back_column; }),
        opt_num_at("low_threshold", [](RunConfig& c) -> std::optional<double>& { return c.analyze.low_threshold; }),
        opt_num_at("high_threshold", [](RunConfig& c) -> std::optional<double>& { return c.analyze.high_threshold; }),
    };
    t["calibrate"] = {
        {"observations",
         [](RunConfig& c, std::string_view v) {
           c.calibrate.observations.clear();
           for (auto item : split(v, ',')) {
             const auto parts = split(item, ':');
             if (parts.size() != 2) throw BadValue{"observation must be current_a:period_s"};
             c.calibrate.observations.push_back({parse_double(parts[0]), parse_double(parts[1])});
           }
         },
         [](const RunConfig& c) {
           std::string s;
           for (std::size_t i = 0; i < c.calibrate.observations.size(); ++i) {
             if (i) s += ", ";
             s += format_number(c.calibrate.observations[i].current) + ":" +
                  format_number(c.calibrate.observations[i].period);
           }
           return std::optional(s);
         }},
    };
    t["sweep"] = {
        {"objective",
         [](RunConfig& c, std::string_view v) {
           try {
             c.sweep.objective = calib::objective_from_string(v);
           } catch (const Error& e) {
             throw BadValue{e.what()};
           }
         },
         [](const RunConfig& c) { return std::optional<std::string>(objective_key(c.sweep.objective)); }},
        {"threads",
         [](RunConfig& c, std::string_view v) { c.sweep.threads = parse_int<unsigned>(v); },
         [](const RunConfig& c) { return std::optional(std::to_string(c.sweep.threads)); }},
        num_at("surplus", [](RunConfig& c) -> double& { return c.sweep.surplus; }),
        int_at("cycles", [](RunConfig& c) -> int& { return c.sweep.cycles; }),
    };
    return t;
  }();
  return table;
}

constexpr std::string_view kAxisPrefix = "axis.";

std::vector<std::string_view> required_sections(Mode m) {
  switch (m) {
    case Mode::oscillator: return {"sma", "oscillator"};
    case Mode::quadrature: return {"sma", "quadrature"};
    case Mode::crawler: return {"crawler"};
    case Mode::pipeline: return {"sma", "quadrature", "crawler"};
    case Mode::analyze: return {"analyze"};
    case Mode::calibrate: return {"calibrate"};
    case Mode::sweep: return {"sweep"};
  }
  return {};
}

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_config, what);
}

void validate_semantics(const RunConfig& c) {
  check(c.sample_rate_hz > 0.0, "run.sample_rate_hz must be positive");
  check(!c.out_dir.empty(), "run.out_dir must not be empty");
  try {
    c.sma.validate();
    if (c.sections.contains("oscillator")) c.oscillator_config().validate();
    if (c.sections.contains("quadrature")) c.quadrature_config().validate();
    if (c.sections.contains("crawler")) c.crawler.geometry.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  }
  if (c.sections.contains("oscillator")) check(c.oscillator.snaps >= 2, "oscillator.snaps must be >= 2");
  if (c.sections.contains("quadrature")) check(c.quadrature.cycles >= 1, "quadrature.cycles must be >= 1");
  if (c.noise) check(c.noise->sigma_tau >= 0.0, "noise.sigma_tau must be >= 0");
  if (c.sections.contains("crawler")) check(c.crawler.tau_act_s > 0.0, "crawler.tau_act_s must be positive");
  if (c.mode == Mode::analyze) {
    check(!c.analyze.trace_csv.empty(), "analyze.trace_csv is required");
    check(!c.analyze.front_column.empty(), "analyze.front_column is required");
    check(!c.analyze.back_column.empty(), "analyze.back_column is required");
    check(c.analyze.low_threshold.has_value() == c.analyze.high_threshold.has_value(),
          "analyze.low_threshold and analyze.high_threshold go together");
    if (c.analyze.low_threshold)
      check(*c.analyze.low_threshold < *c.analyze.high_threshold,
            "analyze.low_threshold must be below analyze.high_threshold");
  }
  if (c.mode == Mode::calibrate)
    check(c.calibrate.observations.size() >= 2, "calibrate.observations needs at least two entries");
  if (c.mode == Mode::sweep) {
    check(!c.sweep.axes.empty(), "sweep needs at least one axis.<name> key");
    check(c.sweep.threads >= 1, "sweep.threads must be >= 1");
    check(c.sweep.cycles >= 1, "sweep.cycles must be >= 1");
  }
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::oscillator: return "oscillator";
    case Mode::quadrature: return "quadrature";
    case Mode::crawler: return "crawler";
    case Mode::pipeline: return "pipeline";
    case Mode::analyze: return "analyze";
    case Mode::calibrate: return "calibrate";
    case Mode::sweep: return "sweep";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  for (auto m : {Mode::oscillator, Mode::quadrature, Mode::crawler, Mode::pipeline,
                 Mode::analyze, Mode::calibrate, Mode::sweep})
    if (s == to_string(m)) return m;
  throw Error(ErrorCode::invalid_config, "unknown mode '" + std::string(s) + "'");
}

sma::ThermalParams default_sma() {
  sma::ThermalParams p;
  p.tau = 1.0533655629402552;
  p.k = 899.96538378302216;
  return p;
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

osc::Config RunConfig::oscillator_config() const {
  osc::Config c;
  c.left_sma = sma;
  c.right_sma = sma;
  c.current = oscillator.current_a;
  c.label = oscillator.label;
  return c;
}

quad::Config RunConfig::quadrature_config() const {
  quad::Config c;
  const std::array<std::pair<osc::Config*, std::pair<double, const char*>>, 3> parts = {{
      {&c.central, {quadrature.central_current_a, "central"}},
      {&c.p1, {quadrature.p1_current_a, "p1"}},
      {&c.p2, {quadrature.p2_current_a, "p2"}},
  }};
  for (const auto& [osc, spec] : parts) {
    osc->left_sma = sma;
    osc->right_sma = sma;
    osc->current = spec.first;
    osc->label = spec.second;
  }
  c.gating.on_left = quadrature.left_contact_powers;
  c.gating.on_right = quadrature.left_contact_powers == quad::OscId::p1 ? quad::OscId::p2
                                                                         : quad::OscId::p1;
  if (noise && noise->sigma_tau > 0.0) c.noise = noise;
  c.rng_seed = seed.value_or(0);
  c.sample_period = 1.0 / sample_rate_hz;
  return c;
}

calib::SweepBase RunConfig::sweep_base() const {
  calib::SweepBase b;
  b.sma = sma;
  b.geometry = crawler.geometry;
  b.current = quadrature.central_current_a;
  b.surplus = sweep.surplus;
  b.tau_act = crawler.tau_act_s;
  b.cycles = sweep.cycles;
  b.mapping = crawler.on_maps_to;
  return b;
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig cfg;
  const auto& table = key_table();
  std::string section;
  std::map<std::string, std::set<std::string>> seen;
  const std::string src(source);

  auto fail = [&](ErrorCode code, int line, const std::string& what) -> void {
    throw Error(code, src + ":" + std::to_string(line) + ": " + what);
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::parse_error, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!table.contains(section)) fail(ErrorCode::unknown_key, line_no, "unknown section [" + section + "]");
      if (cfg.sections.contains(section)) fail(ErrorCode::parse_error, line_no, "duplicate section [" + section + "]");
      cfg.sections.insert(section);
      if (section == "noise" && !cfg.noise) cfg.noise = quad::NoiseSpec{};
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::parse_error, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty()) fail(ErrorCode::parse_error, line_no, "key '" + key + "' outside any section");
    if (key.empty()) fail(ErrorCode::parse_error, line_no, "empty key");
    if (!seen[section].insert(key).second)
      fail(ErrorCode::parse_error, line_no, "duplicate key '" + section + "." + key + "'");

    try {
      if (section == "sweep" && key.starts_with(kAxisPrefix)) {
        const auto name = key.substr(kAxisPrefix.size());
        const auto names = calib::sweep_axis_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
          fail(ErrorCode::unknown_key, line_no, "unknown key 'sweep." + key + "'");
        cfg.sweep.axes.push_back({name, parse_list(value)});
        continue;
      }
      const auto& specs = table.at(section);
      const auto it = std::find_if(specs.begin(), specs.end(),
                                   [&](const KeySpec& s) { return s.key == key; });
      if (it == specs.end()) fail(ErrorCode::unknown_key, line_no, "unknown key '" + section + "." + key + "'");
      it->set(cfg, value);
    } catch (const BadValue& bad) {
      fail(ErrorCode::parse_error, line_no, section + "." + key + ": " + bad.what);
    }
  }

  if (!cfg.sections.contains("run")) throw Error(ErrorCode::missing_section, src + ": missing section [run]");
  if (!seen["run"].contains("mode")) throw Error(ErrorCode::invalid_config, src + ": run.mode is required");
  for (auto s : required_sections(cfg.mode))
    if (!cfg.sections.contains(std::string(s)))
      throw Error(ErrorCode::missing_section, src + ": mode " + to_string(cfg.mode) +
                                                  " needs section [" + std::string(s) + "]");
  validate_semantics(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str(), path.string());
  if (!cfg.analyze.trace_csv.empty()) {
    const std::filesystem::path trace(cfg.analyze.trace_csv);
    if (trace.is_relative())
      cfg.analyze.trace_csv = (path.parent_path() / trace).lexically_normal().string();
  }
  return cfg;
}

std::vector<ConfigEntry> config_entries(const RunConfig& cfg) {
  std::vector<ConfigEntry> out;
  const auto& table = key_table();
  for (auto section : kSectionOrder) {
    const std::string name(section);
    if (name != "run" && !cfg.sections.contains(name)) continue;
    for (const auto& spec : table.at(section))
      if (auto v = spec.get(cfg)) out.push_back({name, std::string(spec.key), *v});
    if (name == "sweep")
      for (const auto& a : cfg.sweep.axes)
        out.push_back({name, std::string(kAxisPrefix) + a.name, join(a.values)});
  }
  return out;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& e : config_entries(cfg)) {
    if (e.section != current) {
      if (!out.empty()) out += "\n";
      out += "[" + e.section + "]\n";
      current = e.section;
    }
    out += e.key + " = " + e.value + "\n";
  }
  return out;
}

}  // namespace quadosc::io
