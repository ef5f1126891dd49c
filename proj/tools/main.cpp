// quadosc command line: simulate | analyze | calibrate | sweep | pipeline.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "quadosc/config.hpp"
#include "quadosc/error.hpp"
#include "quadosc/report.hpp"
#include "quadosc/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> sample_rate;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment config file")->required();
  sub->add_option("--seed", f.seed, "RNG seed, overrides run.seed");
  sub->add_option("--out", f.out, "output directory, overrides run.out_dir");
  sub->add_option("--sample-rate", f.sample_rate, "trace sample rate in Hz")
      ->check(CLI::PositiveNumber);
}

int fail(const std::string& kind, int code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace quadosc;

  CLI::App app{"SMA quadrature oscillator and crawler simulator"};
  app.set_version_flag("--version", io::tool_version());
  app.require_subcommand(1);

  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
  };
  for (const Sub s : {Sub{"simulate", "oscillator, quadrature or crawler run"},
                      Sub{"analyze", "phase metrics of tracked displacement traces"},
                      Sub{"calibrate", "fit thermal constants to observed periods"},
                      Sub{"sweep", "grid evaluation of an objective"},
                      Sub{"pipeline", "oscillator network driving the crawler"}})
    add_flags(app.add_subcommand(s.name, s.help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("UsageError", 2, e.what());
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    auto cfg = io::load_config(flags.config);
    const bool mode_ok =
        sub == "simulate" ? (cfg.mode == io::Mode::oscillator || cfg.mode == io::Mode::quadrature ||
                             cfg.mode == io::Mode::crawler)
                          : sub == io::to_string(cfg.mode);
    if (!mode_ok)
      throw Error(ErrorCode::invalid_config, "config mode '" + std::string(io::to_string(cfg.mode)) +
                                                 "' does not belong to subcommand '" + sub + "'");
    if (flags.seed) cfg.seed = flags.seed;
    if (flags.out) cfg.out_dir = *flags.out;
    if (flags.sample_rate) cfg.sample_rate_hz = *flags.sample_rate;

    const auto report = io::run(cfg);
    std::cout << io::to_string(report.mode) << ": wrote " << report.files.size() << " files to "
              << cfg.out_dir << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    return 0;
  } catch (const Error& e) {
    const int code = exit_code(category(e.code()));
    return fail(std::string(to_string(e.code())), code, e.what());
  } catch (const std::exception& e) {
    return fail("InternalError", 3, e.what());
  }
}
