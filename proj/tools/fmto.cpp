#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "fmto/error.hpp"
#include "fmto/parallel.hpp"
#include "fmto/version.hpp"

namespace {

using namespace fmto;
using namespace fmto::cli;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool verbose = false;
  std::string input;
};

int run(const std::string& name, const Command& command, const Options& opt) {
  RunConfig cfg;
  try {
    cfg = load_config(opt.config);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "fmto: config error: {}\n", e.what());
    return 2;
  }
  if (opt.seed)
    for (auto& sc : cfg.scenarios) sc.seed = *opt.seed;
  if (cfg.scenarios.empty()) {
    if (opt.verbose) fmt::print(stderr, "fmto: no scenarios in {}\n", opt.config);
    return 0;
  }

  const auto n = static_cast<std::ptrdiff_t>(cfg.scenarios.size());
  std::vector<std::string> errors(cfg.scenarios.size());
  // One scenario keeps every thread for its own kernels.
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& sc = cfg.scenarios[static_cast<std::size_t>(i)];
    Context ctx{sc, fs::path(opt.out) / sc.name, std::nullopt, opt.verbose};
    if (!opt.input.empty()) ctx.input = opt.input;
    try {
      fs::create_directories(ctx.dir);
      const auto files = command(ctx);
      write_manifest(ctx, name, files);
      ctx.log(fmt::format("wrote {} files to {}", files.size() + 1, ctx.dir.string()));
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  int status = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    fmt::print(stderr, "fmto {}: scenario '{}' failed: {}\n", name, cfg.scenarios[i].name,
               errors[i]);
    status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levitated ferromagnetic torsional oscillator simulator and analysis tools"};
  app.set_version_flag("--version", std::string(fmto::version));
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "output root; each scenario writes to OUT/<name>");
  app.add_option("--seed", opt.seed, "override every scenario's seed");
  app.add_option("--threads", opt.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose,-v", opt.verbose, "progress messages on stderr");

  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"simulate", {cmd_simulate, "simulate the angle series (and optionally frames)"}},
      {"analyze", {cmd_analyze, "PSD, segment selection and Lorentzian fit of a track or series"}},
      {"calibrate", {cmd_calibrate, "full synthetic calibration chain to a sensitivity curve"}},
      {"sweep", {cmd_sweep, "driven frequency sweep with lock-in detection"}},
      {"sensitivity", {cmd_sensitivity, "thermal-limit sensitivity tables"}},
      {"bounds", {cmd_bounds, "exotic-interaction coupling bound curves"}},
      {"coils", {cmd_coils, "coil coefficients and field profiles"}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.second);
    if (name == "analyze")
      sub->add_option("--input", opt.input, "track CSV or angle series (.bin/.csv)")
          ->required()
          ->check(CLI::ExistingFile);
    subs[name] = sub;
  }

  CLI11_PARSE(app, argc, argv);
  if (opt.threads > 0) fmto::set_threads(opt.threads);

  for (const auto& [name, sub] : subs)
    if (sub->parsed()) return run(name, commands.at(name).first, opt);
  return 2;
}
