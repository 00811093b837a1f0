#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fmto/config.hpp"

namespace fmto::cli {

namespace fs = std::filesystem;

struct Context {
  const ScenarioConfig& scenario;
  fs::path dir;  // scenario output directory
  std::optional<fs::path> input;
  bool verbose = false;

  void log(const std::string& msg) const;
};

/// Each command writes into ctx.dir and returns the files it wrote,
/// relative to ctx.dir.
using Command = std::function<std::vector<std::string>(const Context&)>;

std::vector<std::string> cmd_simulate(const Context& ctx);
std::vector<std::string> cmd_analyze(const Context& ctx);
std::vector<std::string> cmd_calibrate(const Context& ctx);
std::vector<std::string> cmd_sweep(const Context& ctx);
std::vector<std::string> cmd_sensitivity(const Context& ctx);
std::vector<std::string> cmd_bounds(const Context& ctx);
std::vector<std::string> cmd_coils(const Context& ctx);

/// Writes manifest.json next to the outputs.
void write_manifest(const Context& ctx, const std::string& command,
                    const std::vector<std::string>& files);

}  // namespace fmto::cli
