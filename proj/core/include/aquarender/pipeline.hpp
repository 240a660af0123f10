#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aquarender/config.hpp"
#include "aquarender/params.hpp"

// Pipeline subcommands. Each reads a RunConfig, writes its artifacts under
// the `out` directory, and finishes with `outputs.txt` (sorted list of
// produced files) and `summary.txt` (key = value lines).
namespace aquarender::pipeline {

void cmd_render(const RunConfig& cfg);
void cmd_gen_dataset(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_restore(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);

// Dispatches "render", "gen-dataset", "fit", "restore" or "eval".
void run_command(std::string_view name, const RunConfig& cfg);

// 1 for configuration and parameter errors, 2 for data errors, 3 for
// numerical divergence.
int exit_code_for(const std::exception& e);

// Render model from `model = <checkpoint>` and/or inline parameter keys
// (eta_r ... k, noise_sigma, max_altitude); inline keys win. When neither
// the config nor the checkpoint sets max_altitude, `fallback_altitude` is used.
RenderModel model_from_config(const RunConfig& cfg, double fallback_altitude = 1.0);

// Collects written files and summary lines for one command run.
class RunOutputs {
 public:
  explicit RunOutputs(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path(const std::string& rel) const { return dir_ / rel; }
  // Registers a file the caller wrote (atomically) at path(rel).
  void add(const std::string& rel) { files_.push_back(rel); }
  void write_text(const std::string& rel, std::string_view text);
  void note(const std::string& key, const std::string& value);
  void note(const std::string& key, double value);

  // Writes summary.txt and outputs.txt.
  void finish(std::string_view command);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, std::string>> summary_;
};

}  // namespace aquarender::pipeline
