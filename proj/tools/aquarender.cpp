#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aquarender/config.hpp"
#include "aquarender/error.hpp"
#include "aquarender/pipeline.hpp"

namespace pipeline = aquarender::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Underwater image rendering, model fitting and restoration"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;

  app.add_option("command", command, "render | gen-dataset | fit | restore | eval")
      ->required()
      ->check(CLI::IsMember({"render", "gen-dataset", "fit", "restore", "eval"}));
  app.add_option("--config", config_path, "key = value run configuration")->required();
  app.add_option("--seed", seed, "random seed (default 0)");
  app.add_option("--out", out, "output directory");
  app.add_option("overrides", overrides, "extra key=value settings; these win over the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    pipeline::RunConfig cfg = pipeline::RunConfig::load(config_path);
    for (const auto& kv : overrides) cfg.set_override(kv);
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (out) cfg.set("out", std::filesystem::absolute(*out).string());
    pipeline::run_command(command, cfg);
  } catch (const std::exception& e) {
    std::cerr << "aquarender " << command << ": " << e.what() << '\n';
    return pipeline::exit_code_for(e);
  }
  return 0;
}
