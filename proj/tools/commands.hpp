#pragma once

#include <koopest/config.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace koopest::cli {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::vector<std::string> methods = {"hybrid", "edmd", "rl"};
};

// Loads the config and applies the --seed override.
ExperimentConfig resolve_config(const Options& opt);

void cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_fit_edmd(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_evaluate(const ExperimentConfig& cfg, const std::string& out_dir, const std::vector<std::string>& methods);
void cmd_transfer(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_finetune(const ExperimentConfig& cfg, const std::string& out_dir);

// Dispatches by command name; returns the process exit code and prints an
// error JSON on stderr on failure.
int run(const std::string& command, const Options& opt);

}  // namespace koopest::cli
