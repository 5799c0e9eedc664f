#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "glasdi/config.hpp"
#include "glasdi/param_space.hpp"

namespace glasdi::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kPartialFailure = 2,
  kNumericalFailure = 3,
};

/// Parses "a,w" (any number of comma-separated reals).
ParamPoint parse_mu(const std::string& text);

/// grid_per_dim evenly spread grid points per dimension (rounded to the
/// nearest grid index), tensor product in grid order.
std::vector<ParamPoint> uniform_training_grid(const DiscreteParamSpace& space,
                                              std::size_t grid_per_dim);

void cmd_fom_run(const RunConfig& cfg, const ParamPoint& mu, const std::filesystem::path& out,
                 std::ostream& log);
/// Greedy training into cfg.output_dir: checkpoint.json, loss.csv,
/// audit.jsonl, summary.json, config.json.
void cmd_train(const RunConfig& cfg, std::ostream& log);
/// Uniform-grid decoupled baseline into cfg.output_dir.
void cmd_train_lasdi(const RunConfig& cfg, std::ostream& log);
void cmd_predict(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                 const ParamPoint& mu, const std::filesystem::path& out, std::ostream& log);
/// Returns kOk or kPartialFailure.
int cmd_eval_grid(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                  const std::filesystem::path& out, std::ostream& log);
void cmd_speedup(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                 const ParamPoint& mu, const std::filesystem::path& out, std::ostream& log);

/// Full command-line entry point; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glasdi::cli
