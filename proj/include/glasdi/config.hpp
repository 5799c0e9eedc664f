#pragma once

// Run configuration: one JSON document with a versioned "schema" field.
// Every field has a default; a config file only needs to override what
// differs. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "glasdi/fom_burgers.hpp"
#include "glasdi/greedy.hpp"
#include "glasdi/param_space.hpp"
#include "glasdi/training.hpp"

namespace glasdi {

inline constexpr const char* kConfigSchema = "glasdi-config/1";

struct LasdiSettings {
  /// Uniform training grid is grid_per_dim^dim points.
  std::size_t grid_per_dim = 4;
  std::size_t n_epochs = 2000;
  double ridge = 1e-8;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "glasdi_run";
  /// Empty means <output_dir>/fom_cache.
  std::filesystem::path cache_dir;

  FomConfig fom;
  std::vector<Interval> bounds{{0.7, 0.9}, {0.9, 1.1}};
  std::vector<std::size_t> resolution{11, 11};

  ModelSettings model;
  LossWeights weights;
  AdamConfig adam;
  std::size_t batch_size = 64;

  GreedyConfig greedy;
  LasdiSettings lasdi;
  std::size_t speedup_trials = 5;

  /// Throws InvalidConfig; the architecture check runs before any compute.
  void validate() const;
  DiscreteParamSpace space() const;
  TrainOptions train_options() const;
  std::filesystem::path resolved_cache_dir() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
/// Fully materialized config, defaults included.
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace glasdi
