#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "glasdi/fom_burgers.hpp"
#include "glasdi/greedy.hpp"
#include "glasdi/param_space.hpp"
#include "glasdi/rom.hpp"

namespace glasdi {

/// Stable 64-bit key for (mu, FOM configuration).
std::uint64_t fom_cache_key(const ParamPoint& mu, const FomConfig& cfg);

/// Full-order solutions stored on disk as GLSD1 files keyed by
/// fom_cache_key. Entries are written through a temporary file and renamed,
/// so concurrent writers never expose partial files.
class FomCache {
 public:
  FomCache(std::filesystem::path dir, FomConfig cfg);

  Trajectory operator()(const ParamPoint& mu) const;
  std::filesystem::path path_for(const ParamPoint& mu) const;

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  FomConfig cfg_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

struct HeatmapRow {
  std::size_t index = 0;
  ParamPoint mu;
  double max_rel_error = 0.0;
  double residual_indicator = 0.0;
  bool sampled = false;
  bool failed = false;
};

struct HeatmapTable {
  std::vector<HeatmapRow> rows;

  /// Largest error over rows that did not fail.
  double grid_max() const;
  std::size_t failed_count() const;
  std::size_t sampled_count() const;
};

/// FOM (via `solver`) and ROM at every grid point. Failures are recorded on
/// the row and do not abort the sweep.
HeatmapTable evaluate_grid(const RomModel& rom, const DiscreteParamSpace& space,
                           const FomConfig& fom, const FomSolver& solver,
                           const IndicatorOptions& indicator);

/// Columns mu_1..mu_d, max_rel_error, residual_indicator, sampled. Failed
/// rows carry "nan" in both error columns.
void write_heatmap_csv(std::ostream& out, const HeatmapTable& table);
void write_heatmap_csv(const std::filesystem::path& path, const HeatmapTable& table);

struct SpeedupReport {
  std::vector<double> fom_seconds;
  std::vector<double> rom_seconds;
  double fom_median = 0.0;
  double rom_median = 0.0;
  double ratio = 0.0;
};

/// Median wall-clock FOM simulate over median ROM predict, after one
/// untimed warmup run of each.
SpeedupReport measure_speedup(const ParamPoint& mu, const RomModel& rom,
                              const DiscreteParamSpace& space, const FomConfig& fom,
                              std::size_t n_trials);

}  // namespace glasdi
