#pragma once

// Physics-informed greedy sampling. Each round trains the model for a fixed
// number of epochs, scores a random subset of unsampled grid points with the
// residual indicator (no full-order solves), and adds the worst-scoring
// candidate to the training database.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "glasdi/fom_burgers.hpp"
#include "glasdi/param_space.hpp"
#include "glasdi/random.hpp"
#include "glasdi/rom.hpp"
#include "glasdi/training.hpp"

namespace glasdi {

enum class IndicatorWindow {
  /// N_ts time levels strided uniformly across [1, N_t].
  Strided,
  /// Levels 1..N_ts.
  Head,
};

struct IndicatorOptions {
  double n_ts_fraction = 0.1;
  IndicatorWindow window = IndicatorWindow::Strided;
};

/// Time levels at which the residual is evaluated (N_ts of them).
std::vector<std::size_t> indicator_indices(std::size_t n_steps, const IndicatorOptions& opts);

/// sum over evaluated levels of ||r(uhat_n; uhat_{n-1})||_2, divided by
/// N_ts + 1.
double residual_indicator(const Trajectory& uhat, const FomConfig& fom,
                          const IndicatorOptions& opts);

/// Same quantity computed from a ROM prediction, decoding only the levels
/// the residual needs. Returns +inf when the latent integration diverges.
double error_indicator(const ParamPoint& mu, const RomModel& rom, const DiscreteParamSpace& space,
                       const FomConfig& fom, const IndicatorOptions& opts);

struct ErrorFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;
};

/// Ordinary least squares of e_max on e_res.
ErrorFit fit_error_model(std::span<const double> e_res, std::span<const double> e_max);

/// slope * e_res + intercept, clamped below at zero.
double estimate_max_error(const ErrorFit& fit, double e_res);

/// Pearson correlation coefficient; NaN when either series is constant or
/// contains non-finite values.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct GreedyConfig {
  std::size_t n_target = 16;
  /// Stop early once the estimated max error drops to tol; <= 0 disables.
  double tol = 0.0;
  std::size_t n_epochs_between = 500;
  std::size_t n_epochs_final = 500;
  std::size_t subset_size = 32;
  IndicatorOptions indicator;
  bool center_start = false;

  void validate() const;
};

struct ModelSettings {
  std::vector<std::size_t> encoder_sizes{1800, 50, 3};
  Activation activation = Activation::Tanh;
  BasisSpec basis;
  InterpOptions interp;
  /// Zero the decoder output rows of Dirichlet boundary nodes.
  bool pin_boundary = true;
};

struct AuditRecord {
  std::size_t iteration = 0;
  ParamPoint selected;
  std::size_t selected_index = 0;
  std::vector<std::size_t> subset;
  std::vector<double> indicators;
  std::vector<double> e_res;
  std::vector<double> e_max;
  ErrorFit fit;
  double estimated_max_error = 0.0;
};

struct GreedyState {
  std::vector<ParamPoint> sampled;
  std::vector<std::size_t> sampled_indices;
  TrainingDatabase db;
  std::vector<std::vector<double>> e_res_history;
  std::vector<std::vector<double>> e_max_history;
  ErrorFit fit;
  std::uint64_t rng_seed = 0;
  Rng rng;
  std::vector<AuditRecord> audit;

  /// Errors over the training samples after the final training round.
  std::vector<double> final_e_res;
  std::vector<double> final_e_max;
  ErrorFit final_fit;

  explicit GreedyState(std::uint64_t seed = 0) : rng_seed(seed), rng(seed) {}
};

using IndicatorFn = std::function<double(const ParamPoint&)>;

/// Draws min(subset_size, remaining) unsampled grid points without
/// replacement and returns the one with the largest indicator (ties go to
/// the lower grid index). Throws ExhaustedSpace when nothing is left.
ParamPoint select_sample(GreedyState& state, const DiscreteParamSpace& space,
                         const GreedyConfig& cfg, const IndicatorFn& indicator,
                         AuditRecord* record = nullptr);

struct TrainingErrors {
  std::vector<double> e_res;
  std::vector<double> e_max;
};

/// Indicator and true max relative error for every database entry, using
/// the stored trajectories as reference.
TrainingErrors training_errors(const RomModel& rom, const TrainingDatabase& db,
                               const DiscreteParamSpace& space, const FomConfig& fom,
                               const IndicatorOptions& opts);

struct GreedyHooks {
  FomSolver solver;
  /// Called after each completed sampling round.
  std::function<void(const GreedyState&, const Autoencoder&)> on_iteration;
};

struct GreedyResult {
  Autoencoder ae;
  GreedyState state;
  std::vector<LossBreakdown> loss_history;
  InterpOptions interp;

  RomModel rom() const { return make_rom(ae, state.db, interp); }
};

GreedyResult greedy_train(const DiscreteParamSpace& space, const FomConfig& fom,
                          const ModelSettings& model, const TrainOptions& train,
                          const AdamConfig& adam, const GreedyConfig& cfg, std::uint64_t seed,
                          const GreedyHooks& hooks = {});

}  // namespace glasdi
