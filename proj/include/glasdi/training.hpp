#pragma once

// Joint autoencoder / latent-dynamics training.
//
// Per snapshot u with time derivative udot (entry i, coefficients Xi_i):
//   z      = enc(u)              uhat    = dec(z)
//   zdot   = J_enc(u) udot       zdothat = Theta(z) Xi_i
//   udothat = J_dec(z) zdothat
// Loss = L_recon + beta_zdot L_zdot + beta_udot L_udot, each term the mean
// over snapshots of a squared L2 norm.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glasdi/dynamics_id.hpp"
#include "glasdi/fom_burgers.hpp"
#include "glasdi/mlp.hpp"

namespace glasdi {

struct LossWeights {
  double beta_zdot = 0.1;
  double beta_udot = 0.1;
};

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;
  double zdot = 0.0;
  double udot = 0.0;
};

struct Autoencoder {
  MlpParams encoder;
  MlpParams decoder;

  std::size_t state_size() const { return encoder.input_size(); }
  std::size_t latent_dim() const { return encoder.output_size(); }
  void validate() const;
};

/// Encoder with the given sizes (input first, latent last) and the mirrored
/// decoder.
Autoencoder init_autoencoder(const std::vector<std::size_t>& encoder_sizes, Activation activation,
                             std::uint64_t seed);

/// Zeroes the decoder's output-layer rows listed in `rows`. When the training
/// targets and their derivatives vanish on those rows, their gradients are
/// exactly zero and the rows stay pinned through training.
void pin_decoder_rows(Autoencoder& ae, const std::vector<std::size_t>& rows);

struct TrainingEntry {
  ParamPoint mu;
  Trajectory trajectory;  // must carry derivatives
  DiModel di;
};

struct TrainingDatabase {
  std::vector<TrainingEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t snapshot_count() const;
  std::vector<ParamPoint> params() const;
  std::vector<DiModel> models() const;
  /// Shape checks against the autoencoder and across entries.
  void validate(const Autoencoder& ae) const;
};

struct GradientSet {
  MlpGradients encoder;
  MlpGradients decoder;
  std::vector<Eigen::MatrixXd> xi;

  static GradientSet zeros_like(const Autoencoder& ae, const TrainingDatabase& db);
  void set_zero();
};

struct SnapshotRef {
  std::size_t entry = 0;
  std::size_t snapshot = 0;
};

/// Loss over `batch`, with every term divided by `normalizer`. When `grads`
/// is non-null the exact gradients are added into it.
LossBreakdown accumulate_batch(const TrainingDatabase& db, const Autoencoder& ae,
                               const LossWeights& weights, std::span<const SnapshotRef> batch,
                               double normalizer, GradientSet* grads);

LossBreakdown total_loss(const TrainingDatabase& db, const Autoencoder& ae,
                         const LossWeights& weights);

/// Full-batch loss and its gradients with respect to every encoder/decoder
/// parameter and every Xi.
LossBreakdown gradients(const TrainingDatabase& db, const Autoencoder& ae,
                        const LossWeights& weights, GradientSet& out);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments are kept per parameter block; blocks appended later (new Xi
/// matrices during greedy growth) start with their own step counter.
struct AdamState {
  struct Slot {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::uint64_t step = 0;
  };
  AdamConfig config;
  std::vector<Slot> slots;
};

void adam_step(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, AdamState& state);

/// Views in canonical order: encoder (W0, b0, W1, ...), decoder, then each
/// entry's Xi when `include_xi`.
std::vector<std::span<double>> parameter_views(Autoencoder& ae, TrainingDatabase& db,
                                               bool include_xi);
std::vector<std::span<const double>> gradient_views(const GradientSet& g, bool include_xi);

struct TrainOptions {
  LossWeights weights;
  /// 0 selects full-batch training.
  std::size_t batch_size = 64;
  bool train_xi = true;
};

/// Mini-batched Adam over all snapshots. Batch composition depends only on
/// `seed`. Returns the per-epoch mean batch loss; throws Divergence with the
/// epoch index on a non-finite loss.
std::vector<LossBreakdown> train_epochs(TrainingDatabase& db, Autoencoder& ae, AdamState& state,
                                        std::size_t n_epochs, const TrainOptions& options,
                                        std::uint64_t seed);

/// Least-squares Xi from latent samples Z (N_z x n) and Zdot. Falls back to
/// a ridge-regularized normal-equation solve when Theta is rank deficient
/// and reports it through `regularized`.
Eigen::MatrixXd fit_di_least_squares(const Eigen::MatrixXd& z, const Eigen::MatrixXd& zdot,
                                     const BasisSpec& spec, double ridge, bool* regularized);

struct LasdiOptions {
  std::size_t n_epochs = 1000;
  std::size_t batch_size = 64;
  double ridge = 1e-8;
};

struct LasdiReport {
  std::vector<LossBreakdown> loss_history;
  std::size_t regularized_fits = 0;
};

/// Decoupled baseline: stage 1 trains the autoencoder on reconstruction
/// only, stage 2 freezes it and fits each entry's Xi by least squares.
LasdiReport train_lasdi_baseline(TrainingDatabase& db, Autoencoder& ae, AdamState& state,
                                 const LasdiOptions& options, std::uint64_t seed);

}  // namespace glasdi
