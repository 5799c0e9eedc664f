#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "glasdi/dynamics_id.hpp"
#include "glasdi/fom_burgers.hpp"
#include "glasdi/param_space.hpp"
#include "glasdi/training.hpp"

namespace glasdi {

struct InterpOptions {
  std::size_t k = 4;
  double power = 2.0;
};

/// Everything needed to predict at a new parameter: the autoencoder plus
/// the anchored coefficient matrices.
struct RomModel {
  Autoencoder ae;
  std::vector<DiModel> anchors;
  InterpOptions interp;

  std::vector<ParamPoint> anchor_params() const;
};

RomModel make_rom(const Autoencoder& ae, const TrainingDatabase& db, const InterpOptions& interp);

/// Source of full-order trajectories (direct simulation or a cache).
using FomSolver = std::function<Trajectory(const ParamPoint&)>;

/// z_0 = enc(u_0(mu)), Xi from k-NN interpolation (k clamped to the anchor
/// count), then RK4 over the FOM time grid. Returns N_z x (N_t+1).
Eigen::MatrixXd predict_latent(const ParamPoint& mu, const RomModel& rom,
                               const DiscreteParamSpace& space, const FomConfig& fom);

/// Decoded prediction U_hat (no derivative block).
Trajectory predict(const ParamPoint& mu, const RomModel& rom, const DiscreteParamSpace& space,
                   const FomConfig& fom);

/// max_n ||uhat_n - u_n|| / max(||u_n||, 1e-12). Relative to the first
/// argument.
double max_relative_error(const Trajectory& reference, const Trajectory& approx);

}  // namespace glasdi
