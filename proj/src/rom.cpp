#include "glasdi/rom.hpp"

#include <algorithm>
#include <cmath>

#include "glasdi/errors.hpp"

namespace glasdi {

std::vector<ParamPoint> RomModel::anchor_params() const {
  std::vector<ParamPoint> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) out.push_back(a.owner_mu);
  return out;
}

RomModel make_rom(const Autoencoder& ae, const TrainingDatabase& db, const InterpOptions& interp) {
  RomModel rom;
  rom.ae = ae;
  rom.anchors = db.models();
  rom.interp = interp;
  return rom;
}

Eigen::MatrixXd predict_latent(const ParamPoint& mu, const RomModel& rom,
                               const DiscreteParamSpace& space, const FomConfig& fom) {
  if (rom.anchors.empty()) throw InvalidConfig("predict: model has no anchors");
  if (!space.contains(mu)) throw InvalidConfig("predict: parameter outside the parameter domain");
  const Eigen::VectorXd u0 = initial_state(mu, fom);
  const Eigen::VectorXd z0 = encode(u0, rom.ae.encoder);
  const std::size_t k = std::min(rom.interp.k, rom.anchors.size());
  const DiModel di = interpolate_coeffs(mu, rom.anchors, k, rom.interp.power, space);
  return integrate_latent(z0, di, fom.dt, fom.n_steps());
}

Trajectory predict(const ParamPoint& mu, const RomModel& rom, const DiscreteParamSpace& space,
                   const FomConfig& fom) {
  Trajectory out;
  out.mu = mu;
  out.dt = fom.dt;
  out.snapshots = forward(rom.ae.decoder, predict_latent(mu, rom, space, fom));
  return out;
}

double max_relative_error(const Trajectory& reference, const Trajectory& approx) {
  if (reference.snapshots.rows() != approx.snapshots.rows() ||
      reference.snapshots.cols() != approx.snapshots.cols()) {
    throw DimensionMismatch("max_relative_error: trajectory shapes differ");
  }
  double worst = 0.0;
  for (Eigen::Index n = 0; n < reference.snapshots.cols(); ++n) {
    const double denom = std::max(reference.snapshots.col(n).norm(), 1e-12);
    const double err = (approx.snapshots.col(n) - reference.snapshots.col(n)).norm() / denom;
    if (std::isnan(err)) return err;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace glasdi
