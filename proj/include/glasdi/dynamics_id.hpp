#pragma once

// Latent dynamics identification: zdot = Theta(z) Xi, where Theta is a
// polynomial (optionally trigonometric) library and each sampled parameter
// owns its own coefficient matrix Xi. Coefficients at unseen parameters are
// obtained by inverse-distance (Shepard) interpolation over the k nearest
// anchors in the Mahalanobis metric.
//
// Library ordering: [1, z_1..z_n, z_i z_j for i <= j (lexicographic),
//                    sin z_1, cos z_1, ..., sin z_n, cos z_n]

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "glasdi/param_space.hpp"

namespace glasdi {

struct BasisSpec {
  int poly_order = 1;
  bool include_trig = false;

  std::size_t n_basis(std::size_t latent_dim) const;
  void validate() const;
  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

struct DiModel {
  /// n_basis x N_z.
  Eigen::MatrixXd xi;
  BasisSpec spec;
  ParamPoint owner_mu;

  std::size_t latent_dim() const { return static_cast<std::size_t>(xi.cols()); }
};

Eigen::VectorXd basis(const Eigen::VectorXd& z, const BasisSpec& spec);

/// sum_b adj[b] * dTheta_b/dz, i.e. (dTheta/dz)^T adj.
Eigen::VectorXd basis_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& adj,
                          const BasisSpec& spec);

Eigen::VectorXd latent_rhs(const Eigen::VectorXd& z, const DiModel& model);

/// Classical RK4 with fixed step. Returns N_z x (n_steps+1); throws
/// Divergence carrying the step index on a non-finite state.
Eigen::MatrixXd integrate_latent(const Eigen::VectorXd& z0, const DiModel& model, double dt,
                                 std::size_t n_steps);

struct Neighbors {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
};

/// k smallest Mahalanobis distances; ties go to the lower anchor index.
Neighbors knn_neighbors(const ParamPoint& mu, const std::vector<ParamPoint>& anchors,
                        std::size_t k, const Eigen::MatrixXd& cov_inv);
Neighbors knn_neighbors(const ParamPoint& mu, const std::vector<ParamPoint>& anchors,
                        std::size_t k, const DiscreteParamSpace& space);

/// Distances below this count as an exact hit in shepard_weights.
inline constexpr double kExactHitDistance = 1e-12;

/// Inverse-distance weights d_i^-p / sum_j d_j^-p.
std::vector<double> shepard_weights(const std::vector<double>& distances, double power);

/// Convex combination of the k nearest anchors' Xi. Returns a model owned
/// by `mu`.
DiModel interpolate_coeffs(const ParamPoint& mu, const std::vector<DiModel>& models,
                           std::size_t k, double power, const Eigen::MatrixXd& cov_inv);
DiModel interpolate_coeffs(const ParamPoint& mu, const std::vector<DiModel>& models,
                           std::size_t k, double power, const DiscreteParamSpace& space);

}  // namespace glasdi
