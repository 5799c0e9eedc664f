#include "glasdi/dynamics_id.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "glasdi/errors.hpp"

namespace glasdi {

std::size_t BasisSpec::n_basis(std::size_t n) const {
  std::size_t count = 1;
  if (poly_order >= 1) count += n;
  if (poly_order >= 2) count += n * (n + 1) / 2;
  if (include_trig) count += 2 * n;
  return count;
}

void BasisSpec::validate() const {
  if (poly_order < 0 || poly_order > 2) throw InvalidConfig("poly_order must be 0, 1 or 2");
}

Eigen::VectorXd basis(const Eigen::VectorXd& z, const BasisSpec& spec) {
  const auto n = z.size();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(spec.n_basis(static_cast<std::size_t>(n))));
  Eigen::Index b = 0;
  theta[b++] = 1.0;
  if (spec.poly_order >= 1) {
    for (Eigen::Index i = 0; i < n; ++i) theta[b++] = z[i];
  }
  if (spec.poly_order >= 2) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) theta[b++] = z[i] * z[j];
    }
  }
  if (spec.include_trig) {
    for (Eigen::Index i = 0; i < n; ++i) {
      theta[b++] = std::sin(z[i]);
      theta[b++] = std::cos(z[i]);
    }
  }
  return theta;
}

Eigen::VectorXd basis_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& adj,
                          const BasisSpec& spec) {
  const auto n = z.size();
  if (adj.size() != static_cast<Eigen::Index>(spec.n_basis(static_cast<std::size_t>(n)))) {
    throw DimensionMismatch("basis_vjp: adjoint length does not match library size");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  Eigen::Index b = 1;
  if (spec.poly_order >= 1) {
    for (Eigen::Index i = 0; i < n; ++i) g[i] += adj[b++];
  }
  if (spec.poly_order >= 2) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        g[i] += adj[b] * z[j];
        g[j] += adj[b] * z[i];
        ++b;
      }
    }
  }
  if (spec.include_trig) {
    for (Eigen::Index i = 0; i < n; ++i) {
      g[i] += adj[b++] * std::cos(z[i]);
      g[i] -= adj[b++] * std::sin(z[i]);
    }
  }
  return g;
}

Eigen::VectorXd latent_rhs(const Eigen::VectorXd& z, const DiModel& model) {
  const auto nb = static_cast<Eigen::Index>(model.spec.n_basis(static_cast<std::size_t>(z.size())));
  if (model.xi.rows() != nb || model.xi.cols() != z.size()) {
    throw DimensionMismatch("latent_rhs: Xi is " + std::to_string(model.xi.rows()) + "x" +
                            std::to_string(model.xi.cols()) + ", expected " +
                            std::to_string(nb) + "x" + std::to_string(z.size()));
  }
  return model.xi.transpose() * basis(z, model.spec);
}

Eigen::MatrixXd integrate_latent(const Eigen::VectorXd& z0, const DiModel& model, double dt,
                                 std::size_t n_steps) {
  Eigen::MatrixXd out(z0.size(), static_cast<Eigen::Index>(n_steps + 1));
  out.col(0) = z0;
  Eigen::VectorXd z = z0;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const Eigen::VectorXd k1 = latent_rhs(z, model);
    const Eigen::VectorXd k2 = latent_rhs(z + 0.5 * dt * k1, model);
    const Eigen::VectorXd k3 = latent_rhs(z + 0.5 * dt * k2, model);
    const Eigen::VectorXd k4 = latent_rhs(z + dt * k3, model);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) {
      throw Divergence("latent integration produced a non-finite state at step " +
                           std::to_string(n),
                       n);
    }
    out.col(static_cast<Eigen::Index>(n)) = z;
  }
  return out;
}

Neighbors knn_neighbors(const ParamPoint& mu, const std::vector<ParamPoint>& anchors,
                        std::size_t k, const Eigen::MatrixXd& cov_inv) {
  if (anchors.empty()) throw InvalidConfig("knn_neighbors: no anchors");
  if (k < 1 || k > anchors.size()) {
    throw InvalidConfig("knn_neighbors: k must be in [1, " + std::to_string(anchors.size()) + "]");
  }
  std::vector<double> dist(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    dist[i] = mahalanobis_distance(mu, anchors[i], cov_inv);
  }
  std::vector<std::size_t> order(anchors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  Neighbors nb;
  for (std::size_t i = 0; i < k; ++i) {
    nb.indices.push_back(order[i]);
    nb.distances.push_back(dist[order[i]]);
  }
  return nb;
}

Neighbors knn_neighbors(const ParamPoint& mu, const std::vector<ParamPoint>& anchors,
                        std::size_t k, const DiscreteParamSpace& space) {
  return knn_neighbors(mu, anchors, k, space.cov_inv());
}

std::vector<double> shepard_weights(const std::vector<double>& distances, double power) {
  if (distances.empty()) throw InvalidConfig("shepard_weights: no distances");
  std::size_t closest = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] >= 0.0)) throw InvalidConfig("shepard_weights: negative distance");
    if (distances[i] < distances[closest]) closest = i;
  }
  std::vector<double> w(distances.size(), 0.0);
  if (distances[closest] < kExactHitDistance) {
    w[closest] = 1.0;
    return w;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = std::pow(distances[i], -power);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

DiModel interpolate_coeffs(const ParamPoint& mu, const std::vector<DiModel>& models,
                           std::size_t k, double power, const Eigen::MatrixXd& cov_inv) {
  if (models.empty()) throw InvalidConfig("interpolate_coeffs: no models");
  const BasisSpec& spec = models.front().spec;
  std::vector<ParamPoint> anchors;
  anchors.reserve(models.size());
  for (const auto& m : models) {
    if (!(m.spec == spec)) throw InvalidConfig("interpolate_coeffs: mixed basis specs");
    if (m.xi.rows() != models.front().xi.rows() || m.xi.cols() != models.front().xi.cols()) {
      throw DimensionMismatch("interpolate_coeffs: coefficient shapes differ");
    }
    anchors.push_back(m.owner_mu);
  }
  const Neighbors nb = knn_neighbors(mu, anchors, k, cov_inv);
  const std::vector<double> w = shepard_weights(nb.distances, power);

  DiModel out;
  out.spec = spec;
  out.owner_mu = mu;
  if (nb.distances.front() < kExactHitDistance) {
    out.xi = models[nb.indices.front()].xi;
    return out;
  }
  out.xi = Eigen::MatrixXd::Zero(models.front().xi.rows(), models.front().xi.cols());
  for (std::size_t i = 0; i < nb.indices.size(); ++i) out.xi += w[i] * models[nb.indices[i]].xi;
  return out;
}

DiModel interpolate_coeffs(const ParamPoint& mu, const std::vector<DiModel>& models,
                           std::size_t k, double power, const DiscreteParamSpace& space) {
  return interpolate_coeffs(mu, models, k, power, space.cov_inv());
}

}  // namespace glasdi
