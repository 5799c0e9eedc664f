#pragma once

#include <cstdint>
#include <vector>

#include "glasdi/random.hpp"
#include "glasdi/training.hpp"

namespace fixture {

/// Autoencoder n_u -> hidden -> n_z -> hidden -> n_u with random biases, and
/// one database entry per parameter holding random snapshots/derivatives and
/// a random Xi.
struct Tiny {
  glasdi::Autoencoder ae;
  glasdi::TrainingDatabase db;
};

inline Tiny tiny_instance(std::size_t n_u, std::size_t n_z, std::size_t n_snap,
                          std::size_t n_entries, std::uint64_t seed,
                          glasdi::BasisSpec spec = {}, std::size_t hidden = 5) {
  using namespace glasdi;
  Tiny t;
  t.ae = init_autoencoder({n_u, hidden, n_z}, Activation::Tanh, seed);
  Rng rng(mix_seed(seed, 77));
  for (auto* net : {&t.ae.encoder, &t.ae.decoder}) {
    for (auto& b : net->biases)
      for (auto& v : b) v = uniform(rng, -0.3, 0.3);
  }
  for (std::size_t e = 0; e < n_entries; ++e) {
    TrainingEntry entry;
    entry.mu = ParamPoint{{0.1 * static_cast<double>(e), 1.0}};
    entry.trajectory.mu = entry.mu;
    entry.trajectory.dt = 0.1;
    entry.trajectory.snapshots.resize(static_cast<Eigen::Index>(n_u), static_cast<Eigen::Index>(n_snap));
    entry.trajectory.derivatives.resize(static_cast<Eigen::Index>(n_u), static_cast<Eigen::Index>(n_snap));
    for (auto& v : entry.trajectory.snapshots.reshaped()) v = uniform(rng, -1.0, 1.0);
    for (auto& v : entry.trajectory.derivatives.reshaped()) v = uniform(rng, -1.0, 1.0);
    entry.di.spec = spec;
    entry.di.owner_mu = entry.mu;
    entry.di.xi.resize(static_cast<Eigen::Index>(spec.n_basis(n_z)), static_cast<Eigen::Index>(n_z));
    for (auto& v : entry.di.xi.reshaped()) v = uniform(rng, -0.5, 0.5);
    t.db.entries.push_back(std::move(entry));
  }
  return t;
}

/// Flattened copy of every trainable value in canonical order.
inline std::vector<double> flatten(glasdi::Autoencoder& ae, glasdi::TrainingDatabase& db) {
  std::vector<double> out;
  for (auto view : glasdi::parameter_views(ae, db, true)) out.insert(out.end(), view.begin(), view.end());
  return out;
}

}  // namespace fixture
