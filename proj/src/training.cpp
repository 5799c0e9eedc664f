#include "glasdi/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "glasdi/errors.hpp"
#include "glasdi/log.hpp"
#include "glasdi/random.hpp"

namespace glasdi {

namespace {

// Upper bound on columns per chunk in full-pass evaluations.
constexpr std::size_t kEvalChunk = 256;

std::vector<SnapshotRef> all_snapshots(const TrainingDatabase& db) {
  std::vector<SnapshotRef> refs;
  refs.reserve(db.snapshot_count());
  for (std::size_t e = 0; e < db.entries.size(); ++e) {
    for (std::size_t s = 0; s < db.entries[e].trajectory.n_snapshots(); ++s) refs.push_back({e, s});
  }
  return refs;
}

void add(LossBreakdown& acc, const LossBreakdown& x, double scale = 1.0) {
  acc.total += scale * x.total;
  acc.recon += scale * x.recon;
  acc.zdot += scale * x.zdot;
  acc.udot += scale * x.udot;
}

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.total) && std::isfinite(l.recon) && std::isfinite(l.zdot) &&
         std::isfinite(l.udot);
}

}  // namespace

void Autoencoder::validate() const {
  encoder.validate();
  decoder.validate();
  if (decoder.input_size() != encoder.output_size()) {
    throw DimensionMismatch("decoder input size differs from encoder latent size");
  }
  if (decoder.output_size() != encoder.input_size()) {
    throw DimensionMismatch("decoder output size differs from encoder input size");
  }
}

Autoencoder init_autoencoder(const std::vector<std::size_t>& encoder_sizes, Activation activation,
                             std::uint64_t seed) {
  std::vector<std::size_t> decoder_sizes(encoder_sizes.rbegin(), encoder_sizes.rend());
  Autoencoder ae;
  ae.encoder = init_mlp(encoder_sizes, activation, mix_seed(seed, 0));
  ae.decoder = init_mlp(decoder_sizes, activation, mix_seed(seed, 1));
  return ae;
}

void pin_decoder_rows(Autoencoder& ae, const std::vector<std::size_t>& rows) {
  auto& w = ae.decoder.weights.back();
  auto& b = ae.decoder.biases.back();
  for (auto r : rows) {
    if (r >= static_cast<std::size_t>(w.rows())) throw DimensionMismatch("pinned row out of range");
    w.row(static_cast<Eigen::Index>(r)).setZero();
    b[static_cast<Eigen::Index>(r)] = 0.0;
  }
}

std::size_t TrainingDatabase::snapshot_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.trajectory.n_snapshots();
  return n;
}

std::vector<ParamPoint> TrainingDatabase::params() const {
  std::vector<ParamPoint> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.mu);
  return out;
}

std::vector<DiModel> TrainingDatabase::models() const {
  std::vector<DiModel> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.di);
  return out;
}

void TrainingDatabase::validate(const Autoencoder& ae) const {
  ae.validate();
  const auto n_u = static_cast<Eigen::Index>(ae.state_size());
  const auto n_z = static_cast<Eigen::Index>(ae.latent_dim());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto& t = e.trajectory;
    if (t.snapshots.rows() != n_u) {
      throw DimensionMismatch("entry " + std::to_string(i) + ": state size differs from autoencoder");
    }
    if (!t.has_derivatives() || t.derivatives.rows() != n_u ||
        t.derivatives.cols() != t.snapshots.cols()) {
      throw DimensionMismatch("entry " + std::to_string(i) + ": missing or misshaped derivatives");
    }
    const auto nb = static_cast<Eigen::Index>(e.di.spec.n_basis(static_cast<std::size_t>(n_z)));
    if (e.di.xi.rows() != nb || e.di.xi.cols() != n_z) {
      throw DimensionMismatch("entry " + std::to_string(i) + ": Xi shape mismatch");
    }
    if (i > 0) {
      const auto& t0 = entries[0].trajectory;
      if (t.dt != t0.dt || t.n_snapshots() != t0.n_snapshots()) {
        throw DimensionMismatch("entries do not share dt and snapshot count");
      }
    }
  }
}

GradientSet GradientSet::zeros_like(const Autoencoder& ae, const TrainingDatabase& db) {
  GradientSet g;
  g.encoder = MlpGradients::zeros_like(ae.encoder);
  g.decoder = MlpGradients::zeros_like(ae.decoder);
  for (const auto& e : db.entries) {
    g.xi.push_back(Eigen::MatrixXd::Zero(e.di.xi.rows(), e.di.xi.cols()));
  }
  return g;
}

void GradientSet::set_zero() {
  encoder.set_zero();
  decoder.set_zero();
  for (auto& x : xi) x.setZero();
}

LossBreakdown accumulate_batch(const TrainingDatabase& db, const Autoencoder& ae,
                               const LossWeights& weights, std::span<const SnapshotRef> batch,
                               double normalizer, GradientSet* grads) {
  LossBreakdown loss;
  if (batch.empty()) return loss;
  const auto n_u = static_cast<Eigen::Index>(ae.state_size());
  const auto b = static_cast<Eigen::Index>(batch.size());
  const bool dynamics = weights.beta_zdot != 0.0 || weights.beta_udot != 0.0;

  Eigen::MatrixXd u(n_u, b);
  Eigen::MatrixXd udot;
  if (dynamics) udot.resize(n_u, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const auto& ref = batch[static_cast<std::size_t>(c)];
    const auto& traj = db.entries.at(ref.entry).trajectory;
    const auto s = static_cast<Eigen::Index>(ref.snapshot);
    u.col(c) = traj.snapshots.col(s);
    if (dynamics) udot.col(c) = traj.derivatives.col(s);
  }

  const DualTape enc = forward_dual(ae.encoder, u, udot);
  const Eigen::MatrixXd& z = enc.value();

  Eigen::MatrixXd zdot_hat;
  std::vector<Eigen::VectorXd> thetas;
  if (dynamics) {
    zdot_hat.resize(z.rows(), b);
    thetas.reserve(batch.size());
    for (Eigen::Index c = 0; c < b; ++c) {
      const DiModel& di = db.entries[batch[static_cast<std::size_t>(c)].entry].di;
      thetas.push_back(basis(z.col(c), di.spec));
      zdot_hat.col(c) = di.xi.transpose() * thetas.back();
    }
  }

  const DualTape dec = forward_dual(ae.decoder, z, zdot_hat);
  const Eigen::MatrixXd recon_diff = dec.value() - u;
  loss.recon = recon_diff.squaredNorm() / normalizer;
  Eigen::MatrixXd zdot_diff, udot_diff;
  if (dynamics) {
    zdot_diff = enc.tangent() - zdot_hat;  // zdot - zdothat
    udot_diff = dec.tangent() - udot;      // udothat - udot
    loss.zdot = zdot_diff.squaredNorm() / normalizer;
    loss.udot = udot_diff.squaredNorm() / normalizer;
  }
  loss.total = loss.recon + weights.beta_zdot * loss.zdot + weights.beta_udot * loss.udot;
  if (grads == nullptr) return loss;

  const Eigen::MatrixXd g_uhat = (2.0 / normalizer) * recon_diff;
  Eigen::MatrixXd g_udothat;
  if (dynamics) g_udothat = (2.0 * weights.beta_udot / normalizer) * udot_diff;
  InputAdjoint dec_adj = backward_dual(ae.decoder, dec, g_uhat, g_udothat, grads->decoder, true);

  Eigen::MatrixXd g_z = std::move(dec_adj.value);
  Eigen::MatrixXd g_zdot;
  if (dynamics) {
    Eigen::MatrixXd g_zdothat = std::move(dec_adj.tangent);
    g_zdothat -= (2.0 * weights.beta_zdot / normalizer) * zdot_diff;
    g_zdot = (2.0 * weights.beta_zdot / normalizer) * zdot_diff;
    for (Eigen::Index c = 0; c < b; ++c) {
      const std::size_t e = batch[static_cast<std::size_t>(c)].entry;
      const DiModel& di = db.entries[e].di;
      const auto& theta = thetas[static_cast<std::size_t>(c)];
      grads->xi.at(e).noalias() += theta * g_zdothat.col(c).transpose();
      g_z.col(c) += basis_vjp(z.col(c), di.xi * g_zdothat.col(c), di.spec);
    }
  }
  backward_dual(ae.encoder, enc, g_z, g_zdot, grads->encoder, false);
  return loss;
}

LossBreakdown total_loss(const TrainingDatabase& db, const Autoencoder& ae,
                         const LossWeights& weights) {
  if (db.entries.empty()) throw InvalidConfig("total_loss: empty training database");
  db.validate(ae);
  const auto refs = all_snapshots(db);
  const double norm = static_cast<double>(refs.size());
  LossBreakdown loss;
  for (std::size_t start = 0; start < refs.size(); start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, refs.size() - start);
    add(loss, accumulate_batch(db, ae, weights, std::span(refs).subspan(start, len), norm, nullptr));
  }
  return loss;
}

LossBreakdown gradients(const TrainingDatabase& db, const Autoencoder& ae,
                        const LossWeights& weights, GradientSet& out) {
  if (db.entries.empty()) throw InvalidConfig("gradients: empty training database");
  db.validate(ae);
  out = GradientSet::zeros_like(ae, db);
  const auto refs = all_snapshots(db);
  const double norm = static_cast<double>(refs.size());
  LossBreakdown loss;
  for (std::size_t start = 0; start < refs.size(); start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, refs.size() - start);
    add(loss, accumulate_batch(db, ae, weights, std::span(refs).subspan(start, len), norm, &out));
  }
  return loss;
}

void adam_step(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, AdamState& state) {
  if (params.size() != grads.size()) throw DimensionMismatch("adam_step: block count mismatch");
  if (state.slots.size() > params.size()) {
    throw DimensionMismatch("adam_step: fewer parameter blocks than optimizer slots");
  }
  const AdamConfig& cfg = state.config;
  while (state.slots.size() < params.size()) {
    const auto n = static_cast<Eigen::Index>(params[state.slots.size()].size());
    state.slots.push_back({Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0});
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& slot = state.slots[i];
    const auto n = static_cast<Eigen::Index>(params[i].size());
    if (grads[i].size() != params[i].size() || slot.m.size() != n) {
      throw DimensionMismatch("adam_step: block " + std::to_string(i) + " changed shape");
    }
    Eigen::Map<Eigen::ArrayXd> p(params[i].data(), n);
    Eigen::Map<const Eigen::ArrayXd> g(grads[i].data(), n);
    slot.step += 1;
    const double t = static_cast<double>(slot.step);
    slot.m.array() = cfg.beta1 * slot.m.array() + (1.0 - cfg.beta1) * g;
    slot.v.array() = cfg.beta2 * slot.v.array() + (1.0 - cfg.beta2) * g.square();
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    p -= cfg.lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + cfg.eps);
  }
}

namespace {

template <typename Net, typename Span, typename Fn>
void push_mlp(Net& net, std::vector<Span>& out, Fn&& make) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    out.push_back(make(net.weights[l]));
    out.push_back(make(net.biases[l]));
  }
}

}  // namespace

std::vector<std::span<double>> parameter_views(Autoencoder& ae, TrainingDatabase& db,
                                               bool include_xi) {
  std::vector<std::span<double>> out;
  auto make = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
  push_mlp(ae.encoder, out, make);
  push_mlp(ae.decoder, out, make);
  if (include_xi) {
    for (auto& e : db.entries) out.push_back(make(e.di.xi));
  }
  return out;
}

std::vector<std::span<const double>> gradient_views(const GradientSet& g, bool include_xi) {
  std::vector<std::span<const double>> out;
  auto make = [](const auto& m) {
    return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
  };
  push_mlp(g.encoder, out, make);
  push_mlp(g.decoder, out, make);
  if (include_xi) {
    for (const auto& x : g.xi) out.push_back(make(x));
  }
  return out;
}

std::vector<LossBreakdown> train_epochs(TrainingDatabase& db, Autoencoder& ae, AdamState& state,
                                        std::size_t n_epochs, const TrainOptions& options,
                                        std::uint64_t seed) {
  std::vector<LossBreakdown> history;
  if (n_epochs == 0) return history;
  if (db.entries.empty()) throw InvalidConfig("train_epochs: empty training database");
  db.validate(ae);
  history.reserve(n_epochs);

  auto refs = all_snapshots(db);
  const std::size_t batch = options.batch_size == 0 ? refs.size() : options.batch_size;
  GradientSet grads = GradientSet::zeros_like(ae, db);

  for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
    if (options.batch_size != 0) {
      Rng rng(mix_seed(seed, epoch));
      for (std::size_t i = refs.size(); i > 1; --i) {
        std::swap(refs[i - 1], refs[uniform_index(rng, i)]);
      }
    }
    LossBreakdown epoch_loss;
    for (std::size_t start = 0; start < refs.size(); start += batch) {
      const std::size_t len = std::min(batch, refs.size() - start);
      grads.set_zero();
      const LossBreakdown l = accumulate_batch(db, ae, options.weights,
                                               std::span(refs).subspan(start, len),
                                               static_cast<double>(len), &grads);
      if (!finite(l)) {
        throw Divergence("training loss became non-finite in epoch " + std::to_string(epoch),
                         epoch);
      }
      add(epoch_loss, l, static_cast<double>(len) / static_cast<double>(refs.size()));
      adam_step(parameter_views(ae, db, options.train_xi), gradient_views(grads, options.train_xi),
                state);
    }
    history.push_back(epoch_loss);
  }
  return history;
}

Eigen::MatrixXd fit_di_least_squares(const Eigen::MatrixXd& z, const Eigen::MatrixXd& zdot,
                                     const BasisSpec& spec, double ridge, bool* regularized) {
  if (z.rows() != zdot.rows() || z.cols() != zdot.cols()) {
    throw DimensionMismatch("fit_di_least_squares: Z and Zdot shapes differ");
  }
  const auto n_b = static_cast<Eigen::Index>(spec.n_basis(static_cast<std::size_t>(z.rows())));
  Eigen::MatrixXd theta(z.cols(), n_b);
  for (Eigen::Index n = 0; n < z.cols(); ++n) theta.row(n) = basis(z.col(n), spec).transpose();
  const Eigen::MatrixXd target = zdot.transpose();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(theta);
  if (qr.rank() == n_b) {
    if (regularized != nullptr) *regularized = false;
    return qr.solve(target);
  }
  if (regularized != nullptr) *regularized = true;
  log_warn("rank-deficient latent library (rank " + std::to_string(qr.rank()) + " of " +
           std::to_string(n_b) + "); using ridge-regularized least squares");
  Eigen::MatrixXd gram = theta.transpose() * theta;
  gram.diagonal().array() += ridge;
  return gram.ldlt().solve(theta.transpose() * target);
}

LasdiReport train_lasdi_baseline(TrainingDatabase& db, Autoencoder& ae, AdamState& state,
                                 const LasdiOptions& options, std::uint64_t seed) {
  LasdiReport report;
  TrainOptions stage1;
  stage1.weights = {0.0, 0.0};
  stage1.batch_size = options.batch_size;
  stage1.train_xi = false;
  report.loss_history = train_epochs(db, ae, state, options.n_epochs, stage1, seed);

  for (auto& entry : db.entries) {
    const auto& traj = entry.trajectory;
    const Eigen::MatrixXd z = forward(ae.encoder, traj.snapshots);
    const Eigen::MatrixXd zdot = jvp(ae.encoder, traj.snapshots, traj.derivatives);
    bool reg = false;
    entry.di.xi = fit_di_least_squares(z, zdot, entry.di.spec, options.ridge, &reg);
    if (reg) ++report.regularized_fits;
  }
  return report;
}

}  // namespace glasdi
