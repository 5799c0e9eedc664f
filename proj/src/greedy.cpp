#include "glasdi/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "glasdi/errors.hpp"
#include "glasdi/log.hpp"

namespace glasdi {

std::vector<std::size_t> indicator_indices(std::size_t n_steps, const IndicatorOptions& opts) {
  if (!(opts.n_ts_fraction > 0.0 && opts.n_ts_fraction <= 1.0)) {
    throw InvalidConfig("n_ts_fraction must lie in (0, 1]");
  }
  if (n_steps == 0) return {};
  const auto n_ts = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(opts.n_ts_fraction * static_cast<double>(n_steps))),
      1, n_steps);
  std::vector<std::size_t> idx(n_ts);
  if (opts.window == IndicatorWindow::Head) {
    std::iota(idx.begin(), idx.end(), std::size_t{1});
  } else {
    const std::size_t stride = n_steps / n_ts;
    for (std::size_t k = 0; k < n_ts; ++k) idx[k] = (k + 1) * stride;
  }
  return idx;
}

namespace {

double indicator_from_columns(const Eigen::MatrixXd& cols, const std::vector<std::size_t>& idx,
                              const FomConfig& fom) {
  // cols holds (uhat_{n-1}, uhat_n) pairs for each evaluated level n.
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(2 * k);
    sum += residual(cols.col(c + 1), cols.col(c), fom).norm();
  }
  return sum / static_cast<double>(idx.size() + 1);
}

}  // namespace

double residual_indicator(const Trajectory& uhat, const FomConfig& fom,
                          const IndicatorOptions& opts) {
  if (uhat.n_snapshots() < 2) throw InvalidConfig("residual_indicator: need at least two levels");
  const auto idx = indicator_indices(uhat.n_snapshots() - 1, opts);
  Eigen::MatrixXd cols(uhat.snapshots.rows(), static_cast<Eigen::Index>(2 * idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    cols.col(static_cast<Eigen::Index>(2 * k)) = uhat.snapshots.col(static_cast<Eigen::Index>(idx[k] - 1));
    cols.col(static_cast<Eigen::Index>(2 * k + 1)) = uhat.snapshots.col(static_cast<Eigen::Index>(idx[k]));
  }
  return indicator_from_columns(cols, idx, fom);
}

double error_indicator(const ParamPoint& mu, const RomModel& rom, const DiscreteParamSpace& space,
                       const FomConfig& fom, const IndicatorOptions& opts) {
  Eigen::MatrixXd z;
  try {
    z = predict_latent(mu, rom, space, fom);
  } catch (const Divergence& e) {
    log_warn(std::string("ROM diverged while scoring a candidate: ") + e.what());
    return std::numeric_limits<double>::infinity();
  }
  const auto idx = indicator_indices(fom.n_steps(), opts);
  Eigen::MatrixXd zsel(z.rows(), static_cast<Eigen::Index>(2 * idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    zsel.col(static_cast<Eigen::Index>(2 * k)) = z.col(static_cast<Eigen::Index>(idx[k] - 1));
    zsel.col(static_cast<Eigen::Index>(2 * k + 1)) = z.col(static_cast<Eigen::Index>(idx[k]));
  }
  const double value = indicator_from_columns(forward(rom.ae.decoder, zsel), idx, fom);
  return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
}

ErrorFit fit_error_model(std::span<const double> e_res, std::span<const double> e_max) {
  if (e_res.size() != e_max.size()) throw DimensionMismatch("fit_error_model: length mismatch");
  if (e_res.empty()) throw InvalidConfig("fit_error_model: no points");
  const auto n = static_cast<double>(e_res.size());
  const double mx = std::accumulate(e_res.begin(), e_res.end(), 0.0) / n;
  const double my = std::accumulate(e_max.begin(), e_max.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < e_res.size(); ++i) {
    sxx += (e_res[i] - mx) * (e_res[i] - mx);
    sxy += (e_res[i] - mx) * (e_max[i] - my);
  }
  // Spread below rounding noise of the mean counts as no spread.
  const double floor = n * std::pow(1e-12 * std::abs(mx), 2);
  ErrorFit fit;
  if (e_res.size() < 2 || !(sxx > floor) || !std::isfinite(sxx)) {
    log_warn("error model fit is degenerate; using the mean max error");
    fit.degenerate = true;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double estimate_max_error(const ErrorFit& fit, double e_res) {
  return std::max(0.0, fit.slope * e_res + fit.intercept);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("pearson_correlation: length mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() < 2) return nan;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return nan;
  }
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return nan;
  return sxy / std::sqrt(sxx * syy);
}

void GreedyConfig::validate() const {
  if (n_target == 0) throw InvalidConfig("greedy n_target must be positive");
  if (subset_size == 0) throw InvalidConfig("greedy subset_size must be positive");
  if (!(indicator.n_ts_fraction > 0.0 && indicator.n_ts_fraction <= 1.0)) {
    throw InvalidConfig("n_ts_fraction must lie in (0, 1]");
  }
}

ParamPoint select_sample(GreedyState& state, const DiscreteParamSpace& space,
                         const GreedyConfig& cfg, const IndicatorFn& indicator,
                         AuditRecord* record) {
  std::vector<bool> taken(space.size(), false);
  for (auto i : state.sampled_indices) taken.at(i) = true;
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!taken[i]) remaining.push_back(i);
  }
  if (remaining.empty()) throw ExhaustedSpace("every grid point has already been sampled");

  const std::size_t m = std::min(cfg.subset_size, remaining.size());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + uniform_index(state.rng, remaining.size() - i);
    std::swap(remaining[i], remaining[j]);
  }
  remaining.resize(m);

  std::vector<double> scores(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = indicator(space.point(remaining[i]));
    scores[i] = std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && remaining[i] < remaining[best])) {
      best = i;
    }
  }
  if (record != nullptr) {
    record->subset = remaining;
    record->indicators = scores;
    record->selected_index = remaining[best];
    record->selected = space.point(remaining[best]);
  }
  return space.point(remaining[best]);
}

TrainingErrors training_errors(const RomModel& rom, const TrainingDatabase& db,
                               const DiscreteParamSpace& space, const FomConfig& fom,
                               const IndicatorOptions& opts) {
  TrainingErrors out;
  for (const auto& entry : db.entries) {
    double res = std::numeric_limits<double>::infinity();
    double err = std::numeric_limits<double>::infinity();
    try {
      const Trajectory uhat = predict(entry.mu, rom, space, fom);
      res = residual_indicator(uhat, fom, opts);
      err = max_relative_error(entry.trajectory, uhat);
    } catch (const Divergence& e) {
      log_warn(std::string("ROM diverged on a training sample: ") + e.what());
    }
    out.e_res.push_back(res);
    out.e_max.push_back(err);
  }
  return out;
}

GreedyResult greedy_train(const DiscreteParamSpace& space, const FomConfig& fom,
                          const ModelSettings& model, const TrainOptions& train,
                          const AdamConfig& adam, const GreedyConfig& cfg, std::uint64_t seed,
                          const GreedyHooks& hooks) {
  cfg.validate();
  fom.validate();
  model.basis.validate();
  if (model.encoder_sizes.empty() || model.encoder_sizes.front() != fom.state_size()) {
    throw InvalidConfig("encoder input size must equal 2*nx*ny = " +
                        std::to_string(fom.state_size()));
  }
  const FomSolver solver =
      hooks.solver ? hooks.solver : [&fom](const ParamPoint& mu) { return simulate(mu, fom); };

  GreedyResult result{init_autoencoder(model.encoder_sizes, model.activation, mix_seed(seed, 1)),
                      GreedyState(mix_seed(seed, 3)), {}, model.interp};
  GreedyState& state = result.state;
  Autoencoder& ae = result.ae;
  if (model.pin_boundary) pin_decoder_rows(ae, boundary_indices(fom));
  const std::size_t n_z = ae.latent_dim();

  auto add_sample = [&](const ParamPoint& mu) {
    const auto index = space.index_of(mu);
    if (!index) throw InvalidConfig("sample is not a grid point");
    if (std::find(state.sampled_indices.begin(), state.sampled_indices.end(), *index) !=
        state.sampled_indices.end()) {
      throw InvalidConfig("duplicate sample");
    }
    TrainingEntry entry;
    entry.mu = mu;
    entry.trajectory = solver(mu);
    if (state.db.entries.empty()) {
      entry.di.xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.basis.n_basis(n_z)),
                                          static_cast<Eigen::Index>(n_z));
      entry.di.spec = model.basis;
    } else {
      const auto models = state.db.models();
      entry.di = interpolate_coeffs(mu, models, std::min(model.interp.k, models.size()),
                                    model.interp.power, space);
    }
    entry.di.owner_mu = mu;
    state.db.entries.push_back(std::move(entry));
    state.sampled.push_back(mu);
    state.sampled_indices.push_back(*index);
  };

  const std::vector<ParamPoint> initial =
      cfg.center_start ? std::vector<ParamPoint>{center_point(space)} : corner_points(space);
  if (cfg.n_target < initial.size()) {
    throw InvalidConfig("n_target is smaller than the initial sample set");
  }
  for (const auto& mu : initial) add_sample(mu);

  AdamState optimizer{adam, {}};
  auto append_history = [&](const std::vector<LossBreakdown>& h) {
    result.loss_history.insert(result.loss_history.end(), h.begin(), h.end());
  };

  std::size_t round = 0;
  while (true) {
    append_history(train_epochs(state.db, ae, optimizer, cfg.n_epochs_between, train,
                                mix_seed(seed, 1000 + round)));
    if (state.sampled.size() >= cfg.n_target) break;

    const RomModel rom = make_rom(ae, state.db, model.interp);
    TrainingErrors errs = training_errors(rom, state.db, space, fom, cfg.indicator);
    state.fit = fit_error_model(errs.e_res, errs.e_max);
    const double max_res = *std::max_element(errs.e_res.begin(), errs.e_res.end());
    const double estimate = estimate_max_error(state.fit, max_res);
    state.e_res_history.push_back(errs.e_res);
    state.e_max_history.push_back(errs.e_max);
    log_info("greedy round " + std::to_string(round + 1) + ": " +
             std::to_string(state.sampled.size()) + " samples, estimated max error " +
             std::to_string(estimate));
    if (cfg.tol > 0.0 && estimate <= cfg.tol) break;

    AuditRecord rec;
    rec.iteration = round + 1;
    rec.e_res = std::move(errs.e_res);
    rec.e_max = std::move(errs.e_max);
    rec.fit = state.fit;
    rec.estimated_max_error = estimate;
    const ParamPoint next = select_sample(
        state, space, cfg,
        [&](const ParamPoint& mu) { return error_indicator(mu, rom, space, fom, cfg.indicator); },
        &rec);
    add_sample(next);
    state.audit.push_back(std::move(rec));
    ++round;
    if (hooks.on_iteration) hooks.on_iteration(state, ae);
  }

  append_history(train_epochs(state.db, ae, optimizer, cfg.n_epochs_final, train,
                              mix_seed(seed, 999'999)));

  const TrainingErrors final_errs =
      training_errors(make_rom(ae, state.db, model.interp), state.db, space, fom, cfg.indicator);
  state.final_e_res = final_errs.e_res;
  state.final_e_max = final_errs.e_max;
  state.final_fit = fit_error_model(final_errs.e_res, final_errs.e_max);
  return result;
}

}  // namespace glasdi
