#include "glasdi/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "glasdi/checkpoint.hpp"
#include "glasdi/errors.hpp"
#include "glasdi/evaluation.hpp"
#include "glasdi/greedy.hpp"
#include "glasdi/log.hpp"
#include "glasdi/trajectory_io.hpp"

namespace glasdi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

void write_loss_csv(const fs::path& path, const std::vector<LossBreakdown>& history) {
  std::ostringstream out;
  out << "epoch,L,L_recon,L_zdot,L_udot\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& l = history[e];
    out << e << ',' << fmt(l.total) << ',' << fmt(l.recon) << ',' << fmt(l.zdot) << ','
        << fmt(l.udot) << '\n';
  }
  write_text(path, out.str());
}

// Config without filesystem locations, so model artifacts do not depend on
// where a run writes its output.
json portable_config(const RunConfig& cfg) {
  json c = config_to_json(cfg);
  c.erase("output_dir");
  c.erase("cache_dir");
  return c;
}

json fit_json(const ErrorFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"degenerate", fit.degenerate}};
}

json points_json(const std::vector<ParamPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(p.values);
  return out;
}

json loss_json(const LossBreakdown& l) {
  return {{"L", l.total}, {"L_recon", l.recon}, {"L_zdot", l.zdot}, {"L_udot", l.udot}};
}

json audit_json(const AuditRecord& r, const DiscreteParamSpace& space) {
  json subset_mu = json::array();
  for (auto i : r.subset) subset_mu.push_back(space.point(i).values);
  return {{"iteration", r.iteration},
          {"mu_star", r.selected.values},
          {"mu_star_index", r.selected_index},
          {"subset", r.subset},
          {"subset_mu", subset_mu},
          {"indicators", r.indicators},
          {"e_res", r.e_res},
          {"e_max", r.e_max},
          {"fit", fit_json(r.fit)},
          {"estimated_max_error", r.estimated_max_error}};
}

RomModel load_compatible(const RunConfig& cfg, const fs::path& checkpoint) {
  RomModel rom = load_checkpoint(checkpoint);
  if (rom.ae.state_size() != cfg.fom.state_size()) {
    throw InvalidConfig("checkpoint state size " + std::to_string(rom.ae.state_size()) +
                        " does not match 2*nx*ny = " + std::to_string(cfg.fom.state_size()));
  }
  for (const auto& a : rom.anchors) {
    if (a.owner_mu.dim() != cfg.bounds.size()) {
      throw InvalidConfig("checkpoint parameter dimension does not match the config");
    }
  }
  return rom;
}

void prepare_output_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "config.json", config_to_json(cfg).dump(2) + "\n");
}

}  // namespace

ParamPoint parse_mu(const std::string& text) {
  ParamPoint mu;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      mu.values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidConfig("cannot parse parameter '" + text + "' (expected e.g. 0.7,0.9)");
    }
  }
  if (mu.values.empty()) throw InvalidConfig("empty parameter");
  return mu;
}

std::vector<ParamPoint> uniform_training_grid(const DiscreteParamSpace& space,
                                              std::size_t grid_per_dim) {
  if (grid_per_dim < 2) throw InvalidConfig("uniform grid needs at least 2 points per dimension");
  std::vector<std::vector<std::size_t>> axis(space.dim());
  for (std::size_t d = 0; d < space.dim(); ++d) {
    const std::size_t res = space.resolution()[d];
    if (grid_per_dim > res) throw InvalidConfig("uniform grid is finer than the parameter grid");
    for (std::size_t k = 0; k < grid_per_dim; ++k) {
      axis[d].push_back(static_cast<std::size_t>(std::llround(
          static_cast<double>(k) * static_cast<double>(res - 1) / static_cast<double>(grid_per_dim - 1))));
    }
  }
  std::size_t total = 1;
  for (std::size_t d = 0; d < space.dim(); ++d) total *= grid_per_dim;
  std::vector<ParamPoint> out;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<std::size_t> multi(space.dim());
    std::size_t rest = flat;
    for (std::size_t d = space.dim(); d-- > 0;) {
      multi[d] = axis[d][rest % grid_per_dim];
      rest /= grid_per_dim;
    }
    out.push_back(space.point(space.flat_index(multi)));
  }
  return out;
}

void cmd_fom_run(const RunConfig& cfg, const ParamPoint& mu, const fs::path& out, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationStats stats;
  const Trajectory traj = simulate(mu, cfg.fom, &stats);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_trajectory(out, traj);
  log << "fom-run: " << traj.n_snapshots() << " snapshots of size " << traj.state_size()
      << ", " << stats.newton_iterations << " Newton iterations over " << stats.steps
      << " steps (mean " << fmt_short(static_cast<double>(stats.newton_iterations) /
                                 static_cast<double>(std::max<std::size_t>(stats.steps, 1)))
      << "), max final residual " << fmt_short(stats.max_final_residual) << ", " << fmt_short(secs)
      << " s -> " << out.string() << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  prepare_output_dir(cfg);
  const DiscreteParamSpace space = cfg.space();
  const FomCache cache(cfg.resolved_cache_dir(), cfg.fom);
  const fs::path ckpt = cfg.output_dir / "checkpoint.json";
  const fs::path audit_path = cfg.output_dir / "audit.jsonl";
  write_text(audit_path, "");

  GreedyHooks hooks;
  hooks.solver = [&cache](const ParamPoint& mu) { return cache(mu); };
  std::size_t audit_lines = 0;
  hooks.on_iteration = [&](const GreedyState& state, const Autoencoder& ae) {
    std::ofstream out(audit_path, std::ios::app);
    for (; audit_lines < state.audit.size(); ++audit_lines) {
      out << audit_json(state.audit[audit_lines], space).dump() << '\n';
    }
    save_checkpoint(ckpt, make_rom(ae, state.db, cfg.model.interp),
                    {{"method", "glasdi"}, {"config", portable_config(cfg)}, {"complete", false}});
    log << "train: round " << state.audit.size() << ", " << state.sampled.size()
        << " samples, last mu* = (" << fmt_short(state.sampled.back()[0]) << ", "
        << fmt_short(state.sampled.back()[1]) << ")\n";
  };

  const GreedyResult result = greedy_train(space, cfg.fom, cfg.model, cfg.train_options(),
                                           cfg.adam, cfg.greedy, cfg.seed, hooks);
  const GreedyState& state = result.state;
  save_checkpoint(ckpt, result.rom(),
                  {{"method", "glasdi"}, {"config", portable_config(cfg)}, {"complete", true}});
  write_loss_csv(cfg.output_dir / "loss.csv", result.loss_history);

  const double r = pearson_correlation(state.final_e_res, state.final_e_max);
  json summary = {
      {"method", "glasdi"},
      {"n_sampled", state.sampled.size()},
      {"greedy_iterations", state.audit.size()},
      {"sampled", points_json(state.sampled)},
      {"sampled_indices", state.sampled_indices},
      {"final_e_res", state.final_e_res},
      {"final_e_max", state.final_e_max},
      {"final_fit", fit_json(state.final_fit)},
      {"pearson_r", std::isfinite(r) ? json(r) : json(nullptr)},
      {"final_loss", result.loss_history.empty() ? json(nullptr) : loss_json(result.loss_history.back())},
      {"epochs", result.loss_history.size()},
  };
  write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  log << "train: " << state.sampled.size() << " samples after " << state.audit.size()
      << " greedy iterations; indicator/error correlation " << fmt_short(r) << '\n';
}

void cmd_train_lasdi(const RunConfig& cfg, std::ostream& log) {
  prepare_output_dir(cfg);
  const DiscreteParamSpace space = cfg.space();
  const FomCache cache(cfg.resolved_cache_dir(), cfg.fom);
  const auto params = uniform_training_grid(space, cfg.lasdi.grid_per_dim);

  Autoencoder ae = init_autoencoder(cfg.model.encoder_sizes, cfg.model.activation, mix_seed(cfg.seed, 1));
  if (cfg.model.pin_boundary) pin_decoder_rows(ae, boundary_indices(cfg.fom));
  TrainingDatabase db;
  const std::size_t n_z = ae.latent_dim();
  for (const auto& mu : params) {
    TrainingEntry e;
    e.mu = mu;
    e.trajectory = cache(mu);
    e.di.spec = cfg.model.basis;
    e.di.owner_mu = mu;
    e.di.xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.model.basis.n_basis(n_z)),
                                    static_cast<Eigen::Index>(n_z));
    db.entries.push_back(std::move(e));
  }
  AdamState optimizer{cfg.adam, {}};
  LasdiOptions opts;
  opts.n_epochs = cfg.lasdi.n_epochs;
  opts.batch_size = cfg.batch_size;
  opts.ridge = cfg.lasdi.ridge;
  const LasdiReport report = train_lasdi_baseline(db, ae, optimizer, opts, mix_seed(cfg.seed, 2));

  const RomModel rom = make_rom(ae, db, cfg.model.interp);
  save_checkpoint(cfg.output_dir / "checkpoint.json", rom,
                  {{"method", "lasdi"}, {"config", portable_config(cfg)}, {"complete", true}});
  write_loss_csv(cfg.output_dir / "loss.csv", report.loss_history);
  json summary = {
      {"method", "lasdi"},
      {"n_sampled", params.size()},
      {"sampled", points_json(params)},
      {"regularized_fits", report.regularized_fits},
      {"final_loss", report.loss_history.empty() ? json(nullptr) : loss_json(report.loss_history.back())},
      {"epochs", report.loss_history.size()},
  };
  write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  log << "train-lasdi: " << params.size() << " uniform samples, " << report.loss_history.size()
      << " epochs\n";
}

void cmd_predict(const RunConfig& cfg, const fs::path& checkpoint, const ParamPoint& mu,
                 const fs::path& out, std::ostream& log) {
  const RomModel rom = load_compatible(cfg, checkpoint);
  const Trajectory traj = predict(mu, rom, cfg.space(), cfg.fom);
  write_trajectory(out, traj);
  log << "predict: " << traj.n_snapshots() << " snapshots -> " << out.string() << '\n';
}

int cmd_eval_grid(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out,
                  std::ostream& log) {
  const RomModel rom = load_compatible(cfg, checkpoint);
  const FomCache cache(cfg.resolved_cache_dir(), cfg.fom);
  const HeatmapTable table =
      evaluate_grid(rom, cfg.space(), cfg.fom, [&cache](const ParamPoint& mu) { return cache(mu); },
                    cfg.greedy.indicator);
  write_heatmap_csv(out, table);
  log << "eval-grid: " << table.rows.size() << " points, grid max relative error "
      << fmt_short(table.grid_max()) << ", " << table.failed_count() << " failed -> " << out.string()
      << '\n';
  return table.failed_count() == 0 ? kOk : kPartialFailure;
}

void cmd_speedup(const RunConfig& cfg, const fs::path& checkpoint, const ParamPoint& mu,
                 const fs::path& out, std::ostream& log) {
  const RomModel rom = load_compatible(cfg, checkpoint);
  const SpeedupReport rep = measure_speedup(mu, rom, cfg.space(), cfg.fom, cfg.speedup_trials);
  json doc = {
      {"mu", mu.values},
      {"n_trials", cfg.speedup_trials},
      {"fom_seconds", rep.fom_seconds},
      {"rom_seconds", rep.rom_seconds},
      {"fom_median_seconds", rep.fom_median},
      {"rom_median_seconds", rep.rom_median},
      {"speedup", rep.ratio},
      {"grid", {cfg.fom.nx, cfg.fom.ny}},
      {"hardware_threads", std::thread::hardware_concurrency()},
      {"compiler", __VERSION__},
#ifdef NDEBUG
      {"build", "release"},
#else
      {"build", "debug"},
#endif
  };
  write_text(out, doc.dump(2) + "\n");
  log << "speedup: FOM " << fmt_short(rep.fom_median) << " s, ROM " << fmt_short(rep.rom_median) << " s, ratio "
      << fmt_short(rep.ratio) << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy latent-space dynamics identification for 2D Burgers"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, checkpoint, mu_text, out_path;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
  };
  auto* fom_run = app.add_subcommand("fom-run", "Simulate the full-order model at one parameter");
  add_config(fom_run);
  fom_run->add_option("--mu", mu_text, "Parameter a,w")->required();
  fom_run->add_option("--out", out_path, "Output trajectory (GLSD1)")->required();

  auto* train = app.add_subcommand("train", "Greedy training");
  add_config(train);
  train->add_option("--out", out_path, "Output directory (overrides config output_dir)");

  auto* train_lasdi = app.add_subcommand("train-lasdi", "Uniform-grid decoupled baseline");
  add_config(train_lasdi);
  train_lasdi->add_option("--out", out_path, "Output directory (overrides config output_dir)");

  auto* pred = app.add_subcommand("predict", "ROM prediction at one parameter");
  add_config(pred);
  pred->add_option("--checkpoint", checkpoint, "Trained model (checkpoint.json)")->required();
  pred->add_option("--mu", mu_text, "Parameter a,w")->required();
  pred->add_option("--out", out_path, "Output trajectory (GLSD1)")->required();

  auto* eval = app.add_subcommand("eval-grid", "Error heatmap over the parameter grid");
  add_config(eval);
  eval->add_option("--checkpoint", checkpoint, "Trained model (checkpoint.json)")->required();
  eval->add_option("--out", out_path, "Output CSV")->required();

  auto* speed = app.add_subcommand("speedup", "FOM vs ROM wall-clock comparison");
  add_config(speed);
  speed->add_option("--checkpoint", checkpoint, "Trained model (checkpoint.json)")->required();
  speed->add_option("--mu", mu_text, "Parameter a,w")->required();
  speed->add_option("--out", out_path, "Output report (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  set_log_level(verbose ? LogLevel::Info : LogLevel::Warn);

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_path.empty() && (train->parsed() || train_lasdi->parsed())) cfg.output_dir = out_path;
    if (fom_run->parsed()) {
      cmd_fom_run(cfg, parse_mu(mu_text), out_path, out);
    } else if (train->parsed()) {
      cmd_train(cfg, out);
    } else if (train_lasdi->parsed()) {
      cmd_train_lasdi(cfg, out);
    } else if (pred->parsed()) {
      cmd_predict(cfg, checkpoint, parse_mu(mu_text), out_path, out);
    } else if (eval->parsed()) {
      return cmd_eval_grid(cfg, checkpoint, out_path, out);
    } else if (speed->parsed()) {
      cmd_speedup(cfg, checkpoint, parse_mu(mu_text), out_path, out);
    }
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Divergence& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace glasdi::cli
