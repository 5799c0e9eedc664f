#include "glasdi/config.hpp"

#include <fstream>
#include <set>

#include "glasdi/errors.hpp"

namespace glasdi {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidConfig("config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw InvalidConfig("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::string window_name(IndicatorWindow w) { return w == IndicatorWindow::Head ? "head" : "strided"; }

}  // namespace

void RunConfig::validate() const {
  fom.validate();
  (void)space();
  model.basis.validate();
  greedy.validate();
  if (model.encoder_sizes.size() < 2) throw InvalidConfig("encoder needs at least two layer sizes");
  if (model.encoder_sizes.front() != fom.state_size()) {
    throw InvalidConfig("autoencoder outer layer is " + std::to_string(model.encoder_sizes.front()) +
                        " but 2*nx*ny = " + std::to_string(fom.state_size()));
  }
  for (auto n : model.encoder_sizes) {
    if (n == 0) throw InvalidConfig("layer sizes must be positive");
  }
  if (model.interp.k < 1) throw InvalidConfig("di.k must be >= 1");
  if (!(model.interp.power > 0.0)) throw InvalidConfig("di.p must be positive");
  if (weights.beta_zdot < 0.0 || weights.beta_udot < 0.0) {
    throw InvalidConfig("loss weights must be nonnegative");
  }
  if (!(adam.lr > 0.0) || !(adam.eps > 0.0) || adam.beta1 < 0.0 || adam.beta1 >= 1.0 ||
      adam.beta2 < 0.0 || adam.beta2 >= 1.0) {
    throw InvalidConfig("invalid Adam hyperparameters");
  }
  if (bounds.size() != 2) throw InvalidConfig("the Burgers problem has a 2D parameter space (a, w)");
  if (!(bounds[1].lo > 0.0)) throw InvalidConfig("width parameter w must stay positive");
  if (lasdi.grid_per_dim < 2) throw InvalidConfig("lasdi.grid_per_dim must be >= 2");
  for (auto r : resolution) {
    if (lasdi.grid_per_dim > r) throw InvalidConfig("lasdi.grid_per_dim exceeds the grid resolution");
  }
  if (speedup_trials < 3) throw InvalidConfig("speedup.n_trials must be >= 3");
}

DiscreteParamSpace RunConfig::space() const { return build_grid(bounds, resolution); }

TrainOptions RunConfig::train_options() const {
  TrainOptions t;
  t.weights = weights;
  t.batch_size = batch_size;
  t.train_xi = true;
  return t;
}

std::filesystem::path RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? output_dir / "fom_cache" : cache_dir;
}

RunConfig config_from_json(const json& doc) {
  check_keys(doc, "config", {"schema", "seed", "output_dir", "cache_dir", "fom", "space",
                             "autoencoder", "di", "training", "greedy", "lasdi", "speedup"});
  if (!doc.contains("schema") || doc.at("schema") != kConfigSchema) {
    throw InvalidConfig(std::string("config: schema must be \"") + kConfigSchema + "\"");
  }
  RunConfig cfg;
  read(doc, "seed", cfg.seed);
  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  if (doc.contains("cache_dir")) cfg.cache_dir = doc.at("cache_dir").get<std::string>();

  if (doc.contains("fom")) {
    const auto& f = doc.at("fom");
    check_keys(f, "fom", {"domain", "nx", "ny", "reynolds", "dt", "t_final", "newton_tol",
                          "newton_max_iter"});
    if (f.contains("domain")) {
      const auto d = f.at("domain").get<std::vector<double>>();
      if (d.size() != 4) throw InvalidConfig("fom.domain must be [x_min, x_max, y_min, y_max]");
      cfg.fom.x_min = d[0];
      cfg.fom.x_max = d[1];
      cfg.fom.y_min = d[2];
      cfg.fom.y_max = d[3];
    }
    read(f, "nx", cfg.fom.nx);
    read(f, "ny", cfg.fom.ny);
    read(f, "reynolds", cfg.fom.reynolds);
    read(f, "dt", cfg.fom.dt);
    read(f, "t_final", cfg.fom.t_final);
    read(f, "newton_tol", cfg.fom.newton_tol);
    read(f, "newton_max_iter", cfg.fom.newton_max_iter);
  }
  if (doc.contains("space")) {
    const auto& s = doc.at("space");
    check_keys(s, "space", {"bounds", "resolution"});
    if (s.contains("bounds")) {
      cfg.bounds.clear();
      for (const auto& b : s.at("bounds")) {
        const auto v = b.get<std::vector<double>>();
        if (v.size() != 2) throw InvalidConfig("space.bounds entries must be [lo, hi]");
        cfg.bounds.push_back({v[0], v[1]});
      }
    }
    read(s, "resolution", cfg.resolution);
  }
  if (doc.contains("autoencoder")) {
    const auto& a = doc.at("autoencoder");
    check_keys(a, "autoencoder", {"encoder_sizes", "activation", "pin_boundary"});
    read(a, "encoder_sizes", cfg.model.encoder_sizes);
    read(a, "pin_boundary", cfg.model.pin_boundary);
    if (a.contains("activation")) cfg.model.activation = parse_activation(a.at("activation").get<std::string>());
  }
  if (doc.contains("di")) {
    const auto& d = doc.at("di");
    check_keys(d, "di", {"poly_order", "include_trig", "k", "p"});
    read(d, "poly_order", cfg.model.basis.poly_order);
    read(d, "include_trig", cfg.model.basis.include_trig);
    read(d, "k", cfg.model.interp.k);
    read(d, "p", cfg.model.interp.power);
  }
  if (doc.contains("training")) {
    const auto& t = doc.at("training");
    check_keys(t, "training", {"beta_zdot", "beta_udot", "lr", "adam_beta1", "adam_beta2",
                               "adam_eps", "batch_size"});
    read(t, "beta_zdot", cfg.weights.beta_zdot);
    read(t, "beta_udot", cfg.weights.beta_udot);
    read(t, "lr", cfg.adam.lr);
    read(t, "adam_beta1", cfg.adam.beta1);
    read(t, "adam_beta2", cfg.adam.beta2);
    read(t, "adam_eps", cfg.adam.eps);
    read(t, "batch_size", cfg.batch_size);
  }
  if (doc.contains("greedy")) {
    const auto& g = doc.at("greedy");
    check_keys(g, "greedy", {"n_target", "tol", "n_epochs_between", "n_epochs_final",
                             "subset_size", "n_ts_fraction", "indicator_window", "init"});
    read(g, "n_target", cfg.greedy.n_target);
    read(g, "tol", cfg.greedy.tol);
    read(g, "n_epochs_between", cfg.greedy.n_epochs_between);
    read(g, "n_epochs_final", cfg.greedy.n_epochs_final);
    read(g, "subset_size", cfg.greedy.subset_size);
    read(g, "n_ts_fraction", cfg.greedy.indicator.n_ts_fraction);
    if (g.contains("indicator_window")) {
      const auto w = g.at("indicator_window").get<std::string>();
      if (w == "strided") {
        cfg.greedy.indicator.window = IndicatorWindow::Strided;
      } else if (w == "head") {
        cfg.greedy.indicator.window = IndicatorWindow::Head;
      } else {
        throw InvalidConfig("greedy.indicator_window must be 'strided' or 'head'");
      }
    }
    if (g.contains("init")) {
      const auto init = g.at("init").get<std::string>();
      if (init != "corners" && init != "center") {
        throw InvalidConfig("greedy.init must be 'corners' or 'center'");
      }
      cfg.greedy.center_start = init == "center";
    }
  }
  if (doc.contains("lasdi")) {
    const auto& l = doc.at("lasdi");
    check_keys(l, "lasdi", {"grid_per_dim", "n_epochs", "ridge"});
    read(l, "grid_per_dim", cfg.lasdi.grid_per_dim);
    read(l, "n_epochs", cfg.lasdi.n_epochs);
    read(l, "ridge", cfg.lasdi.ridge);
  }
  if (doc.contains("speedup")) {
    const auto& s = doc.at("speedup");
    check_keys(s, "speedup", {"n_trials"});
    read(s, "n_trials", cfg.speedup_trials);
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json bounds = json::array();
  for (const auto& b : cfg.bounds) bounds.push_back({b.lo, b.hi});
  return {
      {"schema", kConfigSchema},
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir.string()},
      {"cache_dir", cfg.resolved_cache_dir().string()},
      {"fom",
       {{"domain", {cfg.fom.x_min, cfg.fom.x_max, cfg.fom.y_min, cfg.fom.y_max}},
        {"nx", cfg.fom.nx},
        {"ny", cfg.fom.ny},
        {"reynolds", cfg.fom.reynolds},
        {"dt", cfg.fom.dt},
        {"t_final", cfg.fom.t_final},
        {"newton_tol", cfg.fom.newton_tol},
        {"newton_max_iter", cfg.fom.newton_max_iter}}},
      {"space", {{"bounds", bounds}, {"resolution", cfg.resolution}}},
      {"autoencoder",
       {{"encoder_sizes", cfg.model.encoder_sizes},
        {"activation", to_string(cfg.model.activation)},
        {"pin_boundary", cfg.model.pin_boundary}}},
      {"di",
       {{"poly_order", cfg.model.basis.poly_order},
        {"include_trig", cfg.model.basis.include_trig},
        {"k", cfg.model.interp.k},
        {"p", cfg.model.interp.power}}},
      {"training",
       {{"beta_zdot", cfg.weights.beta_zdot},
        {"beta_udot", cfg.weights.beta_udot},
        {"lr", cfg.adam.lr},
        {"adam_beta1", cfg.adam.beta1},
        {"adam_beta2", cfg.adam.beta2},
        {"adam_eps", cfg.adam.eps},
        {"batch_size", cfg.batch_size}}},
      {"greedy",
       {{"n_target", cfg.greedy.n_target},
        {"tol", cfg.greedy.tol},
        {"n_epochs_between", cfg.greedy.n_epochs_between},
        {"n_epochs_final", cfg.greedy.n_epochs_final},
        {"subset_size", cfg.greedy.subset_size},
        {"n_ts_fraction", cfg.greedy.indicator.n_ts_fraction},
        {"indicator_window", window_name(cfg.greedy.indicator.window)},
        {"init", cfg.greedy.center_start ? "center" : "corners"}}},
      {"lasdi",
       {{"grid_per_dim", cfg.lasdi.grid_per_dim},
        {"n_epochs", cfg.lasdi.n_epochs},
        {"ridge", cfg.lasdi.ridge}}},
      {"speedup", {{"n_trials", cfg.speedup_trials}}},
  };
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace glasdi
