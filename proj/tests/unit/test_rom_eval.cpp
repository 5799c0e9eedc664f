#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "glasdi/errors.hpp"
#include "glasdi/evaluation.hpp"
#include "glasdi/log.hpp"
#include "glasdi/rom.hpp"

using namespace glasdi;
namespace fs = std::filesystem;

namespace {

FomConfig tiny_fom() {
  FomConfig c;
  c.nx = 7;
  c.ny = 7;
  c.dt = 0.02;
  c.t_final = 0.2;
  return c;
}

RomModel tiny_rom(const FomConfig& fom, const DiscreteParamSpace& space) {
  RomModel rom;
  rom.ae = init_autoencoder({fom.state_size(), 9, 2}, Activation::Tanh, 21);
  for (const auto& mu : corner_points(space)) {
    DiModel m;
    m.owner_mu = mu;
    m.xi = Eigen::MatrixXd::Zero(3, 2);
    m.xi(1, 0) = -mu[0];
    m.xi(2, 1) = -0.5 * mu[1];
    m.xi(0, 1) = 0.1;
    rom.anchors.push_back(m);
  }
  return rom;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("glasdi_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("max relative error") {
  Trajectory u;
  u.snapshots.resize(3, 2);
  u.snapshots << 3, 1, 4, 0, 0, 2;
  CHECK(max_relative_error(u, u) == 0.0);
  Trajectory s = u;
  s.snapshots *= 1.01;
  CHECK(max_relative_error(u, s) == doctest::Approx(0.01).epsilon(1e-13));

  // Columns: ||(3,4,0)|| = 5, ||(1,0,2)|| = sqrt(5).
  Trajectory v = u;
  v.snapshots(0, 0) += 0.5;  // error 0.5 / 5 = 0.1
  v.snapshots(2, 1) -= 0.3;  // error 0.3 / sqrt(5)
  CHECK(max_relative_error(u, v) == doctest::Approx(0.3 / std::sqrt(5.0)).epsilon(1e-14));

  Trajectory zero;
  zero.snapshots = Eigen::MatrixXd::Zero(3, 1);
  Trajectory tiny = zero;
  tiny.snapshots(0, 0) = 1e-13;
  CHECK(max_relative_error(zero, tiny) == doctest::Approx(0.1));

  Trajectory bad;
  bad.snapshots = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(max_relative_error(u, bad), DimensionMismatch);
}

TEST_CASE("prediction") {
  const FomConfig fom = tiny_fom();
  auto space = build_grid({{0.7, 0.9}, {0.9, 1.1}}, {3, 3});
  auto rom = tiny_rom(fom, space);
  const ParamPoint mu{{0.8, 0.9}};
  auto a = predict(mu, rom, space, fom);
  auto b = predict(mu, rom, space, fom);
  CHECK(a.n_snapshots() == fom.n_steps() + 1);
  CHECK(a.state_size() == fom.state_size());
  CHECK_FALSE(a.has_derivatives());
  CHECK(a.snapshots == b.snapshots);

  // The latent path starts at the encoded initial condition.
  auto z = predict_latent(mu, rom, space, fom);
  CHECK(z.col(0) == forward(rom.ae.encoder, initial_state(mu, fom)));
  CHECK((a.snapshots - forward(rom.ae.decoder, z)).norm() == 0.0);

  // k larger than the anchor count is clamped.
  RomModel wide = rom;
  wide.interp.k = 50;
  CHECK_NOTHROW(predict(mu, wide, space, fom));

  CHECK_THROWS_AS(predict(ParamPoint{{0.5, 1.0}}, rom, space, fom), InvalidConfig);
  RomModel empty = rom;
  empty.anchors.clear();
  CHECK_THROWS(predict(mu, empty, space, fom));
}

TEST_CASE("grid evaluation and heatmap CSV") {
  set_log_level(LogLevel::Quiet);
  const FomConfig fom = tiny_fom();
  auto space = build_grid({{0.7, 0.9}, {0.9, 1.1}}, {3, 3});
  auto rom = tiny_rom(fom, space);
  auto table = evaluate_grid(rom, space, fom, [&](const ParamPoint& mu) {
    if (mu == space.point(4)) throw NonConvergence("injected", {1.0});
    return simulate(mu, fom);
  }, {});
  set_log_level(LogLevel::Warn);
  REQUIRE(table.rows.size() == 9);
  CHECK(table.sampled_count() == 4);
  CHECK(table.failed_count() == 1);
  CHECK(table.rows[4].failed);
  CHECK(std::isnan(table.rows[4].max_rel_error));
  CHECK(table.rows[0].sampled);
  CHECK_FALSE(table.rows[1].sampled);
  double expect_max = 0.0;
  for (const auto& r : table.rows) {
    if (r.failed) continue;
    auto ref = simulate(r.mu, fom);
    CHECK(r.max_rel_error == max_relative_error(ref, predict(r.mu, rom, space, fom)));
    expect_max = std::max(expect_max, r.max_rel_error);
  }
  CHECK(table.grid_max() == expect_max);

  std::ostringstream csv;
  write_heatmap_csv(csv, table);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "mu_1,mu_2,max_rel_error,residual_indicator,sampled");
  int rows = 0, sampled = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    ++rows;
    lines.push_back(line);
    sampled += line.back() == '1';
  }
  CHECK(rows == 9);
  CHECK(sampled == 4);
  CHECK(lines[4].find(",nan,nan,") != std::string::npos);
  // Values are written with full round-trip precision.
  const auto first_comma = lines[1].find(',');
  const auto second = lines[1].find(',', first_comma + 1);
  const auto third = lines[1].find(',', second + 1);
  CHECK(std::stod(lines[1].substr(second + 1, third - second - 1)) == table.rows[1].max_rel_error);
}

TEST_CASE("disk cache") {
  const FomConfig fom = tiny_fom();
  const auto dir = scratch("cache");
  FomCache cache(dir, fom);
  const ParamPoint mu{{0.75, 1.05}};
  auto a = cache(mu);
  CHECK(cache.misses() == 1);
  CHECK(fs::exists(cache.path_for(mu)));
  auto b = cache(mu);
  CHECK(cache.hits() == 1);
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.derivatives == b.derivatives);
  CHECK(a.mu == b.mu);

  FomConfig other = fom;
  other.reynolds = 500.0;
  CHECK(fom_cache_key(mu, other) != fom_cache_key(mu, fom));
  CHECK(fom_cache_key(ParamPoint{{0.75, std::nextafter(1.05, 2.0)}}, fom) != fom_cache_key(mu, fom));
  CHECK(fom_cache_key(mu, fom) == fom_cache_key(mu, tiny_fom()));
  fs::remove_all(dir);
}

TEST_CASE("speed-up measurement") {
  const FomConfig fom = tiny_fom();
  auto space = build_grid({{0.7, 0.9}, {0.9, 1.1}}, {3, 3});
  auto rom = tiny_rom(fom, space);
  auto rep = measure_speedup(ParamPoint{{0.8, 1.0}}, rom, space, fom, 3);
  CHECK(rep.fom_seconds.size() == 3);
  CHECK(rep.rom_seconds.size() == 3);
  CHECK(rep.ratio == doctest::Approx(rep.fom_median / rep.rom_median));
  CHECK(rep.ratio > 1.0);
  CHECK_THROWS_AS(measure_speedup(ParamPoint{{0.8, 1.0}}, rom, space, fom, 2), InvalidConfig);
}
