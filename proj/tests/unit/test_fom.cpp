#include <cmath>
#include <random>

#include "doctest.h"

#include "glasdi/errors.hpp"
#include "glasdi/fom_burgers.hpp"
#include "oracles.hpp"

using namespace glasdi;

namespace {

FomConfig small_grid(std::size_t n) {
  FomConfig cfg;
  cfg.nx = n;
  cfg.ny = n;
  return cfg;
}

oracle::Grid2d to_oracle(const FomConfig& c) {
  return {static_cast<int>(c.nx), static_cast<int>(c.ny), c.x_min, c.x_max, c.y_min,
          c.y_max, c.reynolds, c.dt};
}

Eigen::VectorXd random_state(const FomConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd u(static_cast<Eigen::Index>(cfg.state_size()));
  for (auto& v : u) v = d(gen);
  return u;
}

}  // namespace

TEST_CASE("initial condition") {
  FomConfig c31 = small_grid(31);
  auto u = initial_state(ParamPoint{{0.7, 0.9}}, c31);
  const std::size_t origin = 15 * 31 + 15;
  CHECK(u[static_cast<Eigen::Index>(origin)] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(u[static_cast<Eigen::Index>(c31.nodes() + origin)] == doctest::Approx(0.7).epsilon(1e-15));

  FomConfig c21 = small_grid(21);  // spacing 0.3, node 13 sits at x = 0.9
  auto v = initial_state(ParamPoint{{0.7, 0.9}}, c21);
  const double expect = 0.7 * std::exp(-1.0);
  CHECK(std::abs(v[10 * 21 + 13] - expect) < 1e-14);
  CHECK(expect == doctest::Approx(0.25752).epsilon(1e-5));

  for (auto idx : boundary_indices(c31)) CHECK(u[static_cast<Eigen::Index>(idx)] == 0.0);
  CHECK(boundary_indices(c31).size() == 2 * (4 * 31 - 4));

  CHECK_THROWS_AS(initial_state(ParamPoint{{0.7, 0.0}}, c31), InvalidConfig);
  CHECK_THROWS_AS(initial_state(ParamPoint{{0.7, -1.0}}, c31), InvalidConfig);
}

TEST_CASE("rhs stencil") {
  FomConfig cfg = small_grid(5);
  SUBCASE("zero state") {
    CHECK(rhs(Eigen::VectorXd::Zero(50), cfg).norm() == 0.0);
  }
  SUBCASE("constant interior region") {
    FomConfig c7 = small_grid(7);
    Eigen::VectorXd u = Eigen::VectorXd::Constant(98, 0.4);
    for (auto idx : boundary_indices(c7)) u[static_cast<Eigen::Index>(idx)] = 0.0;
    auto f = rhs(u, c7);
    for (int j = 2; j <= 4; ++j)
      for (int i = 2; i <= 4; ++i) {
        CHECK(f[j * 7 + i] == 0.0);
        CHECK(f[49 + j * 7 + i] == 0.0);
      }
  }
  SUBCASE("linear ramp by hand") {
    // u_x = 1 + 2x + 3y, u_y = -1 + 0.5x - y on the 5x5 grid over [-3,3]^2.
    const double h = 1.5;
    Eigen::VectorXd u(50);
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 5; ++i) {
        const double x = -3.0 + i * h, y = -3.0 + j * h;
        u[j * 5 + i] = 1 + 2 * x + 3 * y;
        u[25 + j * 5 + i] = -1 + 0.5 * x - y;
      }
    auto f = rhs(u, cfg);
    const int i = 3, j = 1;
    const double x = -3.0 + i * h, y = -3.0 + j * h;
    const double ux = 1 + 2 * x + 3 * y, uy = -1 + 0.5 * x - y;
    // Backward differences of a linear field are exact; the Laplacian vanishes.
    CHECK(std::abs(f[j * 5 + i] - (-(ux * 2.0 + uy * 3.0))) < 1e-14);
    CHECK(std::abs(f[25 + j * 5 + i] - (-(ux * 0.5 + uy * -1.0))) < 1e-14);
  }
  SUBCASE("random field vs dense oracle") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto u = random_state(cfg, s);
      CHECK((rhs(u, cfg) - oracle::burgers_rhs(u, to_oracle(cfg))).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("residual") {
  FomConfig cfg = small_grid(5);
  CHECK(residual(Eigen::VectorXd::Zero(50), Eigen::VectorXd::Zero(50), cfg).norm() == 0.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto un = random_state(cfg, 2 * s);
    auto up = random_state(cfg, 2 * s + 1);
    auto r = residual(un, up, cfg);
    CHECK((r - oracle::burgers_residual(un, up, to_oracle(cfg))).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS(residual(Eigen::VectorXd::Zero(50), Eigen::VectorXd::Zero(49), cfg),
                  DimensionMismatch);
}

TEST_CASE("jacobian vs finite differences") {
  FomConfig cfg = small_grid(6);
  cfg.reynolds = 50.0;
  cfg.dt = 0.05;
  auto un = random_state(cfg, 11);
  auto up = random_state(cfg, 12);
  Eigen::MatrixXd fd = oracle::fd_jacobian(
      [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(residual(x, up, cfg)); }, un, 1e-6);
  Eigen::MatrixXd an = Eigen::MatrixXd(residual_jacobian(un, cfg));
  CHECK((an - fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("newton step") {
  SUBCASE("zero state is a fixed point") {
    FomConfig cfg = small_grid(10);
    BurgersStepper stepper(cfg);
    auto res = stepper.step(Eigen::VectorXd::Zero(200));
    CHECK(res.iterations <= 1);
    CHECK(res.u.norm() == 0.0);
  }
  SUBCASE("residual decreases monotonically and meets the tolerance") {
    FomConfig cfg;
    BurgersStepper stepper(cfg);
    auto u0 = initial_state(ParamPoint{{0.7, 0.9}}, cfg);
    auto res = stepper.step(u0);
    REQUIRE(res.residual_history.size() >= 2);
    for (std::size_t k = 1; k < res.residual_history.size(); ++k) {
      CHECK(res.residual_history[k] < res.residual_history[k - 1]);
    }
    CHECK(res.residual_history.back() <= cfg.newton_tol);
    CHECK(residual(res.u, u0, cfg).norm() <= cfg.newton_tol);
    for (auto idx : boundary_indices(cfg)) CHECK(res.u[static_cast<Eigen::Index>(idx)] == 0.0);
  }
  SUBCASE("nonconvergence carries the history") {
    FomConfig cfg;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-15;
    cfg.dt = 0.05;
    cfg.t_final = 0.05;
    auto u0 = initial_state(ParamPoint{{0.9, 0.9}}, cfg);
    try {
      step(u0, cfg);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.residual_history().size() == 2);
    }
    CHECK_THROWS_AS(simulate(ParamPoint{{0.9, 0.9}}, cfg), NonConvergence);
  }
}

TEST_CASE("backward Euler is first order in time") {
  FomConfig base = small_grid(16);
  base.t_final = 0.25;
  const ParamPoint mu{{0.8, 1.0}};
  auto final_state = [&](double dt) {
    FomConfig c = base;
    c.dt = dt;
    return Eigen::VectorXd(simulate(mu, c).snapshots.rightCols(1));
  };
  const Eigen::VectorXd ref = final_state(1.0 / 640.0);
  const double e1 = (final_state(1.0 / 20.0) - ref).norm();
  const double e2 = (final_state(1.0 / 40.0) - ref).norm();
  const double e3 = (final_state(1.0 / 80.0) - ref).norm();
  // Against a dt/8 reference the observed ratios sit slightly below 2.
  CHECK(e1 / e2 > 1.7);
  CHECK(e1 / e2 < 2.3);
  CHECK(e2 / e3 > 1.7);
  CHECK(e2 / e3 < 2.3);
}

TEST_CASE("simulate") {
  FomConfig cfg;
  const ParamPoint mu{{0.9, 1.1}};
  const auto before = fom_step_count();
  SimulationStats stats;
  auto traj = simulate(mu, cfg, &stats);
  CHECK(fom_step_count() - before == 200);
  CHECK(stats.steps == 200);
  CHECK(stats.max_final_residual <= cfg.newton_tol);
  CHECK(traj.n_snapshots() == 201);
  CHECK(traj.state_size() == 1800);
  CHECK(traj.dt == cfg.dt);
  CHECK(traj.mu == mu);
  CHECK(traj.snapshots.col(0) == initial_state(mu, cfg));
  CHECK(traj.snapshots.allFinite());
  REQUIRE(traj.has_derivatives());
  CHECK((traj.derivatives.col(57) - rhs(traj.snapshots.col(57), cfg)).norm() == 0.0);

  // Sum of the velocity field: finite, smooth in time, decaying overall.
  std::vector<double> total(traj.n_snapshots());
  for (std::size_t n = 0; n < total.size(); ++n) total[n] = traj.snapshots.col(static_cast<Eigen::Index>(n)).sum();
  CHECK(total.back() < total.front());
  double max_jump = 0.0;
  for (std::size_t n = 1; n < total.size(); ++n) max_jump = std::max(max_jump, std::abs(total[n] - total[n - 1]));
  CHECK(max_jump < 0.01 * std::abs(total.front()));
}

TEST_CASE("config validation") {
  FomConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.n_steps() == 200);
  cfg.dt = 0.003;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  CHECK(FomConfig::full_scale().state_size() == 7200);
  CHECK(FomConfig::desk_scale().state_size() == 1800);
}
