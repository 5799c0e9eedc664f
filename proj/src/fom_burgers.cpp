#include "glasdi/fom_burgers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "glasdi/errors.hpp"

namespace glasdi {

namespace {

std::atomic<std::uint64_t> g_step_count{0};

struct Grid {
  std::size_t nx, ny, nodes;
  double inv_dx, inv_dy, nu_x, nu_y;

  explicit Grid(const FomConfig& cfg)
      : nx(cfg.nx),
        ny(cfg.ny),
        nodes(cfg.nodes()),
        inv_dx(1.0 / cfg.dx()),
        inv_dy(1.0 / cfg.dy()),
        nu_x(1.0 / (cfg.reynolds * cfg.dx() * cfg.dx())),
        nu_y(1.0 / (cfg.reynolds * cfg.dy() * cfg.dy())) {}

  std::size_t node(std::size_t i, std::size_t j) const { return j * nx + i; }
  bool interior(std::size_t i, std::size_t j) const {
    return i > 0 && j > 0 && i + 1 < nx && j + 1 < ny;
  }
};

}  // namespace

void FomConfig::validate() const {
  if (nx < 3 || ny < 3) throw InvalidConfig("FOM grid needs at least 3 points per axis");
  if (!(x_min < x_max) || !(y_min < y_max)) throw InvalidConfig("FOM domain is degenerate");
  if (!(dt > 0.0)) throw InvalidConfig("dt must be positive");
  if (!(t_final > 0.0)) throw InvalidConfig("t_final must be positive");
  if (!(reynolds > 0.0)) throw InvalidConfig("Reynolds number must be positive");
  if (!(newton_tol > 0.0)) throw InvalidConfig("newton_tol must be positive");
  if (newton_max_iter < 1) throw InvalidConfig("newton_max_iter must be >= 1");
  const double steps = std::round(t_final / dt);
  if (steps < 1.0 || std::abs(steps * dt - t_final) > 1e-12 * std::max(1.0, t_final)) {
    throw InvalidConfig("t_final is not an integer multiple of dt");
  }
}

std::size_t FomConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

FomConfig FomConfig::desk_scale() { return FomConfig{}; }

FomConfig FomConfig::full_scale() {
  FomConfig cfg;
  cfg.nx = 60;
  cfg.ny = 60;
  return cfg;
}

std::vector<std::size_t> boundary_indices(const FomConfig& cfg) {
  const Grid g(cfg);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        if (!g.interior(i, j)) out.push_back(c * g.nodes + g.node(i, j));
      }
    }
  }
  return out;
}

StateVector initial_state(const ParamPoint& mu, const FomConfig& cfg) {
  if (mu.dim() != 2) throw DimensionMismatch("Burgers parameter must be (a, w)");
  const double a = mu[0];
  const double w = mu[1];
  if (!(w > 0.0)) throw InvalidConfig("Gaussian width w must be positive");
  const Grid g(cfg);
  StateVector u = StateVector::Zero(static_cast<Eigen::Index>(cfg.state_size()));
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    const double y = cfg.y_min + static_cast<double>(j) * cfg.dy();
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const double x = cfg.x_min + static_cast<double>(i) * cfg.dx();
      const double v = a * std::exp(-(x * x + y * y) / (w * w));
      const std::size_t k = g.node(i, j);
      u[k] = v;
      u[g.nodes + k] = v;
    }
  }
  return u;
}

StateVector rhs(const StateVector& u, const FomConfig& cfg) {
  if (static_cast<std::size_t>(u.size()) != cfg.state_size()) {
    throw DimensionMismatch("rhs: state size does not match grid");
  }
  const Grid g(cfg);
  const double adv = cfg.advection ? 1.0 : 0.0;
  StateVector f = StateVector::Zero(u.size());
  const double* ux = u.data();
  const double* uy = u.data() + g.nodes;
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t k = g.node(i, j);
      const std::size_t w = k - 1, e = k + 1, s = k - g.nx, n = k + g.nx;
      const double a = ux[k], b = uy[k];
      for (std::size_t c = 0; c < 2; ++c) {
        const double* q = c == 0 ? ux : uy;
        const double advection = a * (q[k] - q[w]) * g.inv_dx + b * (q[k] - q[s]) * g.inv_dy;
        const double diffusion = g.nu_x * (q[e] - 2.0 * q[k] + q[w]) +
                                 g.nu_y * (q[n] - 2.0 * q[k] + q[s]);
        f[c * g.nodes + k] = -adv * advection + diffusion;
      }
    }
  }
  return f;
}

StateVector residual(const StateVector& u_n, const StateVector& u_prev, const FomConfig& cfg) {
  if (u_n.size() != u_prev.size()) throw DimensionMismatch("residual: state sizes differ");
  StateVector r = u_n - u_prev - cfg.dt * rhs(u_n, cfg);
  for (auto idx : boundary_indices(cfg)) r[idx] = u_n[idx];
  return r;
}

Eigen::SparseMatrix<double> residual_jacobian(const StateVector& u, const FomConfig& cfg) {
  if (static_cast<std::size_t>(u.size()) != cfg.state_size()) {
    throw DimensionMismatch("residual_jacobian: state size does not match grid");
  }
  const Grid g(cfg);
  const double adv = cfg.advection ? 1.0 : 0.0;
  const double dt = cfg.dt;
  const auto n = static_cast<Eigen::Index>(cfg.state_size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  const double* ux = u.data();
  const double* uy = u.data() + g.nodes;
  const auto I = [](std::size_t v) { return static_cast<Eigen::Index>(v); };

  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = g.node(i, j);
      if (!g.interior(i, j)) {
        trip.emplace_back(I(k), I(k), 1.0);
        trip.emplace_back(I(g.nodes + k), I(g.nodes + k), 1.0);
        continue;
      }
      const std::size_t w = k - 1, e = k + 1, s = k - g.nx, nn = k + g.nx;
      const double a = ux[k], b = uy[k];
      for (std::size_t c = 0; c < 2; ++c) {
        const double* q = c == 0 ? ux : uy;
        const std::size_t row = c * g.nodes + k;
        const std::size_t off = c * g.nodes;
        const std::size_t other = (1 - c) * g.nodes;
        // df/dq at the stencil nodes of the same component.
        double d_center = -adv * (a * g.inv_dx + b * g.inv_dy) - 2.0 * (g.nu_x + g.nu_y);
        // Self-coupling through the advecting velocity.
        if (c == 0) {
          d_center -= adv * (q[k] - q[w]) * g.inv_dx;
        } else {
          d_center -= adv * (q[k] - q[s]) * g.inv_dy;
        }
        const double d_west = adv * a * g.inv_dx + g.nu_x;
        const double d_south = adv * b * g.inv_dy + g.nu_y;
        // Cross-coupling: f_x depends on u_y through b, f_y on u_x through a.
        const double d_cross = c == 0 ? -adv * (q[k] - q[s]) * g.inv_dy
                                      : -adv * (q[k] - q[w]) * g.inv_dx;
        trip.emplace_back(I(row), I(off + k), 1.0 - dt * d_center);
        trip.emplace_back(I(row), I(off + w), -dt * d_west);
        trip.emplace_back(I(row), I(off + e), -dt * g.nu_x);
        trip.emplace_back(I(row), I(off + s), -dt * d_south);
        trip.emplace_back(I(row), I(off + nn), -dt * g.nu_y);
        trip.emplace_back(I(row), I(other + k), -dt * d_cross);
      }
    }
  }
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(trip.begin(), trip.end());
  jac.makeCompressed();
  return jac;
}

struct BurgersStepper::Solver {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  std::vector<std::size_t> boundary;
};

BurgersStepper::BurgersStepper(FomConfig cfg)
    : cfg_(std::move(cfg)), solver_(std::make_unique<Solver>()) {
  cfg_.validate();
  solver_->boundary = boundary_indices(cfg_);
}

BurgersStepper::~BurgersStepper() = default;
BurgersStepper::BurgersStepper(BurgersStepper&&) noexcept = default;
BurgersStepper& BurgersStepper::operator=(BurgersStepper&&) noexcept = default;

StepResult BurgersStepper::step(const StateVector& u_prev) {
  if (static_cast<std::size_t>(u_prev.size()) != cfg_.state_size()) {
    throw DimensionMismatch("step: state size does not match grid");
  }
  g_step_count.fetch_add(1, std::memory_order_relaxed);
  StepResult out;
  out.u = u_prev;
  StateVector r = residual(out.u, u_prev, cfg_);
  double norm = r.norm();
  out.residual_history.push_back(norm);
  while (!(norm <= cfg_.newton_tol)) {
    if (out.iterations >= cfg_.newton_max_iter || !std::isfinite(norm)) {
      throw NonConvergence("Newton did not converge (||r|| = " + std::to_string(norm) +
                               " after " + std::to_string(out.iterations) + " iterations)",
                           out.residual_history);
    }
    const auto jac = residual_jacobian(out.u, cfg_);
    if (!solver_->analyzed) {
      solver_->lu.analyzePattern(jac);
      solver_->analyzed = true;
    }
    solver_->lu.factorize(jac);
    if (solver_->lu.info() != Eigen::Success) {
      throw NonConvergence("sparse LU factorization failed", out.residual_history);
    }
    StateVector delta = solver_->lu.solve(r);
    // Dirichlet rows are identity rows; pin their update so boundary values
    // stay bitwise exact regardless of pivoting.
    for (auto idx : solver_->boundary) delta[static_cast<Eigen::Index>(idx)] = r[static_cast<Eigen::Index>(idx)];
    out.u -= delta;
    ++out.iterations;
    r = residual(out.u, u_prev, cfg_);
    norm = r.norm();
    out.residual_history.push_back(norm);
  }
  return out;
}

StateVector step(const StateVector& u_prev, const FomConfig& cfg) {
  BurgersStepper stepper(cfg);
  return stepper.step(u_prev).u;
}

Trajectory simulate(const ParamPoint& mu, const FomConfig& cfg, SimulationStats* stats) {
  cfg.validate();
  const std::size_t n_steps = cfg.n_steps();
  const auto n = static_cast<Eigen::Index>(cfg.state_size());
  Trajectory traj;
  traj.mu = mu;
  traj.dt = cfg.dt;
  traj.snapshots.resize(n, static_cast<Eigen::Index>(n_steps + 1));
  traj.derivatives.resize(n, static_cast<Eigen::Index>(n_steps + 1));

  BurgersStepper stepper(cfg);
  StateVector u = initial_state(mu, cfg);
  traj.snapshots.col(0) = u;
  traj.derivatives.col(0) = rhs(u, cfg);
  for (std::size_t t = 1; t <= n_steps; ++t) {
    try {
      StepResult r = stepper.step(u);
      if (stats != nullptr) {
        stats->steps += 1;
        stats->newton_iterations += static_cast<std::size_t>(r.iterations);
        stats->max_final_residual = std::max(stats->max_final_residual, r.residual_history.back());
      }
      u = std::move(r.u);
    } catch (const NonConvergence& e) {
      throw NonConvergence(std::string(e.what()) + " at time step " + std::to_string(t),
                           e.residual_history(), t);
    }
    const auto col = static_cast<Eigen::Index>(t);
    traj.snapshots.col(col) = u;
    traj.derivatives.col(col) = rhs(u, cfg);
  }
  return traj;
}

std::uint64_t fom_step_count() { return g_step_count.load(std::memory_order_relaxed); }

}  // namespace glasdi
