#pragma once

// Semi-discrete 2D viscous Burgers equation on a uniform grid with
// homogeneous Dirichlet boundaries:
//
//   du/dt + (u . grad) u = (1/Re) lap u
//
// Advection uses first-order backward differences (toward decreasing
// index), diffusion uses second-order central differences. The state
// stacks both velocity components: [u_x (ny*nx, x fastest), u_y (ny*nx)].

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "glasdi/param_space.hpp"

namespace glasdi {

struct FomConfig {
  double x_min = -3.0;
  double x_max = 3.0;
  double y_min = -3.0;
  double y_max = 3.0;
  std::size_t nx = 30;
  std::size_t ny = 30;
  double reynolds = 10000.0;
  double dt = 1.0 / 200.0;
  double t_final = 1.0;
  double newton_tol = 1e-8;
  int newton_max_iter = 10;
  /// Test hook: when false the advection term is dropped.
  bool advection = true;

  void validate() const;
  std::size_t n_steps() const;
  std::size_t nodes() const { return nx * ny; }
  std::size_t state_size() const { return 2 * nx * ny; }
  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }

  /// 30x30 grid, N_u = 1800.
  static FomConfig desk_scale();
  /// 60x60 grid, N_u = 7200.
  static FomConfig full_scale();
};

using StateVector = Eigen::VectorXd;

/// Snapshot matrix U = [u_0, ..., u_Nt], one column per time level.
/// `derivatives` is either empty or the same shape holding f(u_n).
struct Trajectory {
  ParamPoint mu;
  double dt = 0.0;
  Eigen::MatrixXd snapshots;
  Eigen::MatrixXd derivatives;

  std::size_t state_size() const { return static_cast<std::size_t>(snapshots.rows()); }
  std::size_t n_snapshots() const { return static_cast<std::size_t>(snapshots.cols()); }
  bool has_derivatives() const { return derivatives.size() > 0; }
};

/// Flat state indices of all boundary nodes (both components).
std::vector<std::size_t> boundary_indices(const FomConfig& cfg);

/// Gaussian a*exp(-|x|^2/w^2) in both components, zero on the boundary.
StateVector initial_state(const ParamPoint& mu, const FomConfig& cfg);

/// Semi-discrete velocity f(u). Boundary rows are zero.
StateVector rhs(const StateVector& u, const FomConfig& cfg);

/// Backward-Euler residual r = u_n - u_prev - dt f(u_n) on interior rows;
/// boundary rows return u_n itself. The parameter enters only through the
/// initial condition, so it does not appear here.
StateVector residual(const StateVector& u_n, const StateVector& u_prev, const FomConfig& cfg);

/// dr/du_n = I - dt df/du (identity on boundary rows).
Eigen::SparseMatrix<double> residual_jacobian(const StateVector& u_n, const FomConfig& cfg);

struct StepResult {
  StateVector u;
  /// ||r||_2 before each Newton update and after the last one.
  std::vector<double> residual_history;
  int iterations = 0;
};

/// Newton solver for one backward-Euler step. Holds a sparse LU whose
/// symbolic analysis is reused across iterations and steps.
class BurgersStepper {
 public:
  explicit BurgersStepper(FomConfig cfg);
  ~BurgersStepper();
  BurgersStepper(BurgersStepper&&) noexcept;
  BurgersStepper& operator=(BurgersStepper&&) noexcept;

  /// Throws NonConvergence (with the residual history) when newton_tol is
  /// not met within newton_max_iter updates.
  StepResult step(const StateVector& u_prev);

  const FomConfig& config() const { return cfg_; }

 private:
  struct Solver;
  FomConfig cfg_;
  std::unique_ptr<Solver> solver_;
};

StateVector step(const StateVector& u_prev, const FomConfig& cfg);

struct SimulationStats {
  std::size_t steps = 0;
  std::size_t newton_iterations = 0;
  double max_final_residual = 0.0;
};

/// Full trajectory from initial_state with f(u_n) recorded at every level.
/// Nonconvergence is rethrown with the failing step index.
Trajectory simulate(const ParamPoint& mu, const FomConfig& cfg, SimulationStats* stats = nullptr);

/// Process-wide count of backward-Euler steps taken (instrumentation).
std::uint64_t fom_step_count();

}  // namespace glasdi
