#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ldg/classify.hpp"
#include "ldg/energy.hpp"

namespace ldg {

struct SolverReport {
  bool converged = false;
  int iterations = 0;
  double final_residual_norm = 0.0;
  double energy = 0.0;
  std::vector<double> residual_history;  ///< max-norm residual before each iteration
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, SolverReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolverReport& report() const { return report_; }

 private:
  SolverReport report_;
};

class SingularLinearization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepUnstable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotAnEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse factorisation of S - shift*M on the active unknowns, where S is the
/// stiffness (one quarter of the energy Hessian) and M the lumped mass.
/// The symbolic analysis is computed once per instance and reused.
class StiffnessSolver {
 public:
  StiffnessSolver(const Grid& grid, AnchoringMode mode);

  /// Returns false if no factorisation succeeds.
  bool factorize(const QField& field, const EnergyParams& p, double shift = 0.0);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// True when the last factorisation was an LDL^T with all pivots positive.
  bool positive_definite() const { return positive_definite_; }
  /// Number of negative pivots of the last LDL^T (-1 if LU was used).
  long negative_pivots() const { return negative_pivots_; }

  const DofMap& dofs() const { return dofs_; }
  const Eigen::VectorXd& mass() const { return mass_; }

 private:
  DofMap dofs_;
  Eigen::VectorXd mass_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
  bool use_lu_ = false;
  bool positive_definite_ = false;
  long negative_pivots_ = -1;
};

struct NewtonResult {
  QField field;
  SolverReport report;
};

/// Damped Newton on R(Q) = 0. Each step solves S dQ = W R and backtracks on
/// the weighted L2 norm of R. Convergence is tested on the max norm.
/// Returns converged = false after max_iter; throws SingularLinearization
/// when the linearisation cannot be factorised.
NewtonResult newton_solve(const QField& init, const EnergyParams& p, double tol = 1e-10,
                          int max_iter = 50);

/// Same as newton_solve but throws NonConvergence instead of returning
/// converged = false.
NewtonResult newton_solve_or_throw(const QField& init, const EnergyParams& p,
                                   double tol = 1e-10, int max_iter = 50);

/// Discrete harmonic map with the same boundary treatment (bulk term off).
QField harmonic_limit(const Grid& grid, const BoundarySpec& bc);

struct FlowOptions {
  double dt = 0.0;             ///< 0 selects the default step
  double stop_tol = 1e-8;      ///< max-norm residual
  long snap_every = 1000;
  long max_steps = 5'000'000;
  double max_seconds = 600.0;  ///< wall-clock budget; the run stops unconverged past it
};

struct Snapshot {
  double time = 0.0;
  QField field;
  double energy = 0.0;
};

struct RelaxationTrajectory {
  std::vector<Snapshot> snapshots;
  SolutionClass terminal_class;
  bool converged = false;
  long steps = 0;
  double dt = 0.0;  ///< step in use at the end
  double final_residual_norm = 0.0;
};

/// Default explicit step: min(0.2 h^2, 1.8 / rho) with rho a bound on the
/// spectral radius of dR/dQ over fields with |Q|^2 <= max_s2.
double default_flow_step(const Grid& grid, const EnergyParams& p, double max_s2);

/// Explicit Euler steepest descent Q <- Q + dt R(Q). A requested dt above the
/// default stability bound is clamped to it. Snapshots are taken at step 0,
/// every snap_every steps and at the final state. If the energy rises for 3
/// consecutive steps the run rewinds and halves dt; after 10 halvings
/// StepUnstable is thrown.
RelaxationTrajectory gradient_flow(const QField& init, const EnergyParams& p,
                                   const FlowOptions& opts = {});

struct EigenResult {
  double lambda_min = 0.0;
  QField eigvec;          ///< unit norm in weighted_dot
  double residual = 0.0;  ///< weighted L2 norm of (-H - lambda) v
};

/// Smallest eigenvalue of the second variation -dR/dQ (self-adjoint in the
/// weighted inner product) restricted to active unknowns. Shift-invert
/// Lanczos with a certified lower shift; `tol` bounds the eigen-residual.
/// Throws NotAnEquilibrium if the residual of `field` exceeds `equilibrium_tol`.
EigenResult smallest_eigenvalue(const QField& field, const EnergyParams& p, double tol = 1e-9,
                                double equilibrium_tol = 1e-6, std::uint64_t seed = 12345);

}  // namespace ldg
