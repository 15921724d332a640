#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ldg/boundary.hpp"
#include "ldg/grid.hpp"

namespace ldg {

/// Model parameters. epsilon = +infinity selects the harmonic (bulk-free)
/// limit used as the reference for large-epsilon convergence studies.
struct EnergyParams {
  double epsilon = 1.0;
  BoundarySpec bc{};

  double inv_eps2() const { return std::isinf(epsilon) ? 0.0 : 1.0 / (epsilon * epsilon); }
  void validate(const RectDomain& domain) const;
};

/// Maps active nodes (interior in Dirichlet mode, all nodes in Robin mode)
/// to unknown indices. Components are interleaved: 2k is q11, 2k+1 is q12.
class DofMap {
 public:
  DofMap(const Grid& grid, AnchoringMode mode);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_dofs() const { return 2 * nodes_.size(); }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  /// -1 for inactive (Dirichlet boundary) nodes.
  long dof_node(std::size_t flat) const { return node_to_dof_[flat]; }

  Eigen::VectorXd gather(const QField& field) const;
  void scatter(const Eigen::VectorXd& x, QField& field) const;
  /// Diagonal of the lumped mass (trapezoidal area weight per unknown).
  Eigen::VectorXd mass(const Grid& grid) const;

 private:
  std::vector<std::size_t> nodes_;
  std::vector<long> node_to_dof_;
};

/// Overwrites boundary nodes with the Dirichlet trace (no-op in Robin mode).
void apply_dirichlet(QField& field, const BoundarySpec& bc);

/// Throws std::invalid_argument if, in Dirichlet mode, the boundary of
/// `field` deviates from the trace by more than 1e-12.
void check_boundary(const QField& field, const BoundarySpec& bc);

/// Discrete reduced free energy
///   sum_edges 2|dQ|^2 + sum_nodes w (eps^-2 (|Q|^2-1)^2 - 32/27 eps^-2)
///   [+ 2 tau sum_boundary l |Q - g|^2 in Robin mode]
/// with trapezoidal weights. The gradient term counts both off-diagonal
/// entries of the symmetric traceless tensor, which makes the stationarity
/// condition Delta Q = eps^-2 (|Q|^2 - 1) Q.
double energy(const QField& field, const EnergyParams& p);

/// Euler-Lagrange residual R = Delta_h Q - eps^-2 (|Q|^2 - 1) Q (interior),
/// with the natural boundary condition folded in at boundary nodes in Robin
/// mode. R = -grad E / (4 w) node by node, so gradient flow is Q += dt R.
/// Inactive boundary entries are zero.
QField residual(const QField& field, const EnergyParams& p);

/// Directional derivative of residual() at `field` along `v`.
QField hessian_apply(const QField& field, const EnergyParams& p, const QField& v);

/// -dR/deps-free part: dR/d(epsilon) = 2 eps^-3 (|Q|^2 - 1) Q.
QField residual_eps_derivative(const QField& field, const EnergyParams& p);

/// Max norm of the residual over active nodes.
double residual_norm(const QField& field, const EnergyParams& p);

/// Symmetric stiffness S = -W dR/dQ (W = lumped mass), i.e. one quarter of
/// the Hessian of energy() restricted to the active unknowns.
Eigen::SparseMatrix<double> assemble_stiffness(const QField& field, const EnergyParams& p,
                                               const DofMap& dofs);

/// Discrete weighted inner product sum_n w_n (u11 v11 + u12 v12).
double weighted_dot(const QField& u, const QField& v);

/// Precomputed quadrature data for repeated evaluation on one grid (gradient
/// flow, continuation). Skips boundary validation.
class DiscreteModel {
 public:
  DiscreteModel(const Grid& grid, const EnergyParams& params);

  const EnergyParams& params() const { return params_; }
  void set_epsilon(double epsilon) { params_.epsilon = epsilon; }

  /// Returns the energy; writes the residual into `out` when non-null.
  double evaluate(const QField& field, QField* out) const;

  /// Upper bound on the spectral radius of dR/dQ for fields with |Q|^2 <= max_s2.
  double stiffness_bound(double max_s2) const;

 private:
  Grid grid_;
  EnergyParams params_;
  std::vector<double> inv_w_;
  std::vector<double> w_;
  std::vector<double> robin_coef_;  ///< tau * l / w on boundary nodes (Robin mode)
  BoundaryTrace trace_;
};

/// Domain averages used as branch coordinates.
struct FieldDiagnostics {
  double m11 = 0.0;        ///< avg (x+y) q11
  double m12 = 0.0;        ///< avg (x+y) q12
  double mean_q11_sq = 0.0;
  double mean_q12_sq = 0.0;
  double mean_s2 = 0.0;
  double max_s2 = 0.0;
};

FieldDiagnostics diagnostics(const QField& field);

}  // namespace ldg
