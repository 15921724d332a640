#include "ldg/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace ldg {

namespace {

double max_abs(const QField& f) {
  double m = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    m = std::max({m, std::abs(f.q11[n]), std::abs(f.q12[n])});
  }
  return m;
}

double weighted_norm(const QField& f) { return std::sqrt(weighted_dot(f, f)); }

double max_s2_of(const QField& f) {
  double m = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    m = std::max(m, f.q11[n] * f.q11[n] + f.q12[n] * f.q12[n]);
  }
  return m;
}

}  // namespace

StiffnessSolver::StiffnessSolver(const Grid& grid, AnchoringMode mode)
    : dofs_(grid, mode), mass_(dofs_.mass(grid)) {}

bool StiffnessSolver::factorize(const QField& field, const EnergyParams& p, double shift) {
  Eigen::SparseMatrix<double> s = assemble_stiffness(field, p, dofs_);
  if (shift != 0.0) {
    for (Eigen::Index k = 0; k < s.rows(); ++k) s.coeffRef(k, k) -= shift * mass_[k];
  }
  positive_definite_ = false;
  negative_pivots_ = -1;
  use_lu_ = false;
  if (!analyzed_) {
    ldlt_.analyzePattern(s);
    analyzed_ = true;
  }
  ldlt_.factorize(s);
  if (ldlt_.info() == Eigen::Success) {
    const auto& d = ldlt_.vectorD();
    const double scale = d.cwiseAbs().maxCoeff();
    const double smallest = d.cwiseAbs().minCoeff();
    if (d.allFinite() && smallest > 1e-14 * scale) {
      negative_pivots_ = static_cast<long>((d.array() < 0.0).count());
      positive_definite_ = negative_pivots_ == 0;
      return true;
    }
  }
  // Fall back to pivoted LU near singular or badly ordered points.
  lu_.analyzePattern(s);
  lu_.factorize(s);
  if (lu_.info() != Eigen::Success) return false;
  use_lu_ = true;
  return true;
}

Eigen::VectorXd StiffnessSolver::solve(const Eigen::VectorXd& rhs) const {
  return use_lu_ ? Eigen::VectorXd(lu_.solve(rhs)) : Eigen::VectorXd(ldlt_.solve(rhs));
}

NewtonResult newton_solve(const QField& init, const EnergyParams& p, double tol, int max_iter) {
  check_boundary(init, p.bc);
  const Grid& g = init.grid;
  const DiscreteModel model(g, p);
  StiffnessSolver lin(g, p.bc.mode);
  const DofMap& dofs = lin.dofs();
  const Eigen::VectorXd& mass = lin.mass();

  NewtonResult out{init, {}};
  QField& q = out.field;
  QField r(g), rt(g), trial(g);
  double e = model.evaluate(q, &r);
  SolverReport& rep = out.report;

  for (int it = 0;; ++it) {
    const double rn = max_abs(r);
    rep.residual_history.push_back(rn);
    rep.final_residual_norm = rn;
    rep.energy = e;
    rep.iterations = it;
    if (rn <= tol) {
      rep.converged = true;
      break;
    }
    if (it >= max_iter || !std::isfinite(rn)) break;

    if (!lin.factorize(q, p)) throw SingularLinearization("stiffness matrix is singular");
    const Eigen::VectorXd rhs = mass.cwiseProduct(dofs.gather(r));
    const Eigen::VectorXd delta = lin.solve(rhs);
    if (!delta.allFinite()) throw SingularLinearization("Newton step is not finite");

    const double phi0 = weighted_norm(r);
    const Eigen::VectorXd x0 = dofs.gather(q);
    double alpha = 1.0;
    double best_phi = std::numeric_limits<double>::infinity();
    double best_alpha = alpha;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      trial = q;
      dofs.scatter(x0 + alpha * delta, trial);
      model.evaluate(trial, &rt);
      const double phi = weighted_norm(rt);
      if (phi <= (1.0 - 1e-4 * alpha) * phi0 || max_abs(rt) <= tol) {
        accepted = true;
        break;
      }
      if (phi < best_phi) {
        best_phi = phi;
        best_alpha = alpha;
      }
    }
    if (!accepted) {
      alpha = best_alpha;
      trial = q;
      dofs.scatter(x0 + alpha * delta, trial);
    }
    q = trial;
    e = model.evaluate(q, &r);
  }
  return out;
}

NewtonResult newton_solve_or_throw(const QField& init, const EnergyParams& p, double tol,
                                   int max_iter) {
  auto res = newton_solve(init, p, tol, max_iter);
  if (!res.report.converged) {
    throw NonConvergence("Newton did not converge in " + std::to_string(max_iter) +
                             " iterations (residual " +
                             std::to_string(res.report.final_residual_norm) + ")",
                         res.report);
  }
  return res;
}

QField harmonic_limit(const Grid& grid, const BoundarySpec& bc) {
  QField init(grid);
  apply_dirichlet(init, bc);
  EnergyParams p{std::numeric_limits<double>::infinity(), bc};
  return newton_solve_or_throw(init, p, 1e-11, 5).field;
}

double default_flow_step(const Grid& grid, const EnergyParams& p, double max_s2) {
  const double h = std::min(grid.hx(), grid.hy());
  const double rho = DiscreteModel(grid, p).stiffness_bound(max_s2);
  return std::min(0.2 * h * h, 0.9 * 2.0 / rho);
}

RelaxationTrajectory gradient_flow(const QField& init, const EnergyParams& p,
                                   const FlowOptions& opts) {
  check_boundary(init, p.bc);
  if (opts.dt < 0.0 || !(opts.stop_tol > 0.0) || opts.snap_every <= 0) {
    throw std::invalid_argument("gradient_flow: dt >= 0, stop_tol > 0 and snap_every > 0 required");
  }
  const Grid& g = init.grid;
  const DiscreteModel model(g, p);
  const double dt_max = default_flow_step(g, p, max_s2_of(init));
  double dt = opts.dt > 0.0 ? std::min(opts.dt, dt_max) : dt_max;

  RelaxationTrajectory traj;
  QField q = init, r(g);
  double e = model.evaluate(q, &r);
  double rn = max_abs(r);
  double t = 0.0;
  long step = 0;
  traj.snapshots.push_back({t, q, e});

  constexpr long kCheckpointEvery = 64;
  QField checkpoint = q;
  double checkpoint_t = t;
  long checkpoint_step = 0;
  int rises = 0, halvings = 0;

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_nodes = g.size();
  while (rn > opts.stop_tol && step < opts.max_steps) {
    if ((step & 255) == 0 && opts.max_seconds > 0.0) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (el.count() > opts.max_seconds) break;
    }
    for (std::size_t n = 0; n < n_nodes; ++n) {
      q.q11[n] += dt * r.q11[n];
      q.q12[n] += dt * r.q12[n];
    }
    const double e_new = model.evaluate(q, &r);
    rn = max_abs(r);
    ++step;
    t += dt;

    if (!(e_new <= e + 1e-12 * std::max(1.0, std::abs(e)))) {
      if (++rises >= 3 || !std::isfinite(e_new)) {
        if (++halvings > 10) throw StepUnstable("energy keeps increasing after 10 step halvings");
        dt *= 0.5;
        q = checkpoint;
        e = model.evaluate(q, &r);
        rn = max_abs(r);
        t = checkpoint_t;
        step = checkpoint_step;
        while (traj.snapshots.size() > 1 && traj.snapshots.back().time > t) traj.snapshots.pop_back();
        rises = 0;
        continue;
      }
    } else {
      rises = 0;
    }
    e = e_new;
    if (step % kCheckpointEvery == 0 && rises == 0) {
      checkpoint = q;
      checkpoint_t = t;
      checkpoint_step = step;
    }
    if (step % opts.snap_every == 0) traj.snapshots.push_back({t, q, e});
  }
  if (traj.snapshots.back().time != t) traj.snapshots.push_back({t, q, e});
  traj.converged = rn <= opts.stop_tol;
  traj.steps = step;
  traj.dt = dt;
  traj.final_residual_norm = rn;
  traj.terminal_class = classify(q);
  return traj;
}

namespace {

struct RitzPair {
  double theta = 0.0;
  Eigen::VectorXd u;
};

// Largest eigenpair of a symmetric positive operator by Lanczos with full
// reorthogonalisation.
template <class Op>
RitzPair lanczos_top(const Op& op, const Eigen::VectorXd& start, int max_steps, double rel_tol) {
  const Eigen::Index n = start.size();
  const int kmax = static_cast<int>(std::min<Eigen::Index>(max_steps, n));
  Eigen::MatrixXd basis(n, kmax);
  std::vector<double> alpha, beta;
  basis.col(0) = start.normalized();
  Eigen::VectorXd y;
  double theta = 0.0;
  int used = 0;
  for (int j = 0; j < kmax; ++j) {
    Eigen::VectorXd w = op(basis.col(j));
    alpha.push_back(basis.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * c;
    }
    beta.push_back(w.norm());
    used = j + 1;

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(used, used);
    for (int k = 0; k < used; ++k) {
      tri(k, k) = alpha[k];
      if (k + 1 < used) tri(k, k + 1) = tri(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    theta = es.eigenvalues()(used - 1);
    y = es.eigenvectors().col(used - 1);
    const double est = std::abs(beta[j] * y(used - 1));
    if (est <= rel_tol * std::abs(theta) || beta[j] <= 1e-14 * std::abs(theta) || j + 1 == kmax) {
      break;
    }
    basis.col(j + 1) = w / beta[j];
  }
  return {theta, basis.leftCols(used) * y};
}

}  // namespace

EigenResult smallest_eigenvalue(const QField& field, const EnergyParams& p, double tol,
                                double equilibrium_tol, std::uint64_t seed) {
  check_boundary(field, p.bc);
  const double rn = residual_norm(field, p);
  if (!(rn <= equilibrium_tol)) {
    throw NotAnEquilibrium("residual " + std::to_string(rn) + " exceeds " +
                           std::to_string(equilibrium_tol));
  }
  const Grid& g = field.grid;
  StiffnessSolver lin(g, p.bc.mode);
  const DofMap& dofs = lin.dofs();
  const Eigen::VectorXd sqrt_m = lin.mass().cwiseSqrt();
  const Eigen::SparseMatrix<double> stiff = assemble_stiffness(field, p, dofs);
  const Eigen::Index n = static_cast<Eigen::Index>(dofs.num_dofs());

  // The bulk block is bounded below by eps^-2 (|Q|^2 - 1); gradient and
  // surface terms are non-negative.
  double deficit = 0.0;
  for (auto node : dofs.nodes()) {
    const double s2 = field.q11[node] * field.q11[node] + field.q12[node] * field.q12[node];
    deficit = std::max(deficit, 1.0 - s2);
  }
  const double lower = -p.inv_eps2() * deficit;
  double sigma = lower - 1.0 - 0.01 * std::abs(lower);
  if (!lin.factorize(field, p, sigma) || !lin.positive_definite()) {
    throw SingularLinearization("shifted stiffness is not positive definite at the lower bound");
  }
  double sigma_lo = sigma;

  std::mt19937_64 rng(seed);
  Eigen::VectorXd u(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    u[k] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }

  auto true_residual = [&](const Eigen::VectorXd& unit, double lambda) {
    const Eigen::VectorXd v = unit.cwiseQuotient(sqrt_m);
    const Eigen::VectorXd res = (stiff * v - lambda * lin.mass().cwiseProduct(v)).cwiseQuotient(sqrt_m);
    return res.norm();
  };

  EigenResult best{std::numeric_limits<double>::infinity(), QField(g),
                   std::numeric_limits<double>::infinity()};
  Eigen::VectorXd best_u;
  for (int pass = 0; pass < 8; ++pass) {
    auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return sqrt_m.cwiseProduct(lin.solve(sqrt_m.cwiseProduct(x)));
    };
    const RitzPair rp = lanczos_top(op, u, pass == 0 ? 120 : 60, 1e-12);
    // Two inverse-iteration sweeps damp the high-frequency rounding left in
    // the Ritz vector; the Rayleigh quotient then gives the eigenvalue.
    Eigen::VectorXd unit = rp.u.normalized();
    for (int k = 0; k < 2; ++k) unit = op(unit).normalized();
    const Eigen::VectorXd vv = unit.cwiseQuotient(sqrt_m);
    const double lambda = vv.dot(stiff * vv);
    const double res = true_residual(unit, lambda);
    if (res < best.residual || (pass > 0 && lambda < best.lambda_min - tol)) {
      best.lambda_min = lambda;
      best.residual = res;
      best_u = unit;
    }
    if (res <= tol * std::max(1.0, 1e-2 * std::abs(lambda))) break;

    // Move the shift towards the estimate while keeping it certified below.
    u = unit;
    double trial = lambda - 0.05 * (lambda - sigma_lo) - 1e-9 * (1.0 + std::abs(lambda));
    bool ok = false;
    for (int k = 0; k < 30; ++k) {
      if (lin.factorize(field, p, trial) && lin.positive_definite()) {
        ok = true;
        break;
      }
      trial = 0.5 * (trial + sigma_lo);
    }
    if (!ok) {
      lin.factorize(field, p, sigma_lo);
      trial = sigma_lo;
    }
    sigma = trial;
    sigma_lo = std::max(sigma_lo, sigma);
  }

  // Sign convention: the largest-magnitude entry is positive.
  Eigen::Index arg = 0;
  best_u.cwiseAbs().maxCoeff(&arg);
  if (best_u[arg] < 0.0) best_u = -best_u;
  dofs.scatter(best_u.cwiseQuotient(sqrt_m), best.eigvec);
  return best;
}

}  // namespace ldg
