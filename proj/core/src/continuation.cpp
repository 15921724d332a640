#include "ldg/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "ldg/analytic.hpp"

namespace ldg {

namespace {

double rms_distance(const QField& u, const QField& v) {
  QField d(u.grid);
  for (std::size_t n = 0; n < u.size(); ++n) {
    d.q11[n] = u.q11[n] - v.q11[n];
    d.q12[n] = u.q12[n] - v.q12[n];
  }
  return std::sqrt(weighted_dot(d, d) / u.grid.domain().area());
}

// Natural-parameter solve at `epsilon` started from `from`; accepted only if
// it converges and stays within `max_distance` (RMS) of the start.
std::optional<QField> nearby_solution(const QField& from, const BoundarySpec& bc, double epsilon,
                                      double tol, double max_distance) {
  try {
    auto res = newton_solve(from, {epsilon, bc}, tol, 25);
    if (!res.report.converged) return std::nullopt;
    if (rms_distance(res.field, from) > max_distance) return std::nullopt;
    return std::move(res.field);
  } catch (const SingularLinearization&) {
    return std::nullopt;
  }
}

bool q12_reversed(const QField& before, const QField& after) {
  const Grid& g = before.grid;
  double dot = 0.0, nb = 0.0, na = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      const double w = g.area_weight(i, j);
      dot += w * before.q12[n] * after.q12[n];
      nb += w * before.q12[n] * before.q12[n];
      na += w * after.q12[n] * after.q12[n];
    }
  }
  const double floor = 1e-12 * g.domain().area();
  if (na <= floor || nb <= floor) return false;
  return dot < -0.25 * std::sqrt(na * nb);
}

class ArclengthStepper {
 public:
  ArclengthStepper(const Grid& grid, const BoundarySpec& bc, const ContinuationPolicy& pol)
      : bc_(bc), pol_(pol), lin_(grid, bc.mode), area_(grid.domain().area()) {}

  const DofMap& dofs() const { return lin_.dofs(); }

  double norm2(const Eigen::VectorXd& dx, double de) const {
    return dx.dot(lin_.mass().cwiseProduct(dx)) / area_ + de * de;
  }

  // d(field)/d(epsilon) along the branch through (q, eps).
  std::optional<Eigen::VectorXd> slope(const QField& q, double eps) {
    const EnergyParams p{eps, bc_};
    if (!lin_.factorize(q, p)) return std::nullopt;
    const Eigen::VectorXd rhs =
        lin_.mass().cwiseProduct(dofs().gather(residual_eps_derivative(q, p)));
    Eigen::VectorXd y = lin_.solve(rhs);
    if (!y.allFinite()) return std::nullopt;
    return y;
  }

  // Bordered Newton corrector from the predictor (xq, e) on the hyperplane
  // orthogonal to the tangent (tq, te). `q` supplies the boundary values.
  bool correct(QField& q, double& e, const Eigen::VectorXd& tq, double te, int& iterations) {
    const Eigen::VectorXd x_pred = dofs().gather(q);
    const double e_pred = e;
    const Eigen::VectorXd& mass = lin_.mass();
    const Eigen::VectorXd c = mass.cwiseProduct(tq) / area_;
    Eigen::VectorXd x = x_pred;
    for (int it = 0;; ++it) {
      if (!(e > 0.0)) return false;
      const EnergyParams p{e, bc_};
      dofs().scatter(x, q);
      const QField r = residual(q, p);
      double rmax = 0.0;
      for (std::size_t n = 0; n < r.size(); ++n) {
        rmax = std::max({rmax, std::abs(r.q11[n]), std::abs(r.q12[n])});
      }
      const double constraint = c.dot(x - x_pred) + te * (e - e_pred);
      if (!std::isfinite(rmax)) return false;
      if (rmax <= pol_.tol && std::abs(constraint) <= 1e-12) {
        iterations = it;
        return true;
      }
      if (it >= pol_.max_corrector_iter) return false;
      if (!lin_.factorize(q, p)) return false;
      const Eigen::VectorXd y1 = lin_.solve(mass.cwiseProduct(dofs().gather(r)));
      const Eigen::VectorXd y2 =
          lin_.solve(mass.cwiseProduct(dofs().gather(residual_eps_derivative(q, p))));
      const double denom = c.dot(y2) + te;
      if (!y1.allFinite() || !y2.allFinite() || std::abs(denom) < 1e-14) return false;
      const double de = (-constraint - c.dot(y1)) / denom;
      x += y1 + de * y2;
      e += de;
    }
  }

 private:
  BoundarySpec bc_;
  ContinuationPolicy pol_;
  StiffnessSolver lin_;
  double area_;
};

}  // namespace

std::string BranchPoint::tag() const {
  return (stable() ? "s" : "u") + std::string(to_string(class_label.label));
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::RangeEnd: return "RangeEnd";
    case Termination::EndPoint: return "EndPoint";
    case Termination::Fold: return "Fold";
    case Termination::MaxPoints: return "MaxPoints";
  }
  return "RangeEnd";
}

BranchPoint make_branch_point(const QField& field, const EnergyParams& p, double tol) {
  const double rn = residual_norm(field, p);
  if (!(rn <= tol)) {
    throw SeedNotConverged("field is not an equilibrium at eps=" + std::to_string(p.epsilon) +
                           " (residual " + std::to_string(rn) + ")");
  }
  const auto diag = diagnostics(field);
  BranchPoint bp{.epsilon = p.epsilon,
                 .field = field,
                 .energy = energy(field, p),
                 .lambda_min = smallest_eigenvalue(field, p, 1e-9, std::max(tol, 1e-6)).lambda_min,
                 .class_label = classify(field),
                 .m11 = diag.m11,
                 .m12 = diag.m12,
                 .int_q12_sq = diag.mean_q12_sq};
  return bp;
}

double refine_transition(const BranchPoint& before, const BranchPoint& after,
                         const BoundarySpec& bc, double resolution, double tol) {
  const std::string from = before.tag();
  double lo = before.epsilon, hi = after.epsilon;
  QField state = before.field;
  while (std::abs(hi - lo) > resolution) {
    const double mid = 0.5 * (lo + hi);
    const EnergyParams p{mid, bc};
    bool same = false;
    try {
      auto res = newton_solve(state, p, tol, 25);
      if (res.report.converged) {
        const BranchPoint bp = make_branch_point(res.field, p, std::max(tol, 1e-9));
        if (bp.tag() == from) {
          same = true;
          state = std::move(res.field);
        }
      }
    } catch (const std::runtime_error&) {
    }
    (same ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Branch continue_branch(const BranchPoint& seed, const BoundarySpec& bc, EpsRange range,
                       int direction, const ContinuationPolicy& pol) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +1 or -1");
  if (!(range.lo > 0.0) || !(range.lo < range.hi)) {
    throw std::invalid_argument("epsilon range must satisfy 0 < lo < hi");
  }
  const double slack = 1e-12 * range.hi;
  if (seed.epsilon < range.lo - slack || seed.epsilon > range.hi + slack) {
    throw std::invalid_argument("seed epsilon lies outside the continuation range");
  }
  if (!(residual_norm(seed.field, {seed.epsilon, bc}) <= std::max(pol.tol, 1e-9))) {
    throw SeedNotConverged("seed is not an equilibrium");
  }

  const Grid& grid = seed.field.grid;
  const double end = direction > 0 ? range.hi : range.lo;
  ArclengthStepper stepper(grid, bc, pol);
  const DofMap& dofs = stepper.dofs();

  Branch br;
  br.points.push_back(seed);
  QField cur = seed.field;
  double eps = seed.epsilon;
  Eigen::VectorXd x = dofs.gather(cur), x_prev;
  double eps_prev = eps;
  bool have_prev = false;
  double ds = std::clamp(pol.initial_step, pol.min_step, pol.max_step);
  int easy = 0;

  auto accept = [&](QField q, double e) {
    br.points.push_back(make_branch_point(q, {e, bc}, std::max(pol.tol, 1e-9)));
    x_prev = x;
    eps_prev = eps;
    cur = std::move(q);
    eps = e;
    x = dofs.gather(cur);
  };

  // Natural-parameter restart just past the current point.
  auto jump = [&]() {
    double target = eps + direction * pol.jump_offset;
    if ((target - end) * direction > 0.0) target = end;
    auto q = nearby_solution(cur, bc, target, pol.tol, pol.jump_distance);
    if (!q) return false;
    accept(std::move(*q), target);
    have_prev = false;
    easy = 0;
    return true;
  };

  while (true) {
    if (std::abs(eps - end) <= slack) {
      br.terminated = Termination::RangeEnd;
      break;
    }
    if (static_cast<int>(br.points.size()) >= pol.max_points) {
      br.terminated = Termination::MaxPoints;
      break;
    }

    Eigen::VectorXd tq;
    double te = 0.0;
    if (have_prev) {
      tq = x - x_prev;
      te = eps - eps_prev;
    } else {
      auto y = stepper.slope(cur, eps);
      if (!y) {
        if (jump()) continue;
        br.terminated = Termination::EndPoint;
        break;
      }
      tq = direction * *y;
      te = direction;
    }
    const double tn = std::sqrt(stepper.norm2(tq, te));
    tq /= tn;
    te /= tn;

    bool ok = false;
    QField q = cur;
    double e = eps;
    int iterations = 0;
    for (int halvings = 0; halvings <= pol.max_halvings; ++halvings) {
      q = cur;
      dofs.scatter(x + ds * tq, q);
      e = eps + ds * te;
      if (stepper.correct(q, e, tq, te, iterations)) {
        ok = true;
        break;
      }
      ds = std::max(0.5 * ds, pol.min_step);
      easy = 0;
    }
    if (!ok) {
      if (pol.at_fold == FoldPolicy::Jump && jump()) continue;
      br.terminated = Termination::EndPoint;
      break;
    }

    // A reversed q12 pattern means the step went through a symmetric
    // branch point onto the mirror branch; handle it like a turn.
    if ((e - eps) * direction <= 0.0 || q12_reversed(cur, q)) {
      br.folds.push_back(eps);
      if (pol.at_fold == FoldPolicy::Stop) {
        br.terminated = Termination::Fold;
        break;
      }
      if (jump()) continue;
      br.terminated = Termination::EndPoint;
      break;
    }

    if ((e - end) * direction > 0.0) {
      auto last = nearby_solution(cur, bc, end, pol.tol, pol.jump_distance);
      if (last) {
        accept(std::move(*last), end);
        br.terminated = Termination::RangeEnd;
        break;
      }
      ds = std::max(0.5 * ds, pol.min_step);
      continue;
    }

    accept(std::move(q), e);
    have_prev = true;
    if (iterations <= pol.easy_iter) {
      if (++easy >= pol.easy_accepts_to_double) {
        ds = std::min(2.0 * ds, pol.max_step);
        easy = 0;
      }
    } else {
      easy = 0;
    }
  }

  for (std::size_t k = 1; k < br.points.size(); ++k) {
    const auto& before = br.points[k - 1];
    const auto& after = br.points[k];
    if (before.tag() == after.tag()) continue;
    const double where =
        pol.refine_transitions
            ? refine_transition(before, after, bc, pol.transition_resolution, pol.tol)
            : 0.5 * (before.epsilon + after.epsilon);
    br.transitions.push_back({where, before.tag(), after.tag()});
  }
  return br;
}

QField theta_seed(const Grid& grid, const ThetaEdges& edges, const BoundarySpec& bc) {
  QField q = lift_theta(sample_theta_harmonic(grid, edges));
  apply_dirichlet(q, bc);
  return q;
}

SeedLibrary seed_library(const Grid& grid, const BoundarySpec& bc, double eps_small,
                         double eps_large) {
  SeedLibrary lib;
  auto polish = [&](const std::string& name, const QField& init, double eps,
                    std::vector<SeedEntry>& into) {
    const EnergyParams p{eps, bc};
    try {
      auto res = newton_solve(init, p, 1e-10, 60);
      if (!res.report.converged) {
        lib.failed.push_back(name + "@" + std::to_string(eps));
        return;
      }
      for (const auto& e : into) {
        if (max_abs_diff(e.point.field, res.field) <= 1e-6) return;
      }
      into.push_back({name, make_branch_point(res.field, p)});
    } catch (const std::runtime_error&) {
      lib.failed.push_back(name + "@" + std::to_string(eps));
    }
  };

  for (auto st : kTrivialStates) {
    polish(std::string(to_string(st)), theta_seed(grid, theta_edges(st), bc), eps_small, lib.small);
  }
  QField limit = bc.mode == AnchoringMode::Dirichlet ? sample_strong_limit(grid, bc.d)
                                                     : harmonic_limit(grid, bc);
  apply_dirichlet(limit, bc);
  polish("limit", limit, eps_large, lib.large);
  for (auto st : kTrivialStates) {
    polish(std::string(to_string(st)), theta_seed(grid, theta_edges(st), bc), eps_large, lib.large);
  }
  return lib;
}

std::vector<NamedTransition> transition_parameters(const std::vector<Branch>& branches,
                                                   const Grid& grid) {
  std::vector<NamedTransition> out;
  for (const auto& br : branches) {
    for (const auto& t : br.transitions) {
      out.push_back({t.name(), t.epsilon, grid.domain().a, grid.domain().b, grid.hx()});
    }
  }
  return out;
}

const NamedTransition& find_transition(const std::vector<NamedTransition>& table,
                                       const std::string& name) {
  for (const auto& t : table) {
    if (t.name == name) return t;
  }
  throw MissingTransition("no transition named " + name);
}

}  // namespace ldg
