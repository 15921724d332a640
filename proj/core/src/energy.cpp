#include "ldg/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldg {

namespace {

constexpr double kBulkShift = 32.0 / 27.0;

/// Calls f(n, m, kappa) for every grid edge, kappa = w * h_perp / h_par with
/// w = 1/2 on edges lying on the boundary.
template <typename F>
void for_each_edge(const Grid& g, F&& f) {
  const double kx = g.hy() / g.hx();
  const double ky = g.hx() / g.hy();
  for (int j = 0; j < g.ny(); ++j) {
    const double w = (j == 0 || j == g.ny() - 1) ? 0.5 : 1.0;
    for (int i = 0; i + 1 < g.nx(); ++i) f(g.index(i, j), g.index(i + 1, j), w * kx);
  }
  for (int j = 0; j + 1 < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double w = (i == 0 || i == g.nx() - 1) ? 0.5 : 1.0;
      f(g.index(i, j), g.index(i, j + 1), w * ky);
    }
  }
}

std::vector<double> node_weights(const Grid& g) {
  std::vector<double> w(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) w[g.index(i, j)] = g.area_weight(i, j);
  return w;
}

/// Boundary arc-length weight of each node (0 in the interior).
std::vector<double> boundary_weights(const Grid& g) {
  std::vector<double> l(g.size(), 0.0);
  for (int i = 0; i < g.nx(); ++i) {
    const double wx = (i == 0 || i == g.nx() - 1) ? 0.5 * g.hx() : g.hx();
    l[g.index(i, 0)] += wx;
    l[g.index(i, g.ny() - 1)] += wx;
  }
  for (int j = 0; j < g.ny(); ++j) {
    const double wy = (j == 0 || j == g.ny() - 1) ? 0.5 * g.hy() : g.hy();
    l[g.index(0, j)] += wy;
    l[g.index(g.nx() - 1, j)] += wy;
  }
  return l;
}

bool robin(const EnergyParams& p) { return p.bc.mode == AnchoringMode::Robin; }

void zero_inactive(QField& f, const EnergyParams& p) {
  if (robin(p)) return;
  for (auto n : f.grid.boundary_nodes()) {
    f.q11[n] = 0.0;
    f.q12[n] = 0.0;
  }
}

void require_same_grid(const QField& a, const QField& b, const char* what) {
  if (!a.grid.same_shape(b.grid)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

void EnergyParams::validate(const RectDomain& domain) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("EnergyParams: epsilon must be positive");
  bc.validate(domain);
}

DofMap::DofMap(const Grid& grid, AnchoringMode mode) : node_to_dof_(grid.size(), -1) {
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (mode == AnchoringMode::Dirichlet && grid.on_boundary(i, j)) continue;
      const auto n = grid.index(i, j);
      node_to_dof_[n] = static_cast<long>(nodes_.size());
      nodes_.push_back(n);
    }
  }
}

Eigen::VectorXd DofMap::gather(const QField& field) const {
  Eigen::VectorXd x(num_dofs());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    x[2 * k] = field.q11[nodes_[k]];
    x[2 * k + 1] = field.q12[nodes_[k]];
  }
  return x;
}

void DofMap::scatter(const Eigen::VectorXd& x, QField& field) const {
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    field.q11[nodes_[k]] = x[2 * k];
    field.q12[nodes_[k]] = x[2 * k + 1];
  }
}

Eigen::VectorXd DofMap::mass(const Grid& grid) const {
  Eigen::VectorXd m(num_dofs());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto n = nodes_[k];
    const int i = static_cast<int>(n % grid.nx());
    const int j = static_cast<int>(n / grid.nx());
    m[2 * k] = m[2 * k + 1] = grid.area_weight(i, j);
  }
  return m;
}

void apply_dirichlet(QField& field, const BoundarySpec& bc) {
  if (bc.mode != AnchoringMode::Dirichlet) return;
  const auto trace = dirichlet_trace(field.grid, bc.d);
  for (auto n : field.grid.boundary_nodes()) {
    field.q11[n] = trace.g1[n];
    field.q12[n] = trace.g2[n];
  }
}

void check_boundary(const QField& field, const BoundarySpec& bc) {
  if (bc.mode != AnchoringMode::Dirichlet) return;
  const auto trace = dirichlet_trace(field.grid, bc.d);
  for (auto n : field.grid.boundary_nodes()) {
    if (std::abs(field.q11[n] - trace.g1[n]) > 1e-12 || std::abs(field.q12[n] - trace.g2[n]) > 1e-12) {
      throw std::invalid_argument("field boundary does not match the Dirichlet trace");
    }
  }
}

DiscreteModel::DiscreteModel(const Grid& grid, const EnergyParams& params)
    : grid_(grid),
      params_(params),
      inv_w_(grid.size()),
      w_(node_weights(grid)),
      robin_coef_(grid.size(), 0.0),
      trace_(dirichlet_trace(grid, params.bc.d)) {
  for (std::size_t n = 0; n < grid.size(); ++n) inv_w_[n] = 1.0 / w_[n];
  if (robin(params_)) {
    const auto l = boundary_weights(grid);
    for (std::size_t n = 0; n < grid.size(); ++n) robin_coef_[n] = params_.bc.tau * l[n] / w_[n];
  }
}

double DiscreteModel::evaluate(const QField& field, QField* out) const {
  const Grid& g = grid_;
  const double* a = field.q11.data();
  const double* b = field.q12.data();
  double* r1 = nullptr;
  double* r2 = nullptr;
  if (out != nullptr) {
    std::fill(out->q11.begin(), out->q11.end(), 0.0);
    std::fill(out->q12.begin(), out->q12.end(), 0.0);
    r1 = out->q11.data();
    r2 = out->q12.data();
  }
  double grad = 0.0;
  for_each_edge(g, [&](std::size_t n, std::size_t m, double kappa) {
    const double d1 = a[m] - a[n];
    const double d2 = b[m] - b[n];
    grad += kappa * (d1 * d1 + d2 * d2);
    if (r1 != nullptr) {
      r1[n] += kappa * d1;
      r2[n] += kappa * d2;
      r1[m] -= kappa * d1;
      r2[m] -= kappa * d2;
    }
  });
  const double ie2 = params_.inv_eps2();
  const bool rob = robin(params_);
  double bulk = 0.0;
  double surface = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double t = a[n] * a[n] + b[n] * b[n] - 1.0;
    bulk += w_[n] * (t * t - kBulkShift);
    double e1 = 0.0, e2 = 0.0;
    if (rob) {
      e1 = a[n] - trace_.g1[n];
      e2 = b[n] - trace_.g2[n];
      surface += robin_coef_[n] * w_[n] * (e1 * e1 + e2 * e2);
    }
    if (r1 != nullptr) {
      r1[n] = r1[n] * inv_w_[n] - ie2 * t * a[n] - robin_coef_[n] * e1;
      r2[n] = r2[n] * inv_w_[n] - ie2 * t * b[n] - robin_coef_[n] * e2;
    }
  }
  if (out != nullptr) zero_inactive(*out, params_);
  return 2.0 * grad + ie2 * bulk + 2.0 * surface;
}

double DiscreteModel::stiffness_bound(double max_s2) const {
  double lap = 0.0;
  for (int j = 0; j < grid_.ny(); ++j) {
    for (int i = 0; i < grid_.nx(); ++i) {
      // Row sum of |Laplacian| is twice the diagonal.
      double diag = 0.0;
      const double kx = grid_.hy() / grid_.hx(), ky = grid_.hx() / grid_.hy();
      const double wr = (j == 0 || j == grid_.ny() - 1) ? 0.5 : 1.0;
      const double wc = (i == 0 || i == grid_.nx() - 1) ? 0.5 : 1.0;
      if (i > 0) diag += wr * kx;
      if (i + 1 < grid_.nx()) diag += wr * kx;
      if (j > 0) diag += wc * ky;
      if (j + 1 < grid_.ny()) diag += wc * ky;
      const auto n = grid_.index(i, j);
      lap = std::max(lap, 2.0 * diag * inv_w_[n] + robin_coef_[n]);
    }
  }
  return lap + params_.inv_eps2() * (3.0 * std::max(1.0, max_s2) + 1.0);
}

double energy(const QField& field, const EnergyParams& p) {
  check_boundary(field, p.bc);
  return DiscreteModel(field.grid, p).evaluate(field, nullptr);
}

QField residual(const QField& field, const EnergyParams& p) {
  check_boundary(field, p.bc);
  QField r(field.grid);
  DiscreteModel(field.grid, p).evaluate(field, &r);
  return r;
}

QField hessian_apply(const QField& field, const EnergyParams& p, const QField& v) {
  require_same_grid(field, v, "hessian_apply");
  const Grid& g = field.grid;
  if (!robin(p)) {
    for (auto n : g.boundary_nodes()) {
      if (v.q11[n] != 0.0 || v.q12[n] != 0.0) {
        throw std::invalid_argument("hessian_apply: direction must vanish on the Dirichlet boundary");
      }
    }
  }
  QField hv(g);
  for_each_edge(g, [&](std::size_t n, std::size_t m, double kappa) {
    const double d1 = v.q11[m] - v.q11[n];
    const double d2 = v.q12[m] - v.q12[n];
    hv.q11[n] += kappa * d1;
    hv.q12[n] += kappa * d2;
    hv.q11[m] -= kappa * d1;
    hv.q12[m] -= kappa * d2;
  });
  const auto w = node_weights(g);
  const auto l = robin(p) ? boundary_weights(g) : std::vector<double>{};
  const double ie2 = p.inv_eps2();
  for (std::size_t n = 0; n < g.size(); ++n) {
    hv.q11[n] /= w[n];
    hv.q12[n] /= w[n];
    const double a = field.q11[n], b = field.q12[n];
    const double t = a * a + b * b - 1.0;
    const double qv = a * v.q11[n] + b * v.q12[n];
    hv.q11[n] -= ie2 * (t * v.q11[n] + 2.0 * qv * a);
    hv.q12[n] -= ie2 * (t * v.q12[n] + 2.0 * qv * b);
    if (robin(p) && l[n] > 0.0) {
      hv.q11[n] -= p.bc.tau * l[n] / w[n] * v.q11[n];
      hv.q12[n] -= p.bc.tau * l[n] / w[n] * v.q12[n];
    }
  }
  zero_inactive(hv, p);
  return hv;
}

QField residual_eps_derivative(const QField& field, const EnergyParams& p) {
  QField out(field.grid);
  if (std::isinf(p.epsilon)) return out;
  const double ie3 = 2.0 / (p.epsilon * p.epsilon * p.epsilon);
  for (std::size_t n = 0; n < field.size(); ++n) {
    const double a = field.q11[n], b = field.q12[n];
    const double t = a * a + b * b - 1.0;
    out.q11[n] = ie3 * t * a;
    out.q12[n] = ie3 * t * b;
  }
  zero_inactive(out, p);
  return out;
}

double residual_norm(const QField& field, const EnergyParams& p) {
  const auto r = residual(field, p);
  double m = 0.0;
  for (std::size_t n = 0; n < r.size(); ++n) m = std::max({m, std::abs(r.q11[n]), std::abs(r.q12[n])});
  return m;
}

Eigen::SparseMatrix<double> assemble_stiffness(const QField& field, const EnergyParams& p,
                                               const DofMap& dofs) {
  const Grid& g = field.grid;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(dofs.num_dofs() * 7);
  for_each_edge(g, [&](std::size_t n, std::size_t m, double kappa) {
    const long kn = dofs.dof_node(n);
    const long km = dofs.dof_node(m);
    for (int c = 0; c < 2; ++c) {
      if (kn >= 0) trip.emplace_back(2 * kn + c, 2 * kn + c, kappa);
      if (km >= 0) trip.emplace_back(2 * km + c, 2 * km + c, kappa);
      if (kn >= 0 && km >= 0) {
        trip.emplace_back(2 * kn + c, 2 * km + c, -kappa);
        trip.emplace_back(2 * km + c, 2 * kn + c, -kappa);
      }
    }
  });
  const auto l = robin(p) ? boundary_weights(g) : std::vector<double>{};
  const double ie2 = p.inv_eps2();
  for (std::size_t k = 0; k < dofs.num_nodes(); ++k) {
    const auto n = dofs.nodes()[k];
    const int i = static_cast<int>(n % g.nx());
    const int j = static_cast<int>(n / g.nx());
    const double w = g.area_weight(i, j);
    const double a = field.q11[n], b = field.q12[n];
    const double t = a * a + b * b - 1.0;
    const long r0 = 2 * static_cast<long>(k);
    double d11 = w * ie2 * (t + 2.0 * a * a);
    double d22 = w * ie2 * (t + 2.0 * b * b);
    const double d12 = w * ie2 * 2.0 * a * b;
    if (robin(p) && l[n] > 0.0) {
      d11 += p.bc.tau * l[n];
      d22 += p.bc.tau * l[n];
    }
    trip.emplace_back(r0, r0, d11);
    trip.emplace_back(r0 + 1, r0 + 1, d22);
    trip.emplace_back(r0, r0 + 1, d12);
    trip.emplace_back(r0 + 1, r0, d12);
  }
  Eigen::SparseMatrix<double> s(static_cast<long>(dofs.num_dofs()), static_cast<long>(dofs.num_dofs()));
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

double weighted_dot(const QField& u, const QField& v) {
  require_same_grid(u, v, "weighted_dot");
  const Grid& g = u.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      s += g.area_weight(i, j) * (u.q11[n] * v.q11[n] + u.q12[n] * v.q12[n]);
    }
  }
  return s;
}

FieldDiagnostics diagnostics(const QField& field) {
  const Grid& g = field.grid;
  FieldDiagnostics d;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      const double w = g.area_weight(i, j);
      const double xy = g.x(i) + g.y(j);
      const double a = field.q11[n], b = field.q12[n];
      d.m11 += w * xy * a;
      d.m12 += w * xy * b;
      d.mean_q11_sq += w * a * a;
      d.mean_q12_sq += w * b * b;
      d.max_s2 = std::max(d.max_s2, a * a + b * b);
    }
  }
  const double area = g.domain().area();
  d.m11 /= area;
  d.m12 /= area;
  d.mean_q11_sq /= area;
  d.mean_q12_sq /= area;
  d.mean_s2 = d.mean_q11_sq + d.mean_q12_sq;
  return d;
}

}  // namespace ldg
