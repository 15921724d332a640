#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "ldg/boundary.hpp"
#include "ldg/grid.hpp"

namespace ldg {

class ToleranceUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr long kSeriesTermCap = 100000;

/// Harmonic function on [0,a]x[0,b] equal to the trapezoid T_{d/a}(x/a) on
/// y = 0 and zero on the other three edges (d = 0: the indicator of the open
/// bottom edge). Summed over odd sine modes until the geometric tail bound is
/// below `tol`. Edge points return the boundary data exactly.
double f_strong(double x, double y, double a, double b, double d, double tol = 1e-13);

/// Gradient (df/dx, df/dy) of f_strong at an interior point.
std::array<double, 2> f_strong_gradient(double x, double y, double a, double b, double d,
                                        double tol = 1e-13);

struct StrongLimit {
  double q11 = 0.0;
  double q12 = 0.0;
};

/// Large-epsilon limit with Dirichlet data: q12 = 0 and q11 the signed
/// superposition of the four edge problems (+ on horizontal, - on vertical).
StrongLimit limit_strong_Q(double x, double y, const RectDomain& domain, double d,
                           double tol = 1e-13);

QField sample_strong_limit(const Grid& grid, double d, double tol = 1e-13);

/// Positive roots of tan(p a) = 2 tau p / (p^2 - tau^2) in increasing order.
/// Root k solves p a - 2 atan(tau/p) = (k-1) pi, which brackets it in
/// ((k-1) pi / a, (k+1) pi / a).
struct RobinRoots {
  double tau = 0.0;
  double a = 0.0;
  std::vector<double> roots;

  /// (p^2 - tau^2) sin(pa) - 2 tau p cos(pa), divided by p^2 + tau^2.
  static double residual(double p, double tau, double a);
};

RobinRoots robin_roots(double tau, double a, int n_roots);

/// Harmonic f on [0,a]x[0,b] with tau f + df/dn-outward = tau on y = b and
/// the homogeneous Robin condition on the other edges, as the eigenfunction
/// series over `roots` (which must be computed for width a).
double f_weak(double x, double y, double b, const RobinRoots& roots);
double f_weak(double x, double y, double a, double b, double tau, int n_roots);

/// Robin-anchoring counterpart of limit_strong_Q11 with +-1 edge data.
class WeakLimit {
 public:
  WeakLimit(const RectDomain& domain, double tau, int n_roots = 4000);

  double q11(double x, double y) const;
  const RectDomain& domain() const { return domain_; }

 private:
  RectDomain domain_;
  RobinRoots roots_a_;  // modes along x, width a
  RobinRoots roots_b_;  // modes along y, width b
};

double limit_weak_Q11(double x, double y, const RectDomain& domain, double tau);
QField sample_weak_limit(const Grid& grid, double tau, int n_roots = 4000);

/// Harmonic director angle with constant edge values (bottom, right, top,
/// left), built from the d -> 0 edge problems.
double theta_harmonic(const ThetaEdges& edges, const RectDomain& domain, double x, double y,
                      double tol = 1e-13);
ThetaField sample_theta_harmonic(const Grid& grid, const ThetaEdges& edges,
                                 double tol = 1e-13);

struct QuadrantEnergy {
  double cutoff = 0.0;
  double d1 = 0.0;
  double r3 = 0.0;
};

/// Dirichlet energy of two harmonic angles over [0,a/2]x[0,b/2] outside a
/// disc of radius `cutoff` about the corner. Defaults compare the D1 and R3
/// angles; one value is returned per cutoff.
std::vector<QuadrantEnergy> dirichlet_energy_compare(
    const RectDomain& domain, const std::vector<double>& cutoffs = {1e-1, 1e-2, 1e-3},
    const ThetaEdges& first = theta_edges(ThetaState::D1),
    const ThetaEdges& second = theta_edges(ThetaState::R3));

/// Quadrant Dirichlet energy of one harmonic angle.
double quadrant_dirichlet_energy(const RectDomain& domain, const ThetaEdges& edges,
                                 double cutoff);

}  // namespace ldg
