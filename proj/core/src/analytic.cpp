#include "ldg/analytic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace ldg {

namespace {

constexpr double kPi = std::numbers::pi;

void check_rect(double a, double b, double d) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("rectangle sides must be positive");
  if (d < 0.0 || (d > 0.0 && !(d < 0.5 * a))) {
    throw std::invalid_argument("ramp width must satisfy 0 <= d < a/2");
  }
}

double clamp_coord(double v, double hi, const char* name) {
  const double slack = 1e-12 * std::max(1.0, hi);
  if (v < -slack || v > hi + slack) {
    throw std::out_of_range(std::string(name) + " outside the rectangle");
  }
  return std::clamp(v, 0.0, hi);
}

// Upper bound on |sine coefficient| of mode k (k odd).
double coef_bound(long k, double a, double d) {
  const double plain = 4.0 / (k * kPi);
  return d > 0.0 ? std::min(plain, 4.0 * a / (k * k * kPi * kPi * d)) : plain;
}

double coef(long k, double a, double d) {
  if (d == 0.0) return 4.0 / (k * kPi);
  const double z = k * kPi * d / a;
  return 4.0 * std::sin(z) / (k * kPi * z);
}

// Sums odd modes k of coef_k * g_k where g_k is evaluated by `term` and
// bounded by coef_bound * k^power * r^k * scale. Stops on the tail bound.
template <class Term>
double sum_modes(double a, double d, double r, double scale, int power, double tol, Term term) {
  const double geo = 1.0 / (1.0 - r * r);
  double sum = 0.0;
  for (long k = 1;; k += 2) {
    sum += term(k);
    const long next = k + 2;
    double bound = coef_bound(next, a, d) * std::pow(r, static_cast<double>(next)) * scale * geo;
    if (power > 0) bound *= std::pow(static_cast<double>(next), power) * geo;
    if (bound <= tol) break;
    if (next > kSeriesTermCap) {
      throw ToleranceUnreachable("series needs more than " + std::to_string(kSeriesTermCap) +
                                 " terms at this point");
    }
  }
  return sum;
}

}  // namespace

double f_strong(double x, double y, double a, double b, double d, double tol) {
  check_rect(a, b, d);
  x = clamp_coord(x, a, "x");
  y = clamp_coord(y, b, "y");
  if (y == 0.0) {
    if (d > 0.0) return trapezoid(x / a, d / a);
    return (x == 0.0 || x == a) ? 0.5 : 1.0;
  }
  if (y == b || x == 0.0 || x == a) return 0.0;

  const double theta = kPi * x / a;
  const double r = std::exp(-kPi * y / a);
  const double far = std::exp(-2.0 * kPi * (b - y) / a);
  const double whole = std::exp(-2.0 * kPi * b / a);
  const double scale = 1.0 / (1.0 - whole);
  // Powers advance by two modes per step.
  const double r2 = r * r, far2 = far * far, whole2 = whole * whole;
  double rk = r, fark = far, wholek = whole;
  const double c2 = 2.0 * std::cos(2.0 * theta);
  double s_prev = -std::sin(theta), s_cur = std::sin(theta);  // sin((k-2)theta), sin(k theta)
  return sum_modes(a, d, r, scale, 0, tol, [&](long k) {
    const double ratio = rk * (1.0 - fark) / (1.0 - wholek);
    const double v = coef(k, a, d) * s_cur * ratio;
    rk *= r2;
    fark *= far2;
    wholek *= whole2;
    const double s_next = c2 * s_cur - s_prev;
    s_prev = s_cur;
    s_cur = s_next;
    return v;
  });
}

std::array<double, 2> f_strong_gradient(double x, double y, double a, double b, double d,
                                        double tol) {
  check_rect(a, b, d);
  if (!(x > 0.0 && x < a && y > 0.0 && y < b)) {
    throw std::out_of_range("f_strong_gradient needs an interior point");
  }
  const double theta = kPi * x / a;
  const double r = std::exp(-kPi * y / a);
  const double far = std::exp(-2.0 * kPi * (b - y) / a);
  const double whole = std::exp(-2.0 * kPi * b / a);
  const double scale = 2.0 * kPi / a / (1.0 - whole);
  const double r2 = r * r, far2 = far * far, whole2 = whole * whole;
  double rk = r, fark = far, wholek = whole;
  double gx = 0.0;
  const double gy = sum_modes(a, d, r, scale, 1, tol, [&](long k) {
    const double kk = k * kPi / a;
    const double c = coef(k, a, d);
    const double denom = 1.0 - wholek;
    gx += c * kk * std::cos(k * theta) * rk * (1.0 - fark) / denom;
    const double v = -c * kk * std::sin(k * theta) * rk * (1.0 + fark) / denom;
    rk *= r2;
    fark *= far2;
    wholek *= whole2;
    return v;
  });
  return {gx, gy};
}

StrongLimit limit_strong_Q(double x, double y, const RectDomain& domain, double d, double tol) {
  const double a = domain.a, b = domain.b;
  if (d > 0.0 && !(d < 0.5 * std::min(a, b))) {
    throw std::invalid_argument("ramp width must satisfy d < min(a,b)/2");
  }
  x = clamp_coord(x, a, "x");
  y = clamp_coord(y, b, "y");
  const double t = 0.25 * tol;
  StrongLimit out;
  out.q11 = f_strong(x, y, a, b, d, t) - f_strong(y, a - x, b, a, d, t) +
            f_strong(x, b - y, a, b, d, t) - f_strong(y, x, b, a, d, t);
  return out;
}

QField sample_strong_limit(const Grid& grid, double d, double tol) {
  QField out(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      out.q11[grid.index(i, j)] = limit_strong_Q(grid.x(i), grid.y(j), grid.domain(), d, tol).q11;
    }
  }
  return out;
}

namespace {

// Extended precision: for p a ~ 1e4 the double rounding of p a alone is
// ~2e-12, which would swamp the residual of a correctly rounded root.
long double robin_residual_ld(long double p, long double tau, long double a) {
  const long double pa = p * a;
  return ((p * p - tau * tau) * std::sin(pa) - 2.0L * tau * p * std::cos(pa)) / (p * p + tau * tau);
}

}  // namespace

double RobinRoots::residual(double p, double tau, double a) {
  return static_cast<double>(robin_residual_ld(p, tau, a));
}

RobinRoots robin_roots(double tau, double a, int n_roots) {
  if (!(tau > 0.0) || !(a > 0.0) || n_roots < 1) {
    throw std::invalid_argument("robin_roots needs tau > 0, a > 0, n_roots >= 1");
  }
  RobinRoots out{tau, a, {}};
  out.roots.reserve(static_cast<std::size_t>(n_roots));
  const long double pi_ld = std::acos(-1.0L);
  for (int k = 1; k <= n_roots; ++k) {
    const long double target = (k - 1) * pi_ld;
    auto g = [&](double p) {
      return static_cast<double>(p * static_cast<long double>(a) -
                                 2.0L * std::atan(static_cast<long double>(tau) / p) - target);
    };
    double lo = std::max((k - 1) * kPi / a, 1e-300);
    double hi = (k + 1) * kPi / a;
    if (k == 1) lo = std::min(1e-12 / a, 0.5 * hi);
    boost::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(), iters);
    // Settle on the double with the smallest residual near the bracket.
    double best = 0.5 * (bracket.first + bracket.second);
    auto score = [&](double p) { return std::abs(robin_residual_ld(p, tau, a)); };
    for (bool moved = true; moved;) {
      moved = false;
      for (double cand : {std::nextafter(best, 0.0), std::nextafter(best, hi)}) {
        if (score(cand) < score(best)) {
          best = cand;
          moved = true;
        }
      }
    }
    out.roots.push_back(best);
  }
  return out;
}

double f_weak(double x, double y, double b, const RobinRoots& roots) {
  const double a = roots.a, tau = roots.tau;
  x = clamp_coord(x, a, "x");
  y = clamp_coord(y, b, "y");
  double sum = 0.0;
  const double norm_const = 2.0 * tau;
  for (double p : roots.roots) {
    const double decay = std::exp(-p * (b - y));
    // Each term is bounded by ~4 tau decay / (p^2 a); stop once negligible.
    if (4.0 * tau * decay / (p * p * a) < 1e-17) break;
    const double pa = p * a;
    const double inner = std::sin(pa) + tau * (1.0 - std::cos(pa)) / p;  // integral of X_k
    const double ck = norm_const * inner / ((p * p + tau * tau) * a + 2.0 * tau);
    const double xk = p * std::cos(p * x) + tau * std::sin(p * x);
    const double yd = decay * ((p + tau) + (p - tau) * std::exp(-2.0 * p * y)) /
                      ((p + tau) * (p + tau) - (p - tau) * (p - tau) * std::exp(-2.0 * p * b));
    sum += ck * xk * yd;
  }
  return sum;
}

double f_weak(double x, double y, double a, double b, double tau, int n_roots) {
  return f_weak(x, y, b, robin_roots(tau, a, n_roots));
}

WeakLimit::WeakLimit(const RectDomain& domain, double tau, int n_roots)
    : domain_(domain),
      roots_a_(robin_roots(tau, domain.a, n_roots)),
      roots_b_(robin_roots(tau, domain.b, n_roots)) {}

double WeakLimit::q11(double x, double y) const {
  const double a = domain_.a, b = domain_.b;
  return f_weak(x, b - y, b, roots_a_) - f_weak(y, x, a, roots_b_) + f_weak(x, y, b, roots_a_) -
         f_weak(y, a - x, a, roots_b_);
}

double limit_weak_Q11(double x, double y, const RectDomain& domain, double tau) {
  return WeakLimit(domain, tau).q11(x, y);
}

QField sample_weak_limit(const Grid& grid, double tau, int n_roots) {
  const WeakLimit lim(grid.domain(), tau, n_roots);
  QField out(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) out.q11[grid.index(i, j)] = lim.q11(grid.x(i), grid.y(j));
  }
  return out;
}

double theta_harmonic(const ThetaEdges& e, const RectDomain& domain, double x, double y,
                      double tol) {
  const double a = domain.a, b = domain.b;
  const double t = 0.25 * tol;
  return e.bottom * f_strong(x, y, a, b, 0.0, t) + e.right * f_strong(y, a - x, b, a, 0.0, t) +
         e.top * f_strong(x, b - y, a, b, 0.0, t) + e.left * f_strong(y, x, b, a, 0.0, t);
}

ThetaField sample_theta_harmonic(const Grid& grid, const ThetaEdges& edges, double tol) {
  ThetaField out(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      out.theta[grid.index(i, j)] = theta_harmonic(edges, grid.domain(), grid.x(i), grid.y(j), tol);
    }
  }
  return out;
}

namespace {

// Gradients of the four unit edge problems (bottom, right, top, left) at an
// interior point. The problem whose data edge is nearest is recovered from
// the other three because the four sum to one; this keeps every series
// evaluated well away from its own data edge.
std::array<std::array<double, 2>, 4> edge_gradients(double x, double y, double a, double b) {
  constexpr double tol = 1e-12;
  const std::array<double, 4> dist = {y, a - x, b - y, x};
  const auto nearest =
      static_cast<int>(std::min_element(dist.begin(), dist.end()) - dist.begin());
  std::array<std::array<double, 2>, 4> g{};
  for (int e = 0; e < 4; ++e) {
    if (e == nearest) continue;
    switch (e) {
      case 0: g[0] = f_strong_gradient(x, y, a, b, 0.0, tol); break;
      case 1: {
        const auto f = f_strong_gradient(y, a - x, b, a, 0.0, tol);
        g[1] = {-f[1], f[0]};
        break;
      }
      case 2: {
        const auto f = f_strong_gradient(x, b - y, a, b, 0.0, tol);
        g[2] = {f[0], -f[1]};
        break;
      }
      default: {
        const auto f = f_strong_gradient(y, x, b, a, 0.0, tol);
        g[3] = {f[1], f[0]};
        break;
      }
    }
  }
  for (int e = 0; e < 4; ++e) {
    if (e == nearest) continue;
    g[nearest][0] -= g[e][0];
    g[nearest][1] -= g[e][1];
  }
  return g;
}

}  // namespace

double quadrant_dirichlet_energy(const RectDomain& domain, const ThetaEdges& edges,
                                 double cutoff) {
  const double a = domain.a, b = domain.b;
  if (!(cutoff > 0.0) || !(cutoff < 0.5 * std::min(a, b))) {
    throw std::invalid_argument("cutoff must lie in (0, min(a,b)/2)");
  }
  const auto d = edges.as_array();
  auto density = [&](double x, double y) {
    const auto g = edge_gradients(x, y, a, b);
    double gx = 0.0, gy = 0.0;
    for (int e = 0; e < 4; ++e) {
      gx += d[e] * g[e][0];
      gy += d[e] * g[e][1];
    }
    return gx * gx + gy * gy;
  };

  using Rule = boost::math::quadrature::gauss<double, 20>;
  constexpr int kPanels = 4;
  auto panels = [&](auto&& f, double lo, double hi) {
    double s = 0.0;
    const double w = (hi - lo) / kPanels;
    for (int k = 0; k < kPanels; ++k) s += Rule::integrate(f, lo + k * w, lo + (k + 1) * w);
    return s;
  };
  // Polar coordinates about (0,0) with r = cutoff * e^s, so the measure is r^2 ds dphi.
  const double split = std::atan2(0.5 * b, 0.5 * a);
  auto radial = [&](double phi) {
    const double c = std::cos(phi), sn = std::sin(phi);
    const double rmax = phi <= split ? 0.5 * a / c : 0.5 * b / sn;
    if (rmax <= cutoff) return 0.0;
    return panels(
        [&](double s) {
          const double r = cutoff * std::exp(s);
          return density(r * c, r * sn) * r * r;
        },
        0.0, std::log(rmax / cutoff));
  };
  return panels(radial, 0.0, split) + panels(radial, split, 0.5 * kPi);
}

std::vector<QuadrantEnergy> dirichlet_energy_compare(const RectDomain& domain,
                                                     const std::vector<double>& cutoffs,
                                                     const ThetaEdges& first,
                                                     const ThetaEdges& second) {
  std::vector<QuadrantEnergy> out;
  for (double rho : cutoffs) {
    out.push_back({rho, quadrant_dirichlet_energy(domain, first, rho),
                   quadrant_dirichlet_energy(domain, second, rho)});
  }
  return out;
}

}  // namespace ldg
