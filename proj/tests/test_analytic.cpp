#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ldg/analytic.hpp"
#include "support/oracles.hpp"

using namespace ldg;
constexpr double pi = std::numbers::pi;

namespace {

struct Point {
  int i, j;
};

/// Random nodes of an n-node axis grid at least `margin` away from the edges.
std::vector<Point> random_nodes(int nx, int ny, double margin, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int lo_x = static_cast<int>(std::ceil(margin * (nx - 1))), hi_x = nx - 1 - lo_x;
  const int lo_y = static_cast<int>(std::ceil(margin * (ny - 1))), hi_y = ny - 1 - lo_y;
  std::uniform_int_distribution<int> di(lo_x, hi_x), dj(lo_y, hi_y);
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) out.push_back({di(rng), dj(rng)});
  return out;
}

}  // namespace

TEST_CASE("strong series reproduces its edge data") {
  const double a = 1.5, b = 1.0, d = 0.1;
  CHECK(f_strong(0.05, 0.0, a, b, d) == doctest::Approx(trapezoid(0.05 / a, d / a)));
  CHECK(f_strong(0.7, 1e-3, a, b, d) == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(f_strong(0.7, b, a, b, d) == 0.0);
  CHECK(f_strong(0.0, 0.4, a, b, d) == 0.0);
  // mirror symmetry of the trapezoid
  CHECK(f_strong(0.3, 0.4, a, b, d) == doctest::Approx(f_strong(a - 0.3, 0.4, a, b, d)).epsilon(1e-13));
}

TEST_CASE("strong series against a Richardson-extrapolated five-point solve") {
  // Ramp kinks sit on grid nodes for both resolutions.
  const double a = 1.0, b = 1.0, d = 1.0 / 32;
  auto data = [&](double x, double y) { return y == 0.0 ? trapezoid(x / a, d / a) : 0.0; };
  const auto coarse = oracle::laplace_dirichlet(a, b, 257, 257, data);
  const auto fine = oracle::laplace_dirichlet(a, b, 513, 513, data);
  const auto ref = oracle::richardson(coarse, fine);
  double worst = 0.0;
  for (auto [i, j] : random_nodes(257, 257, 0.1, 20, 42)) {
    worst = std::max(worst, std::abs(f_strong(i * ref.hx(), j * ref.hy(), a, b, d) - ref.at(i, j)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("gradient of the strong series matches finite differences") {
  const double a = 1.5, b = 1.0, d = 0.03, x = 0.4, y = 0.3, e = 1e-6;
  const auto gr = f_strong_gradient(x, y, a, b, d);
  CHECK(gr[0] == doctest::Approx((f_strong(x + e, y, a, b, d) - f_strong(x - e, y, a, b, d)) / (2 * e)).epsilon(1e-7));
  CHECK(gr[1] == doctest::Approx((f_strong(x, y + e, a, b, d) - f_strong(x, y - e, a, b, d)) / (2 * e)).epsilon(1e-7));
}

TEST_CASE("series truncation that cannot meet the tolerance throws") {
  CHECK_THROWS_AS(f_strong(0.5, 1e-9, 1.0, 1.0, 0.0, 1e-15), ToleranceUnreachable);
}

TEST_CASE("large-epsilon limit on the square vanishes on both diagonals") {
  const RectDomain sq{1.0, 1.0};
  for (double t : {0.1, 0.27, 0.5, 0.73, 0.9}) {
    CHECK(std::abs(limit_strong_Q(t, t, sq, 0.03).q11) <= 1e-10);
    CHECK(std::abs(limit_strong_Q(t, 1.0 - t, sq, 0.03).q11) <= 1e-10);
    CHECK(limit_strong_Q(t, 0.3, sq, 0.03).q12 == 0.0);
  }
}

TEST_CASE("centre value grows with the aspect ratio") {
  double prev = -1.0;
  for (double a : {1.0, 1.1, 1.25, 1.5, 2.0}) {
    const double c = limit_strong_Q(a / 2, 0.5, {a, 1.0}, 0.03).q11;
    if (a == 1.0) {
      CHECK(std::abs(c) <= 1e-12);
    } else {
      CHECK(c > 0.0);
    }
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("Robin roots solve their equation and interlace the brackets") {
  for (double tau : {0.5, 3.0, 10.0}) {
    for (double a : {1.0, 1.5}) {
      const auto rr = robin_roots(tau, a, 500);
      REQUIRE(rr.roots.size() == 500);
      for (std::size_t k = 0; k < rr.roots.size(); ++k) {
        const double p = rr.roots[k];
        CHECK(std::abs(RobinRoots::residual(p, tau, a)) <= 1e-12);
        CHECK(p > k * pi / a);
        CHECK(p < (k + 2) * pi / a);
        CHECK(p * a - 2.0 * std::atan(tau / p) == doctest::Approx(k * pi).epsilon(1e-12));
        if (k > 0) CHECK(p > rr.roots[k - 1]);
      }
    }
  }
  // tau -> infinity recovers the Dirichlet modes k pi / a
  CHECK(robin_roots(1e8, 1.0, 1).roots[0] == doctest::Approx(pi).epsilon(1e-7));
}

TEST_CASE("weak series against a Richardson-extrapolated Robin solve") {
  for (double tau : {3.0, 10.0}) {
    const WeakLimit weak({1.0, 1.0}, tau);
    const std::array<double, 4> g = {1.0, -1.0, 1.0, -1.0};
    const auto ref = oracle::richardson(oracle::laplace_robin(1.0, 1.0, 129, 129, tau, g),
                                        oracle::laplace_robin(1.0, 1.0, 257, 257, tau, g));
    double worst = 0.0;
    for (auto [i, j] : random_nodes(129, 129, 0.05, 20, 7)) {
      worst = std::max(worst, std::abs(weak.q11(i * ref.hx(), j * ref.hy()) - ref.at(i, j)));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("single-edge weak problem approaches the Dirichlet indicator as tau grows") {
  // f_weak carries the data on the top edge; mirror to compare with f_strong.
  const double a = 1.5, b = 1.0;
  for (auto [x, y] : {std::pair{0.4, 0.3}, {0.75, 0.5}, {1.2, 0.8}}) {
    const double strong = f_strong(x, b - y, a, b, 0.0);
    CHECK(f_weak(x, y, a, b, 1e4, 4000) == doctest::Approx(strong).epsilon(2e-3));
  }
}

TEST_CASE("weak limit: square diagonals vanish and stronger anchoring orders more") {
  const RectDomain sq{1.0, 1.0};
  const WeakLimit w3(sq, 3.0), w10(sq, 10.0);
  for (double t : {0.15, 0.35, 0.6, 0.85}) {
    CHECK(std::abs(w3.q11(t, t)) <= 1e-8);
    CHECK(std::abs(w10.q11(t, 1.0 - t)) <= 1e-8);
  }
  CHECK(std::abs(w10.q11(0.5, 0.1)) > std::abs(w3.q11(0.5, 0.1)));
  CHECK(limit_weak_Q11(0.75, 0.5, {1.5, 1.0}, 3.0) > 0.0);
}

TEST_CASE("harmonic angle") {
  const RectDomain sq{1.0, 1.0};
  CHECK(theta_harmonic(theta_edges(ThetaState::D1), sq, 0.5, 0.5) == doctest::Approx(pi / 4));
  CHECK(theta_harmonic(theta_edges(ThetaState::R2), sq, 0.5, 0.5) == doctest::Approx(pi / 2));
  CHECK(theta_harmonic(theta_edges(ThetaState::D1), sq, 0.5, 0.0) == doctest::Approx(0.0));
  const auto field = sample_theta_harmonic(make_grid(sq, 0.25), theta_edges(ThetaState::R3));
  CHECK(field.theta[field.grid.index(0, 2)] == doctest::Approx(pi / 2));
}

TEST_CASE("quadrant Dirichlet energies: diagonal below rotated, at every cutoff") {
  for (double a : {1.0, 1.5, 2.0}) {
    const auto rows = dirichlet_energy_compare({a, 1.0});
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(rows[k].d1 < rows[k].r3);
      if (k > 0) CHECK(rows[k].d1 > rows[k - 1].d1);  // log divergence as the cutoff shrinks
    }
  }
}
