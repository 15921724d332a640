#include "oracles.hpp"

#include <Eigen/Sparse>
#include <stdexcept>

namespace oracle {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::vector<double> solve_spd(int n, const Triplets& t, const Eigen::VectorXd& rhs) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("oracle factorisation failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

}  // namespace

NodalSolution laplace_dirichlet(double a, double b, int nx, int ny,
                                const std::function<double(double, double)>& g) {
  NodalSolution s{a, b, nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny, 0.0)};
  const double hx = s.hx(), hy = s.hy();
  const double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy);
  for (int i = 0; i < nx; ++i) {
    s.u[i] = g(i * hx, 0.0);
    s.u[static_cast<std::size_t>(ny - 1) * nx + i] = g(i * hx, b);
  }
  for (int j = 0; j < ny; ++j) {
    s.u[static_cast<std::size_t>(j) * nx] = g(0.0, j * hy);
    s.u[static_cast<std::size_t>(j) * nx + nx - 1] = g(a, j * hy);
  }
  const int mx = nx - 2, my = ny - 2;
  auto id = [&](int i, int j) { return (j - 1) * mx + (i - 1); };
  Triplets t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mx * my);
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      const int r = id(i, j);
      t.emplace_back(r, r, 2.0 * (cx + cy));
      const std::array<std::array<int, 2>, 4> nb = {{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
      for (int k = 0; k < 4; ++k) {
        const auto [ni, nj] = nb[k];
        const double c = k < 2 ? cx : cy;
        if (ni == 0 || nj == 0 || ni == nx - 1 || nj == ny - 1) {
          rhs[r] += c * s.at(ni, nj);
        } else {
          t.emplace_back(r, id(ni, nj), -c);
        }
      }
    }
  }
  const auto x = solve_spd(mx * my, t, rhs);
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) s.u[static_cast<std::size_t>(j) * nx + i] = x[id(i, j)];
  }
  return s;
}

NodalSolution laplace_robin(double a, double b, int nx, int ny, double tau,
                            const std::array<double, 4>& edge_values) {
  NodalSolution s{a, b, nx, ny, {}};
  const double hx = s.hx(), hy = s.hy();
  const double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy);
  const int n = nx * ny;
  auto id = [&](int i, int j) { return j * nx + i; };
  Triplets t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  // Row (i,j) of -Laplace with ghost nodes eliminated, scaled by 1/2 per
  // boundary direction so the matrix stays symmetric.
  for (int j = 0; j < ny; ++j) {
    const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i < nx; ++i) {
      const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      const double w = wx * wy;
      const int r = id(i, j);
      double diag = 0.0;
      // x direction
      if (i > 0) {
        t.emplace_back(r, id(i - 1, j), -cx * wy);
        diag += cx * wy;
      }
      if (i < nx - 1) {
        t.emplace_back(r, id(i + 1, j), -cx * wy);
        diag += cx * wy;
      }
      if (i == 0 || i == nx - 1) {
        const double g = i == 0 ? edge_values[3] : edge_values[1];
        diag += w * 2.0 * tau / hx;
        rhs[r] += w * 2.0 * tau * g / hx;
      }
      // y direction
      if (j > 0) {
        t.emplace_back(r, id(i, j - 1), -cy * wx);
        diag += cy * wx;
      }
      if (j < ny - 1) {
        t.emplace_back(r, id(i, j + 1), -cy * wx);
        diag += cy * wx;
      }
      if (j == 0 || j == ny - 1) {
        const double g = j == 0 ? edge_values[0] : edge_values[2];
        diag += w * 2.0 * tau / hy;
        rhs[r] += w * 2.0 * tau * g / hy;
      }
      t.emplace_back(r, r, diag);
    }
  }
  s.u = solve_spd(n, t, rhs);
  return s;
}

NodalSolution richardson(const NodalSolution& coarse, const NodalSolution& fine) {
  if (fine.nx != 2 * coarse.nx - 1 || fine.ny != 2 * coarse.ny - 1) {
    throw std::invalid_argument("richardson: fine grid must halve the coarse spacing");
  }
  NodalSolution out = coarse;
  for (int j = 0; j < coarse.ny; ++j) {
    for (int i = 0; i < coarse.nx; ++i) {
      out.u[static_cast<std::size_t>(j) * coarse.nx + i] =
          (4.0 * fine.at(2 * i, 2 * j) - coarse.at(i, j)) / 3.0;
    }
  }
  return out;
}

double directional_derivative(const std::function<double(const std::vector<double>&)>& f,
                              const std::vector<double>& x, const std::vector<double>& v,
                              double step) {
  std::vector<double> xp = x, xm = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xp[k] += step * v[k];
    xm[k] -= step * v[k];
  }
  return (f(xp) - f(xm)) / (2.0 * step);
}

}  // namespace oracle
