#include "ldg/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ldg {

RectDomain::RectDomain(double width, double height) : a(width), b(height) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("RectDomain: a and b must be finite and positive");
  }
}

Grid::Grid(RectDomain domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3) {
    throw std::invalid_argument("Grid: need at least 3 nodes per axis");
  }
  hx_ = domain_.a / (nx_ - 1);
  hy_ = domain_.b / (ny_ - 1);
  interior_.reserve(static_cast<std::size_t>(nx_ - 2) * (ny_ - 2));
  boundary_.reserve(2 * static_cast<std::size_t>(nx_ + ny_));
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      (on_boundary(i, j) ? boundary_ : interior_).push_back(index(i, j));
    }
  }
}

double Grid::area_weight(int i, int j) const {
  double w = hx_ * hy_;
  if (i == 0 || i == nx_ - 1) w *= 0.5;
  if (j == 0 || j == ny_ - 1) w *= 0.5;
  return w;
}

Grid make_grid(const RectDomain& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("make_grid: spacing must be positive");
  }
  const long nx = std::lround(domain.a / h) + 1;
  const long ny = std::lround(domain.b / h) + 1;
  if (nx < 3 || ny < 3) {
    throw std::invalid_argument("make_grid: spacing too coarse (fewer than 3 nodes per axis)");
  }
  return Grid(domain, static_cast<int>(nx), static_cast<int>(ny));
}

bool QField::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(q11.begin(), q11.end(), finite) &&
         std::all_of(q12.begin(), q12.end(), finite);
}

ThetaDecomposition q_to_theta_s(const QField& field) {
  ThetaDecomposition out{ThetaField(field.grid), std::vector<double>(field.size()),
                         std::vector<bool>(field.size(), false)};
  for (std::size_t n = 0; n < field.size(); ++n) {
    const double s = std::hypot(field.q11[n], field.q12[n]);
    out.s[n] = s;
    if (s <= 1e-12) {
      out.zero_mask[n] = true;
      out.theta.theta[n] = 0.0;
    } else {
      out.theta.theta[n] = 0.5 * std::atan2(field.q12[n], field.q11[n]);
    }
  }
  return out;
}

QField lift_theta(const ThetaField& theta, std::span<const double> s) {
  if (!s.empty() && s.size() != theta.theta.size()) {
    throw std::invalid_argument("lift_theta: order parameter size mismatch");
  }
  QField out(theta.grid);
  for (std::size_t n = 0; n < theta.theta.size(); ++n) {
    const double amp = s.empty() ? 1.0 : s[n];
    out.q11[n] = amp * std::cos(2.0 * theta.theta[n]);
    out.q12[n] = amp * std::sin(2.0 * theta.theta[n]);
  }
  return out;
}

std::vector<double> s2_field(const QField& field) {
  std::vector<double> out(field.size());
  for (std::size_t n = 0; n < field.size(); ++n) {
    out[n] = field.q11[n] * field.q11[n] + field.q12[n] * field.q12[n];
  }
  return out;
}

double max_abs_diff(const QField& lhs, const QField& rhs) {
  if (lhs.size() != rhs.size()) {
    throw std::invalid_argument("max_abs_diff: fields live on different grids");
  }
  double m = 0.0;
  for (std::size_t n = 0; n < lhs.size(); ++n) {
    m = std::max({m, std::abs(lhs.q11[n] - rhs.q11[n]), std::abs(lhs.q12[n] - rhs.q12[n])});
  }
  return m;
}

double interpolate(const Grid& grid, std::span<const double> data, double x, double y) {
  const double fx = std::clamp(x / grid.hx(), 0.0, static_cast<double>(grid.nx() - 1));
  const double fy = std::clamp(y / grid.hy(), 0.0, static_cast<double>(grid.ny() - 1));
  const int i0 = std::min(static_cast<int>(fx), grid.nx() - 2);
  const int j0 = std::min(static_cast<int>(fy), grid.ny() - 2);
  const double tx = fx - i0;
  const double ty = fy - j0;
  const double v00 = data[grid.index(i0, j0)];
  const double v10 = data[grid.index(i0 + 1, j0)];
  const double v01 = data[grid.index(i0, j0 + 1)];
  const double v11 = data[grid.index(i0 + 1, j0 + 1)];
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

}  // namespace ldg
