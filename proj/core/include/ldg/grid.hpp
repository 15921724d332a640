#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ldg {

/// Rescaled rectangle [0,a] x [0,b].
struct RectDomain {
  double a = 1.0;
  double b = 1.0;

  RectDomain() = default;
  RectDomain(double width, double height);

  double aspect() const { return a / b; }
  double area() const { return a * b; }
  bool is_square() const { return std::abs(a - b) <= 1e-12; }
};

/// Uniform tensor-product node grid including boundary nodes.
///
/// Node (i, j) sits at (i*hx, j*hy); the flat index is j*nx + i, so data is
/// stored row-major in j then i.
class Grid {
 public:
  Grid(RectDomain domain, int nx, int ny);

  const RectDomain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  double x(int i) const { return i * hx_; }
  double y(int j) const { return j * hy_; }

  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }
  bool is_corner(int i, int j) const {
    return (i == 0 || i == nx_ - 1) && (j == 0 || j == ny_ - 1);
  }

  /// Trapezoidal-rule area weight of node (i, j).
  double area_weight(int i, int j) const;

  /// Flat indices of interior / boundary nodes, each in ascending order.
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

  bool same_shape(const Grid& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && domain_.a == other.domain_.a &&
           domain_.b == other.domain_.b;
  }

 private:
  RectDomain domain_;
  int nx_;
  int ny_;
  double hx_;
  double hy_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
};

/// nx = round(a/h)+1, ny = round(b/h)+1. Throws std::invalid_argument for
/// h <= 0 or when either axis would have fewer than three nodes.
Grid make_grid(const RectDomain& domain, double h);

/// The two independent components of the reduced Q-tensor on grid nodes.
struct QField {
  explicit QField(const Grid& g) : grid(g), q11(g.size(), 0.0), q12(g.size(), 0.0) {}

  Grid grid;
  std::vector<double> q11;
  std::vector<double> q12;

  std::size_t size() const { return q11.size(); }
  bool all_finite() const;
};

/// Director angle in radians on grid nodes.
struct ThetaField {
  explicit ThetaField(const Grid& g) : grid(g), theta(g.size(), 0.0) {}

  Grid grid;
  std::vector<double> theta;
};

struct ThetaDecomposition {
  ThetaField theta;
  std::vector<double> s;
  std::vector<bool> zero_mask;  ///< nodes with s <= 1e-12, theta set to 0
};

/// theta = atan2(q12, q11)/2 and s = |(q11, q12)|.
ThetaDecomposition q_to_theta_s(const QField& field);

/// Q11 = s cos 2theta, Q12 = s sin 2theta. With s empty, s = 1 everywhere.
QField lift_theta(const ThetaField& theta, std::span<const double> s = {});

/// q11^2 + q12^2 per node, i.e. tr(Q^2)/2.
std::vector<double> s2_field(const QField& field);

/// Max-norm distance between two fields on the same grid.
double max_abs_diff(const QField& lhs, const QField& rhs);

/// Bilinear interpolation of nodal data at (x, y).
double interpolate(const Grid& grid, std::span<const double> data, double x, double y);

}  // namespace ldg
