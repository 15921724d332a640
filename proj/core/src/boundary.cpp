#include "ldg/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ldg {

void BoundarySpec::validate(const RectDomain& domain, bool strict) const {
  const double limit = std::min(domain.a, domain.b) / (strict ? 4.0 : 2.0);
  if (!(d > 0.0) || !(d < limit)) {
    throw std::invalid_argument("BoundarySpec: ramp width d must satisfy 0 < d < " +
                                std::to_string(limit));
  }
  if (mode == AnchoringMode::Robin && !(tau > 0.0)) {
    throw std::invalid_argument("BoundarySpec: anchoring strength tau must be positive");
  }
}

std::string_view to_string(AnchoringMode mode) {
  return mode == AnchoringMode::Dirichlet ? "dirichlet" : "robin";
}

AnchoringMode parse_anchoring_mode(std::string_view text) {
  if (text == "dirichlet") return AnchoringMode::Dirichlet;
  if (text == "robin") return AnchoringMode::Robin;
  throw std::invalid_argument("unknown anchoring mode '" + std::string(text) + "'");
}

double trapezoid(double t, double d) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("trapezoid: t outside [0,1]");
  if (!(d > 0.0 && d < 0.5)) throw std::invalid_argument("trapezoid: d outside (0,1/2)");
  return std::min({t / d, 1.0, (1.0 - t) / d});
}

namespace {
double ramp(double coord, double length, double d) {
  return trapezoid(std::clamp(coord / length, 0.0, 1.0), d / length);
}
}  // namespace

BoundaryTrace dirichlet_trace(const Grid& grid, double d) {
  const auto& dom = grid.domain();
  BoundaryTrace out{std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.on_boundary(i, j)) continue;
      double v = 0.0;
      if (grid.is_corner(i, j)) {
        v = 0.0;
      } else if (j == 0 || j == grid.ny() - 1) {
        v = ramp(grid.x(i), dom.a, d);
      } else {
        v = -ramp(grid.y(j), dom.b, d);
      }
      out.g1[grid.index(i, j)] = v;
    }
  }
  return out;
}

ThetaEdges theta_edges(ThetaState state) {
  constexpr double pi = std::numbers::pi;
  switch (state) {
    case ThetaState::D1: return {0.0, pi / 2, 0.0, pi / 2};
    case ThetaState::D2: return {0.0, -pi / 2, 0.0, -pi / 2};
    case ThetaState::R1: return {0.0, -pi / 2, -pi, -pi / 2};
    case ThetaState::R2: return {0.0, pi / 2, pi, pi / 2};
    case ThetaState::R3: return {0.0, -pi / 2, 0.0, pi / 2};
    case ThetaState::R4: return {0.0, pi / 2, 0.0, -pi / 2};
    case ThetaState::NonTrivial: return {0.0, pi / 2, 2 * pi, 5 * pi / 2};
  }
  throw std::logic_error("theta_edges: unhandled state");
}

std::string_view to_string(ThetaState state) {
  switch (state) {
    case ThetaState::D1: return "D1";
    case ThetaState::D2: return "D2";
    case ThetaState::R1: return "R1";
    case ThetaState::R2: return "R2";
    case ThetaState::R3: return "R3";
    case ThetaState::R4: return "R4";
    case ThetaState::NonTrivial: return "nontrivial";
  }
  return "?";
}

ThetaState parse_theta_state(std::string_view text) {
  for (auto s : {ThetaState::D1, ThetaState::D2, ThetaState::R1, ThetaState::R2, ThetaState::R3,
                 ThetaState::R4, ThetaState::NonTrivial}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown theta state '" + std::string(text) + "'");
}

std::vector<double> theta_trace(const Grid& grid, const ThetaEdges& e) {
  std::vector<double> out(grid.size(), 0.0);
  const int il = 0, ir = grid.nx() - 1, jb = 0, jt = grid.ny() - 1;
  for (int i = 1; i < ir; ++i) {
    out[grid.index(i, jb)] = e.bottom;
    out[grid.index(i, jt)] = e.top;
  }
  for (int j = 1; j < jt; ++j) {
    out[grid.index(il, j)] = e.left;
    out[grid.index(ir, j)] = e.right;
  }
  out[grid.index(il, jb)] = 0.5 * (e.left + e.bottom);
  out[grid.index(ir, jb)] = 0.5 * (e.bottom + e.right);
  out[grid.index(ir, jt)] = 0.5 * (e.right + e.top);
  out[grid.index(il, jt)] = 0.5 * (e.top + e.left);
  return out;
}

}  // namespace ldg
