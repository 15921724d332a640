#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ldg/grid.hpp"

namespace ldg {

enum class AnchoringMode { Dirichlet, Robin };

/// Tangent anchoring data: fixed trace with corner ramp of width d, or a
/// quadratic surface penalty of strength tau towards the same trace.
struct BoundarySpec {
  AnchoringMode mode = AnchoringMode::Dirichlet;
  double d = 0.03;
  double tau = 1.0;

  static BoundarySpec dirichlet(double d) { return {AnchoringMode::Dirichlet, d, 1.0}; }
  static BoundarySpec robin(double tau, double d = 0.03) { return {AnchoringMode::Robin, d, tau}; }

  /// Throws std::invalid_argument unless 0 < d < min(a,b)/2 (or min(a,b)/4
  /// when `strict`), and tau > 0 in Robin mode.
  void validate(const RectDomain& domain, bool strict = false) const;
};

std::string_view to_string(AnchoringMode mode);
AnchoringMode parse_anchoring_mode(std::string_view text);

/// min{t/d, 1, (1-t)/d}.
double trapezoid(double t, double d);

/// Boundary data on all nodes; interior entries are zero.
struct BoundaryTrace {
  std::vector<double> g1;
  std::vector<double> g2;
};

/// (+T_{d/a}(x/a), 0) on y in {0,b}; (-T_{d/b}(y/b), 0) on x in {0,a}.
BoundaryTrace dirichlet_trace(const Grid& grid, double d);

/// Edge constants for the director angle: bottom, right, top, left.
struct ThetaEdges {
  double bottom = 0.0;
  double right = 0.0;
  double top = 0.0;
  double left = 0.0;

  std::array<double, 4> as_array() const { return {bottom, right, top, left}; }
};

/// Named edge data for the six trivial-topology states plus the
/// (0, pi/2, 2pi, 5pi/2) non-trivial seed.
enum class ThetaState { D1, D2, R1, R2, R3, R4, NonTrivial };

ThetaEdges theta_edges(ThetaState state);
std::string_view to_string(ThetaState state);
ThetaState parse_theta_state(std::string_view text);
inline constexpr std::array<ThetaState, 6> kTrivialStates = {
    ThetaState::D1, ThetaState::D2, ThetaState::R1, ThetaState::R2, ThetaState::R3, ThetaState::R4};

/// Angle trace on all nodes (interior entries zero). Edge nodes carry their
/// edge constant; corners carry the average of the two adjacent edges.
std::vector<double> theta_trace(const Grid& grid, const ThetaEdges& edges);

}  // namespace ldg
