#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ldg/boundary.hpp"
#include "ldg/grid.hpp"

namespace ldg {

enum class Label { D1, D2, R1, R2, R3, R4, BD1, BD2, WORS, Unknown };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

/// True for the six diagonal/rotated states.
bool is_trivial_topology(Label label);

struct SolutionClass {
  Label label = Label::Unknown;
  double confidence = 0.0;  ///< margin of the deciding test, in [0, 1]
};

struct ClassifyTolerances {
  double bd_tol = 1e-3;       ///< interior max|q12| / max s below which a field is BD-like
  double min_margin = 0.15;   ///< required gap between the winning and runner-up score
};

/// Labels an equilibrium.
///
/// BD family: interior q12 negligible; the sign of q11 at the centre picks
/// BD1/BD2 and a vanishing centre on a square gives WORS.
/// Otherwise the weighted q12 mass over the left/right and bottom/top halves
/// is normalised by the total |q12| mass. The mean score picks D1/D2, the
/// left-right contrast R3/R4 and the bottom-top contrast R1/R2.
SolutionClass classify(const QField& field, const ClassifyTolerances& tol = {});

struct PointDefect {
  double x = 0.0;
  double y = 0.0;
  double winding = 0.0;  ///< half-integer
};

struct BoundingBox {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
};

struct LineFeature {
  std::string edge_or_diagonal;  ///< bottom|right|top|left|diagonal|antidiagonal|interior
  BoundingBox bbox;
};

struct DefectSet {
  std::vector<PointDefect> points;
  std::vector<LineFeature> lines;
  std::vector<bool> low_order_mask;

  double total_point_winding() const;
};

/// Low-order regions (s^2 below `relative_threshold` times the interior max)
/// and quantised point windings.
///
/// Windings come from the lattice: each cell carries the net turn of
/// 2*theta around its four nodes, so every cell winding is a multiple of 1/2.
/// Nonzero cells that touch each other are merged and reported at their mean
/// position; cells touching a line feature are skipped because theta is not
/// defined along a Q = 0 curve.
DefectSet detect_defects(const QField& field, double relative_threshold = 0.1);

/// Corner degrees in the order (0,0), (a,0), (a,b), (0,b).
using VertexDegrees = std::array<double, 4>;

/// omega = (theta jump across the corner, anticlockwise)/(2 pi). Throws
/// std::invalid_argument unless bottom/top are multiples of pi and
/// left/right odd multiples of pi/2.
VertexDegrees vertex_degrees(const ThetaEdges& edges);

/// Degrees measured on a field: the turn of theta along a quarter arc of
/// `radius` about each corner, traversed anticlockwise. The arc must resolve
/// the director (several nodes per quarter turn); radius <= 0 picks
/// max(2 d, 8 h) for ramp width d = `ramp`, capped at a quarter of the
/// shorter side.
VertexDegrees arc_vertex_degrees(const QField& field, double radius, double ramp = 0.03);

/// (|n| - 1)/2 for a vertex of degree n/4.
double excess_charge(double degree);

}  // namespace ldg
