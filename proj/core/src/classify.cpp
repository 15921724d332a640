#include "ldg/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ldg {

namespace {

constexpr std::array<std::string_view, 10> kLabelNames = {"D1",  "D2",  "R1",  "R2",   "R3",
                                                          "R4",  "BD1", "BD2", "WORS", "Unknown"};

struct HalfSums {
  double left = 0.0, right = 0.0, bottom = 0.0, top = 0.0, abs_total = 0.0;
};

HalfSums q12_half_sums(const QField& field) {
  const Grid& g = field.grid;
  const double xm = 0.5 * g.domain().a, ym = 0.5 * g.domain().b;
  const double tie = 1e-9 * std::min(g.hx(), g.hy());
  HalfSums out;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      const double v = g.area_weight(i, j) * field.q12[n];
      out.abs_total += std::abs(v);
      const double dx = g.x(i) - xm, dy = g.y(j) - ym;
      // Nodes on a midline are split evenly between the two halves.
      const double fl = std::abs(dx) <= tie ? 0.5 : (dx < 0 ? 1.0 : 0.0);
      const double fb = std::abs(dy) <= tie ? 0.5 : (dy < 0 ? 1.0 : 0.0);
      out.left += fl * v;
      out.right += (1.0 - fl) * v;
      out.bottom += fb * v;
      out.top += (1.0 - fb) * v;
    }
  }
  return out;
}

double wrap_angle(double d) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  d = std::fmod(d, two_pi);
  if (d > std::numbers::pi) d -= two_pi;
  if (d <= -std::numbers::pi) d += two_pi;
  return d;
}

struct Component {
  std::vector<std::size_t> nodes;
  BoundingBox bbox{};
  bool touches_boundary = false;
};

std::vector<Component> components(const Grid& g, const std::vector<bool>& mask) {
  std::vector<int> seen(g.size(), 0);
  std::vector<Component> out;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto start = g.index(i, j);
      if (!mask[start] || seen[start]) continue;
      Component c;
      c.bbox = {g.x(i), g.y(j), g.x(i), g.y(j)};
      seen[start] = 1;
      stack.assign(1, {i, j});
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        const auto n = g.index(ci, cj);
        c.nodes.push_back(n);
        c.touches_boundary = c.touches_boundary || g.on_boundary(ci, cj);
        c.bbox.xmin = std::min(c.bbox.xmin, g.x(ci));
        c.bbox.xmax = std::max(c.bbox.xmax, g.x(ci));
        c.bbox.ymin = std::min(c.bbox.ymin, g.y(cj));
        c.bbox.ymax = std::max(c.bbox.ymax, g.y(cj));
        constexpr int di[4] = {1, -1, 0, 0};
        constexpr int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ni = ci + di[k], nj = cj + dj[k];
          if (ni < 0 || nj < 0 || ni >= g.nx() || nj >= g.ny()) continue;
          const auto m = g.index(ni, nj);
          if (mask[m] && !seen[m]) {
            seen[m] = 1;
            stack.emplace_back(ni, nj);
          }
        }
      }
      std::sort(c.nodes.begin(), c.nodes.end());
      out.push_back(std::move(c));
    }
  }
  return out;
}

bool in_corner_zone(const Grid& g, const Component& c) {
  const double a = g.domain().a, b = g.domain().b;
  const double r = 0.1 * std::min(a, b);
  const double cx[4] = {0.0, a, a, 0.0};
  const double cy[4] = {0.0, 0.0, b, b};
  for (int k = 0; k < 4; ++k) {
    if (std::max(std::abs(c.bbox.xmin - cx[k]), std::abs(c.bbox.xmax - cx[k])) <= r &&
        std::max(std::abs(c.bbox.ymin - cy[k]), std::abs(c.bbox.ymax - cy[k])) <= r) {
      return true;
    }
  }
  return false;
}

// Candidate lines: distance band and the coordinate along the line, both in
// units of the domain.
struct LineCandidate {
  const char* name;
  double band;
  double (*distance)(double u, double v);  // u = x/a, v = y/b
  double (*param)(double u, double v);
};

const LineCandidate kCandidates[] = {
    {"bottom", 0.25, [](double, double v) { return v; }, [](double u, double) { return u; }},
    {"top", 0.25, [](double, double v) { return 1.0 - v; }, [](double u, double) { return u; }},
    {"left", 0.25, [](double u, double) { return u; }, [](double, double v) { return v; }},
    {"right", 0.25, [](double u, double) { return 1.0 - u; }, [](double, double v) { return v; }},
    {"diagonal", 0.08, [](double u, double v) { return std::abs(u - v); },
     [](double u, double) { return u; }},
    {"antidiagonal", 0.08, [](double u, double v) { return std::abs(1.0 - u - v); },
     [](double u, double) { return u; }},
};

std::vector<LineFeature> line_features(const Grid& g, const Component& c) {
  constexpr int kBins = 20;
  const double a = g.domain().a, b = g.domain().b;
  std::vector<LineFeature> out;
  for (const auto& cand : kCandidates) {
    std::array<bool, kBins> hit{};
    BoundingBox box{a, b, 0.0, 0.0};
    for (auto n : c.nodes) {
      const int i = static_cast<int>(n % g.nx()), j = static_cast<int>(n / g.nx());
      const double u = g.x(i) / a, v = g.y(j) / b;
      if (cand.distance(u, v) > cand.band) continue;
      const int bin = std::clamp(static_cast<int>(cand.param(u, v) * kBins), 0, kBins - 1);
      hit[bin] = true;
      box.xmin = std::min(box.xmin, g.x(i));
      box.xmax = std::max(box.xmax, g.x(i));
      box.ymin = std::min(box.ymin, g.y(j));
      box.ymax = std::max(box.ymax, g.y(j));
    }
    if (std::count(hit.begin(), hit.end(), true) >= kBins / 2) {
      out.push_back({cand.name, box});
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) { return kLabelNames[static_cast<std::size_t>(label)]; }

Label parse_label(std::string_view text) {
  for (std::size_t k = 0; k < kLabelNames.size(); ++k) {
    if (kLabelNames[k] == text) return static_cast<Label>(k);
  }
  throw std::invalid_argument("unknown solution label '" + std::string(text) + "'");
}

bool is_trivial_topology(Label label) {
  switch (label) {
    case Label::D1:
    case Label::D2:
    case Label::R1:
    case Label::R2:
    case Label::R3:
    case Label::R4:
      return true;
    default:
      return false;
  }
}

SolutionClass classify(const QField& field, const ClassifyTolerances& tol) {
  const Grid& g = field.grid;
  double max_s = 0.0, max_q12 = 0.0;
  for (auto n : g.interior_nodes()) {
    max_s = std::max(max_s, std::hypot(field.q11[n], field.q12[n]));
    max_q12 = std::max(max_q12, std::abs(field.q12[n]));
  }
  if (!(max_s > 0.0) || !std::isfinite(max_s)) return {};

  const double q12_rel = max_q12 / max_s;
  if (q12_rel <= tol.bd_tol) {
    const double centre =
        interpolate(g, field.q11, 0.5 * g.domain().a, 0.5 * g.domain().b) / max_s;
    const double margin = std::min(1.0, (tol.bd_tol - q12_rel) / tol.bd_tol);
    if (std::abs(centre) < tol.bd_tol) {
      if (!g.domain().is_square()) return {};
      return {Label::WORS, std::min(margin, 1.0 - std::abs(centre) / tol.bd_tol)};
    }
    return {centre > 0.0 ? Label::BD2 : Label::BD1, margin};
  }

  const HalfSums hs = q12_half_sums(field);
  const double mean = (hs.left + hs.right) / hs.abs_total;
  const double cx = (hs.left - hs.right) / hs.abs_total;
  const double cy = (hs.bottom - hs.top) / hs.abs_total;

  std::array<std::pair<double, Label>, 3> scores = {{
      {std::abs(mean), mean > 0 ? Label::D1 : Label::D2},
      {std::abs(cx), cx > 0 ? Label::R3 : Label::R4},
      {std::abs(cy), cy > 0 ? Label::R2 : Label::R1},
  }};
  std::sort(scores.begin(), scores.end(),
            [](const auto& l, const auto& r) { return l.first > r.first; });
  const double margin = scores[0].first - scores[1].first;
  if (margin < tol.min_margin) return {Label::Unknown, 0.0};
  return {scores[0].second, margin};
}

double DefectSet::total_point_winding() const {
  double sum = 0.0;
  for (const auto& p : points) sum += p.winding;
  return sum;
}

DefectSet detect_defects(const QField& field, double relative_threshold) {
  const Grid& g = field.grid;
  const int nx = g.nx(), ny = g.ny();
  const auto s2 = s2_field(field);
  double max_s2 = 0.0;
  for (auto n : g.interior_nodes()) max_s2 = std::max(max_s2, s2[n]);

  DefectSet out;
  out.low_order_mask.assign(g.size(), false);
  if (!(max_s2 > 0.0)) return out;
  for (std::size_t n = 0; n < g.size(); ++n) {
    out.low_order_mask[n] = s2[n] < relative_threshold * max_s2;
  }

  // Nodes whose cells cannot carry a meaningful point winding.
  std::vector<bool> blocked(g.size(), false);
  const double min_side = std::min(g.domain().a, g.domain().b);
  for (const auto& c : components(g, out.low_order_mask)) {
    const bool corner = in_corner_zone(g, c);
    const double extent = std::max(c.bbox.xmax - c.bbox.xmin, c.bbox.ymax - c.bbox.ymin);
    if (!corner && !c.touches_boundary && extent <= 0.2 * min_side) continue;
    if (!corner) {
      auto lines = line_features(g, c);
      if (lines.empty()) lines.push_back({"interior", c.bbox});
      for (auto& l : lines) out.lines.push_back(std::move(l));
    }
    for (auto n : c.nodes) blocked[n] = true;
  }

  std::vector<double> phi(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) phi[n] = std::atan2(field.q12[n], field.q11[n]);
  // One wrapped difference per lattice edge keeps cell sums antisymmetric.
  auto dh = [&](int i, int j) { return wrap_angle(phi[g.index(i + 1, j)] - phi[g.index(i, j)]); };
  auto dv = [&](int i, int j) { return wrap_angle(phi[g.index(i, j + 1)] - phi[g.index(i, j)]); };

  const int cw = nx - 1, ch = ny - 1;
  std::vector<int> cell(static_cast<std::size_t>(cw) * ch, 0);
  for (int j = 0; j < ch; ++j) {
    for (int i = 0; i < cw; ++i) {
      if (blocked[g.index(i, j)] || blocked[g.index(i + 1, j)] || blocked[g.index(i, j + 1)] ||
          blocked[g.index(i + 1, j + 1)]) {
        continue;
      }
      const double turn = dh(i, j) + dv(i + 1, j) - dh(i, j + 1) - dv(i, j);
      cell[static_cast<std::size_t>(j) * cw + i] =
          static_cast<int>(std::lround(turn / (2.0 * std::numbers::pi)));
    }
  }

  std::vector<int> seen(cell.size(), 0);
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < ch; ++j) {
    for (int i = 0; i < cw; ++i) {
      const auto start = static_cast<std::size_t>(j) * cw + i;
      if (cell[start] == 0 || seen[start]) continue;
      seen[start] = 1;
      stack.assign(1, {i, j});
      int total = 0, count = 0;
      double sx = 0.0, sy = 0.0;
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        total += cell[static_cast<std::size_t>(cj) * cw + ci];
        ++count;
        sx += g.x(ci) + 0.5 * g.hx();
        sy += g.y(cj) + 0.5 * g.hy();
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ni = ci + di, nj = cj + dj;
            if (ni < 0 || nj < 0 || ni >= cw || nj >= ch) continue;
            const auto m = static_cast<std::size_t>(nj) * cw + ni;
            if (cell[m] != 0 && !seen[m]) {
              seen[m] = 1;
              stack.emplace_back(ni, nj);
            }
          }
        }
      }
      if (total != 0) out.points.push_back({sx / count, sy / count, 0.5 * total});
    }
  }
  return out;
}

VertexDegrees vertex_degrees(const ThetaEdges& edges) {
  constexpr double pi = std::numbers::pi;
  auto off_grid = [](double v, double unit, double offset) {
    const double k = (v - offset) / unit;
    return std::abs(k - std::round(k)) > 1e-9;
  };
  if (off_grid(edges.bottom, pi, 0.0) || off_grid(edges.top, pi, 0.0)) {
    throw std::invalid_argument("horizontal edge angles must be multiples of pi");
  }
  if (off_grid(edges.left, pi, 0.5 * pi) || off_grid(edges.right, pi, 0.5 * pi)) {
    throw std::invalid_argument("vertical edge angles must be odd multiples of pi/2");
  }
  const double two_pi = 2.0 * pi;
  return {(edges.left - edges.bottom) / two_pi, (edges.bottom - edges.right) / two_pi,
          (edges.right - edges.top) / two_pi, (edges.top - edges.left) / two_pi};
}

VertexDegrees arc_vertex_degrees(const QField& field, double radius, double ramp) {
  const Grid& g = field.grid;
  const double a = g.domain().a, b = g.domain().b;
  if (radius <= 0.0) {
    radius = std::min(std::max(2.0 * ramp, 8.0 * std::max(g.hx(), g.hy())), 0.25 * std::min(a, b));
  }
  if (radius >= 0.5 * std::min(a, b)) throw std::invalid_argument("arc radius too large");
  constexpr double pi = std::numbers::pi;
  const std::array<std::array<double, 2>, 4> centres = {{{0.0, 0.0}, {a, 0.0}, {a, b}, {0.0, b}}};
  constexpr int samples = 256;
  VertexDegrees out{};
  for (int c = 0; c < 4; ++c) {
    const double start = 0.5 * pi * c;
    double prev = 0.0, turn = 0.0;
    for (int k = 0; k <= samples; ++k) {
      const double t = start + 0.5 * pi * k / samples;
      const double x = std::clamp(centres[c][0] + radius * std::cos(t), 0.0, a);
      const double y = std::clamp(centres[c][1] + radius * std::sin(t), 0.0, b);
      const double phi = std::atan2(interpolate(g, field.q12, x, y), interpolate(g, field.q11, x, y));
      if (k > 0) turn += wrap_angle(phi - prev);
      prev = phi;
    }
    // phi = 2 theta
    out[c] = turn / (4.0 * pi);
  }
  return out;
}

double excess_charge(double degree) { return (std::abs(4.0 * degree) - 1.0) / 2.0; }

}  // namespace ldg
