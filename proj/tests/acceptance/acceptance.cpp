// Acceptance checks, one line per criterion: "criterion N: PASS|FAIL  details".
// Usage: ldg_acceptance [--only N]...

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "ldg/analytic.hpp"
#include "ldg/classify.hpp"
#include "ldg/continuation.hpp"
#include "ldg/io.hpp"
#include "support/oracles.hpp"

using namespace ldg;
namespace fs = std::filesystem;

namespace {

const BoundarySpec kBc = BoundarySpec::dirichlet(0.03);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

QField newton_or_die(const QField& seed, const EnergyParams& p) {
  return newton_solve_or_throw(seed, p, 1e-10, 100).field;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}

// Large-epsilon rate against the analytic limit. The h-level floor is the
// discrete harmonic map minus the series; subtracting it node by node leaves
// Newton(eps) - discrete limit.
Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 128);
  const QField analytic = sample_strong_limit(g, kBc.d);
  const QField floor_field = harmonic_limit(g, kBc);
  const double floor = max_abs_diff(floor_field, analytic);
  std::vector<double> eps = {2, 4, 8, 16}, diff, raw;
  for (double e : eps) {
    const QField q = newton_or_die(analytic, {e, kBc});
    diff.push_back(max_abs_diff(q, floor_field));
    raw.push_back(max_abs_diff(q, analytic));
  }
  const double s = slope(eps, diff);
  std::string d = "diffs";
  for (double v : diff) d += fmt(" %.3e", v);
  o.require(true, d + fmt(" floor %.2e", floor) + fmt(" raw@16 %.2e", raw.back()));
  o.require(std::abs(s + 2.0) <= 0.3, fmt("slope %.3f", s));
  const double t = seconds_since(t0);
  o.require(t <= 120.0, fmt("%.1f s", t));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 64);
  double series = 0.0;
  for (int k = 0; k <= 256; ++k) {
    const double t = k / 256.0;
    series = std::max({series, std::abs(limit_strong_Q(t, t, g.domain(), kBc.d).q11),
                       std::abs(limit_strong_Q(t, 1 - t, g.domain(), kBc.d).q11)});
  }
  o.require(series <= 1e-10, fmt("series diagonal max %.2e", series));
  const QField q = newton_or_die(sample_strong_limit(g, kBc.d), {5.0, kBc});
  double fd = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    fd = std::max({fd, std::abs(q.q11[g.index(i, i)]), std::abs(q.q11[g.index(i, g.nx() - 1 - i)])});
  }
  const double bound = 5.0 * g.hx() * g.hx();
  o.require(fd <= bound, fmt("Newton eps=5 diagonal max %.2e", fd) + fmt(" <= %.2e", bound));
  return o;
}

Outcome criterion3() {
  Outcome o;
  const double c1 = limit_strong_Q(0.5, 0.5, {1.0, 1.0}, kBc.d).q11;
  o.require(std::abs(c1) <= 1e-12, fmt("a=1: %.2e", c1));
  for (double a : {1.1, 1.25, 1.5, 2.0}) {
    const double c = limit_strong_Q(a / 2, 0.5, {a, 1.0}, kBc.d).q11;
    o.require(c > 0.0, fmt("a=%.2f: ", a) + fmt("%.4f", c));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  const RectDomain sq{1.0, 1.0};
  for (double tau : {3.0, 10.0}) {
    const auto roots = robin_roots(tau, 1.0, 4000);
    double worst_root = 0.0;
    for (double p : roots.roots) worst_root = std::max(worst_root, std::abs(RobinRoots::residual(p, tau, 1.0)));
    o.require(worst_root <= 1e-12, fmt("tau=%g roots residual ", tau) + fmt("%.1e", worst_root));

    const WeakLimit weak(sq, tau);
    const auto fd = oracle::laplace_robin(1.0, 1.0, 513, 513, tau, {1.0, -1.0, 1.0, -1.0});
    const Grid fg(sq, 513, 513);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double x = u(rng), y = u(rng);
      worst = std::max(worst, std::abs(weak.q11(x, y) - interpolate(fg, fd.u, x, y)));
    }
    o.require(worst <= 1e-4, fmt("FD 513^2 max diff %.1e", worst));

    double diag = 0.0;
    for (int k = 1; k < 64; ++k) {
      const double t = k / 64.0;
      diag = std::max({diag, std::abs(weak.q11(t, t)), std::abs(weak.q11(t, 1 - t))});
    }
    o.require(diag <= 1e-8, fmt("diagonals %.1e", diag));
  }
  return o;
}

double state_energy(const RectDomain& dom, ThetaState s, double eps, double h) {
  const Grid g = make_grid(dom, h);
  const EnergyParams p{eps, kBc};
  return energy(newton_or_die(theta_seed(g, theta_edges(s), kBc), p), p);
}

Outcome criterion5() {
  Outcome o;
  const double h = 1.0 / 64;
  const double d1 = state_energy({1.5, 1.0}, ThetaState::D1, 0.03, h);
  const double r3 = state_energy({1.5, 1.0}, ThetaState::R3, 0.03, h);
  const double r2 = state_energy({1.5, 1.0}, ThetaState::R2, 0.03, h);
  o.require(d1 < r3 && r3 < r2, fmt("1.5x1: D1 %.4f", d1) + fmt(" < R3 %.4f", r3) + fmt(" < R2 %.4f", r2));
  std::vector<double> rs;
  for (auto s : {ThetaState::R1, ThetaState::R2, ThetaState::R3, ThetaState::R4}) {
    rs.push_back(state_energy({1.0, 1.0}, s, 0.03, h));
  }
  double spread = 0.0;
  for (double e : rs) spread = std::max(spread, std::abs(e - rs[0]) / std::abs(rs[0]));
  o.require(spread <= 1e-6, fmt("square R1..R4 relative spread %.1e", spread));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const Grid g = make_grid({1.5, 1.0}, 1.0 / 32);
  const EnergyParams p{0.1, kBc};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  QField q(g), v(g);
  for (auto n : g.interior_nodes()) {
    q.q11[n] = u(rng), q.q12[n] = u(rng);
    v.q11[n] = u(rng), v.q12[n] = u(rng);
  }
  apply_dirichlet(q, kBc);
  const QField r = residual(q, p);
  double predicted = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      predicted -= 4.0 * g.area_weight(i, j) * (r.q11[n] * v.q11[n] + r.q12[n] * v.q12[n]);
    }
  }
  auto e = [&](const std::vector<double>& x) {
    QField f(g);
    std::copy(x.begin(), x.begin() + g.size(), f.q11.begin());
    std::copy(x.begin() + g.size(), x.end(), f.q12.begin());
    return energy(f, p);
  };
  std::vector<double> x(q.q11), dir(v.q11);
  x.insert(x.end(), q.q12.begin(), q.q12.end());
  dir.insert(dir.end(), v.q12.begin(), v.q12.end());
  const double fd = oracle::directional_derivative(e, x, dir, 1e-5);
  const double rel = std::abs(fd - predicted) / std::abs(predicted);
  o.require(rel <= 1e-6, fmt("gradient rel err %.1e", rel));

  const DofMap dofs(g, kBc.mode);
  const auto s = assemble_stiffness(q, p, dofs);
  const Eigen::SparseMatrix<double> st = s.transpose();
  const double asym = (s - st).norm() / s.norm();
  o.require(asym <= 1e-10, fmt("Hessian asymmetry %.1e", asym));

  const QField eq = newton_or_die(theta_seed(g, theta_edges(ThetaState::D1), kBc), p);
  const auto eig = smallest_eigenvalue(eq, p);
  o.require(eig.residual <= 1e-8, fmt("eigen residual %.1e", eig.residual) + fmt(" (lambda %.4f)", eig.lambda_min));
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (const RectDomain dom : {RectDomain{1.0, 1.0}, RectDomain{1.5, 1.0}}) {
    const Grid g = make_grid(dom, 1.0 / 32);
    const EnergyParams p{5.0, kBc};
    std::vector<QField> sols;
    double spread = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      QField init = sample_strong_limit(g, kBc.d);
      for (auto n : g.interior_nodes()) init.q11[n] += u(rng), init.q12[n] += u(rng);
      sols.push_back(newton_or_die(init, p));
      spread = std::max(spread, max_abs_diff(sols.back(), sols.front()));
    }
    o.require(spread <= 1e-6, fmt("%.1fx1: 10 starts, max spread ", dom.a) + fmt("%.1e", spread));
  }
  return o;
}

double wors_instability(double h) {
  const Grid g = make_grid({1.0, 1.0}, h);
  const auto lib = seed_library(g, kBc, 0.02, 5.0);
  const auto br = continue_branch(lib.large.at(0).point, kBc, {0.02, 5.0}, -1);
  for (const auto& t : br.transitions) {
    if (t.name() == "sWORS->uWORS") return t.epsilon;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion8() {
  Outcome o;
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 64);
  const auto lib = seed_library(g, kBc, 0.02, 5.0);
  int stable = 0;
  for (const auto& s : lib.small) stable += s.point.stable();
  o.require(stable >= 6, "stable at eps=0.02: " + std::to_string(stable));
  const bool one = lib.large.size() == 1 && lib.large[0].point.tag() == "sWORS";
  o.require(one, "solutions at eps=5: " + std::to_string(lib.large.size()) +
                     (lib.large.empty() ? "" : " (" + lib.large[0].point.tag() + ")"));
  const double coarse = wors_instability(1.0 / 32), fine = wors_instability(1.0 / 64);
  const double rel = std::abs(coarse - fine) / fine;
  o.require(rel <= 0.05, fmt("eps* h=1/32 %.5f", coarse) + fmt(" h=1/64 %.5f", fine) + fmt(" rel %.1e", rel));
  return o;
}

Branch branch_from(ThetaState s, double h) {
  const Grid g = make_grid({1.5, 1.0}, h);
  const EnergyParams p{0.02, kBc};
  const auto seed = make_branch_point(newton_or_die(theta_seed(g, theta_edges(s), kBc), p), p);
  return continue_branch(seed, kBc, {0.02, 0.3}, +1);
}

double transition_at(const Branch& br, const std::string& name) {
  for (const auto& t : br.transitions) {
    if (t.name() == name) return t.epsilon;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion9() {
  Outcome o;
  const double h = 1.0 / 32;
  const Branch d1 = branch_from(ThetaState::D1, h);
  const double e_d1 = transition_at(d1, "sD1->sBD2");
  o.require(!std::isnan(e_d1), fmt("sD1->sBD2 at %.5f", e_d1));
  // Jump of the q12 mean square across the label change versus the last
  // accepted step before it.
  std::size_t k = 1;
  while (k + 1 < d1.points.size() && d1.points[k + 1].class_label.label == Label::D1) ++k;
  if (k + 1 < d1.points.size() && k >= 1) {
    const double jump = std::abs(d1.points[k + 1].int_q12_sq - d1.points[k].int_q12_sq);
    const double before = std::abs(d1.points[k].int_q12_sq - d1.points[k - 1].int_q12_sq);
    o.require(jump > 10.0 * before, fmt("q12 jump %.2e", jump) + fmt(" vs prior step %.2e", before));
  } else {
    o.require(false, "no D1 -> BD2 label change on the branch");
  }

  const Branch r2 = branch_from(ThetaState::R2, h);
  const double end = r2.points.back().epsilon;
  o.require(r2.terminated == Termination::EndPoint && end < e_d1,
            "sR2 " + std::string(to_string(r2.terminated)) + fmt(" at %.5f", end));

  const Branch r3 = branch_from(ThetaState::R3, h);
  const double a = transition_at(r3, "sR3->uR3"), b = transition_at(r3, "uR3->uBD2"),
               c = transition_at(r3, "uBD2->sBD2");
  o.require(a < b && b < c, fmt("sR3->uR3 %.5f", a) + fmt(" < uR3->uBD2 %.5f", b) + fmt(" < uBD2->sBD2 %.5f", c));
  o.require(std::abs(c - e_d1) <= 1e-3, fmt("|uBD2->sBD2 - sD1->sBD2| = %.1e", std::abs(c - e_d1)));
  return o;
}

Outcome criterion10() {
  Outcome o;
  struct Run {
    double a, eps;
  };
  for (const Run run : {Run{1.0, 0.4}, Run{5.0, 0.4}, Run{1.0, 0.05}, Run{5.0, 0.05}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = make_grid({run.a, 1.0}, 1.0 / 64);
    FlowOptions opts;
    opts.snap_every = 200;
    const auto tr = gradient_flow(theta_seed(g, theta_edges(ThetaState::NonTrivial), kBc), {run.eps, kBc}, opts);
    const Label l = tr.terminal_class.label;
    bool ok = tr.converged;
    if (run.eps == 0.4) ok = ok && l == (run.a == 1.0 ? Label::WORS : Label::BD2);
    else ok = ok && is_trivial_topology(l);
    // snapshot 0 is the seed itself
    int seen = 0;
    bool halves = true;
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
      for (const auto& d : detect_defects(tr.snapshots[k].field).points) {
        ++seen;
        halves = halves && std::abs(std::abs(d.winding) - 0.5) < 1e-12;
      }
    }
    const double t = seconds_since(t0);
    o.require(ok && halves && t <= 600.0, fmt("%gx1 ", run.a) + fmt("eps=%g -> ", run.eps) +
                                              std::string(to_string(l)) + ", " + std::to_string(seen) +
                                              " point defects" + (halves ? " all +-1/2" : " not all +-1/2") +
                                              fmt(", %.1f s", t));
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion11() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "ldgrect_acceptance_determinism";
  fs::remove_all(root);
  RunConfig c;
  c.domain = {1.5, 1.0};
  c.h = 1.0 / 32;
  c.seed = "D1";
  c.eps_range = {0.02, 0.3};
  std::ostringstream err;
  std::vector<std::string> csv;
  for (const char* name : {"first", "second"}) {
    c.out_dir = root / name;
    const int code = cli::execute("continue", c, err);
    o.require(code == cli::kOk, std::string(name) + " run exit " + std::to_string(code));
    csv.push_back(slurp(c.out_dir / "branch.csv"));
  }
  o.require(!csv[0].empty() && csv[0] == csv[1], "branch.csv " + std::to_string(csv[0].size()) + " bytes, identical");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
      criterion7, criterion8, criterion9, criterion10, criterion11};
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) {
    if (std::string(argv[k]) == "--only" && k + 1 < argc) selected.push_back(std::atoi(argv[++k]));
  }
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }
  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
