#include <doctest.h>

#include "ldg/analytic.hpp"
#include "ldg/continuation.hpp"

using namespace ldg;

namespace {

const BoundarySpec kBc = BoundarySpec::dirichlet(0.03);

BranchPoint seed_point(const RectDomain& dom, ThetaState s, double eps, double h) {
  const Grid g = make_grid(dom, h);
  const EnergyParams p{eps, kBc};
  const auto nr = newton_solve(theta_seed(g, theta_edges(s), kBc), p);
  REQUIRE(nr.report.converged);
  return make_branch_point(nr.field, p);
}

}  // namespace

TEST_CASE("branch point requires an equilibrium") {
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 16);
  CHECK_THROWS_AS(make_branch_point(sample_strong_limit(g, kBc.d), {0.1, kBc}), SeedNotConverged);
  const auto bp = seed_point({1.0, 1.0}, ThetaState::D1, 0.05, 1.0 / 16);
  CHECK(bp.tag() == "sD1");
  CHECK(bp.stable());
}

TEST_CASE("diagonal branch on 1.5x1 turns into BD2") {
  const auto seed = seed_point({1.5, 1.0}, ThetaState::D1, 0.05, 1.0 / 32);
  const auto br = continue_branch(seed, kBc, {0.05, 0.3}, +1);
  CHECK(br.terminated == Termination::RangeEnd);
  REQUIRE(br.points.size() > 10);
  CHECK(br.points.back().epsilon == doctest::Approx(0.3));
  for (std::size_t k = 1; k < br.points.size(); ++k) {
    CHECK(br.points[k].epsilon > br.points[k - 1].epsilon);
    CHECK(residual_norm(br.points[k].field, {br.points[k].epsilon, kBc}) <= 1e-9);
  }
  REQUIRE(br.transitions.size() == 1);
  CHECK(br.transitions[0].name() == "sD1->sBD2");
  CHECK(br.points.back().tag() == "sBD2");

  // The refined transition lies between the two points that straddle it.
  const double et = br.transitions[0].epsilon;
  std::size_t k = 0;
  while (br.points[k + 1].tag() == "sD1") ++k;
  CHECK(et >= br.points[k].epsilon - 1e-12);
  CHECK(et <= br.points[k + 1].epsilon + 1e-12);

  const auto table = transition_parameters({br}, br.points[0].field.grid);
  CHECK(find_transition(table, "sD1->sBD2").a == 1.5);
  CHECK_THROWS_AS(find_transition(table, "sR3->uR3"), MissingTransition);
}

TEST_CASE("continuation is deterministic") {
  const auto seed = seed_point({1.5, 1.0}, ThetaState::R3, 0.1, 1.0 / 16);
  const auto a = continue_branch(seed, kBc, {0.1, 0.2}, +1);
  const auto b = continue_branch(seed, kBc, {0.1, 0.2}, +1);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].epsilon == b.points[k].epsilon);
    CHECK(a.points[k].energy == b.points[k].energy);
    CHECK(a.points[k].field.q11 == b.points[k].field.q11);
  }
}

TEST_CASE("stop policy ends the rotated branch at its fold") {
  auto seed = seed_point({1.5, 1.0}, ThetaState::R2, 0.05, 1.0 / 32);
  ContinuationPolicy stop;
  stop.at_fold = FoldPolicy::Stop;
  const auto br = continue_branch(seed, kBc, {0.05, 0.3}, +1, stop);
  CHECK(br.terminated == Termination::Fold);
  REQUIRE_FALSE(br.folds.empty());
  CHECK(br.folds.back() < 0.3);
}

TEST_CASE("downward continuation of WORS loses stability once") {
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 16);
  const EnergyParams p{1.0, kBc};
  const auto nr = newton_solve(sample_strong_limit(g, kBc.d), p);
  REQUIRE(nr.report.converged);
  const auto br = continue_branch(make_branch_point(nr.field, p), kBc, {0.05, 1.0}, -1);
  REQUIRE_FALSE(br.transitions.empty());
  CHECK(br.transitions[0].name() == "sWORS->uWORS");
  CHECK(br.points.back().epsilon == doctest::Approx(0.05));
}

TEST_CASE("seed library on the square") {
  const Grid g = make_grid({1.0, 1.0}, 1.0 / 16);
  const auto lib = seed_library(g, kBc, 0.03, 5.0);
  CHECK(lib.small.size() == 6);
  for (const auto& s : lib.small) CHECK(s.point.stable());
  REQUIRE(lib.large.size() == 1);
  CHECK(lib.large[0].point.tag() == "sWORS");
  CHECK(lib.failed.empty());
}

TEST_CASE("policy and range validation") {
  const auto seed = seed_point({1.0, 1.0}, ThetaState::D1, 0.05, 1.0 / 16);
  CHECK_THROWS_AS(continue_branch(seed, kBc, {0.3, 0.1}, +1), std::invalid_argument);
  CHECK_THROWS_AS(continue_branch(seed, kBc, {0.01, 0.3}, 0), std::invalid_argument);
}
