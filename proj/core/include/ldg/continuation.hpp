#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldg/classify.hpp"
#include "ldg/energy.hpp"
#include "ldg/solvers.hpp"

namespace ldg {

class SeedNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingTransition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One converged equilibrium on a branch.
struct BranchPoint {
  double epsilon = 0.0;
  QField field;
  double energy = 0.0;
  double lambda_min = 0.0;
  SolutionClass class_label;
  double m11 = 0.0;
  double m12 = 0.0;
  double int_q12_sq = 0.0;  ///< domain average of q12^2

  bool stable() const { return lambda_min > 0.0; }
  /// Stability prefix plus label, e.g. "sD1" or "uBD2".
  std::string tag() const;
};

/// Verifies the residual, then computes energy, lambda_min, class and the
/// branch coordinates. Throws SeedNotConverged if the residual exceeds tol.
BranchPoint make_branch_point(const QField& field, const EnergyParams& p, double tol = 1e-9);

struct Transition {
  double epsilon = 0.0;
  std::string from;
  std::string to;

  std::string name() const { return from + "->" + to; }
};

enum class Termination { RangeEnd, EndPoint, Fold, MaxPoints };
std::string_view to_string(Termination t);

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<Transition> transitions;
  std::vector<double> folds;  ///< epsilon where the tangent turned back
  Termination terminated = Termination::RangeEnd;
};

enum class FoldPolicy {
  Jump,  ///< keep moving in epsilon: retry from the last point just past the turn
  Stop,  ///< end the branch with Termination::Fold
};

struct ContinuationPolicy {
  double initial_step = 0.01;
  double min_step = 1e-5;
  double max_step = 0.05;
  int max_corrector_iter = 5;
  int easy_iter = 3;           ///< corrector iterations counted as an easy accept
  int easy_accepts_to_double = 2;
  int max_halvings = 6;
  double tol = 1e-10;          ///< max-norm residual of accepted points
  int max_points = 2000;
  FoldPolicy at_fold = FoldPolicy::Jump;
  double jump_offset = 1e-3;   ///< epsilon increment of a natural-parameter restart
  double jump_distance = 0.1;  ///< largest RMS field change accepted for a restart
  bool refine_transitions = true;
  double transition_resolution = 2.5e-4;
};

struct EpsRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Pseudo-arclength continuation in (field, epsilon) with a secant
/// predictor and a bordered Newton corrector. `direction` is +1 (increasing
/// epsilon) or -1. Every accepted point carries lambda_min and a class;
/// changes of tag between neighbours become transitions, refined by
/// bisection in epsilon when the policy asks for it.
Branch continue_branch(const BranchPoint& seed, const BoundarySpec& bc, EpsRange range,
                       int direction, const ContinuationPolicy& policy = {});

/// Bisection on the tag between two neighbouring points, solving at
/// intermediate epsilon from the nearer earlier state.
double refine_transition(const BranchPoint& before, const BranchPoint& after,
                         const BoundarySpec& bc, double resolution, double tol = 1e-10);

struct SeedEntry {
  std::string name;
  BranchPoint point;
};

struct SeedLibrary {
  std::vector<SeedEntry> small;  ///< Table-1 lifts polished at eps_small
  std::vector<SeedEntry> large;  ///< large-epsilon limit polished at eps_large
  std::vector<std::string> failed;
};

/// Seeds polished by Newton; entries equal to an earlier one within 1e-6
/// (max norm) are merged.
SeedLibrary seed_library(const Grid& grid, const BoundarySpec& bc, double eps_small,
                         double eps_large);

/// Lift of the harmonic angle with the given edge data (s = 1), with the
/// boundary overwritten by the Dirichlet trace in Dirichlet mode.
QField theta_seed(const Grid& grid, const ThetaEdges& edges, const BoundarySpec& bc);

struct NamedTransition {
  std::string name;
  double epsilon = 0.0;
  double a = 0.0;
  double b = 0.0;
  double h = 0.0;
};

/// All transitions of all branches as named records.
std::vector<NamedTransition> transition_parameters(const std::vector<Branch>& branches,
                                                   const Grid& grid);

/// First record with the given name; throws MissingTransition otherwise.
const NamedTransition& find_transition(const std::vector<NamedTransition>& table,
                                       const std::string& name);

}  // namespace ldg
