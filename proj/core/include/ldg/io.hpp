#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldg/boundary.hpp"
#include "ldg/continuation.hpp"
#include "ldg/grid.hpp"
#include "ldg/solvers.hpp"

namespace ldg {

/// Malformed input files. The message carries "source:line:" when known.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header `x,y,q11,q12,s2`, one row per node in storage order, 17
/// significant digits.
void write_field_csv(std::ostream& out, const QField& field);
void write_field_csv(const std::filesystem::path& path, const QField& field);

/// Inverse of write_field_csv. The grid is rebuilt from the node count of
/// the first row and the largest coordinates.
QField read_field_csv(std::istream& in, const std::string& source = "<stream>");
QField read_field_csv(const std::filesystem::path& path);

/// Header `eps,energy,lambda_min,class,m11,m12,int_q12_sq`; the class column
/// holds the stability tag.
void write_branch_csv(std::ostream& out, const Branch& branch);
void write_branch_csv(const std::filesystem::path& path, const Branch& branch);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Everything one CLI run needs. Serialises to flat `key = value` text.
struct RunConfig {
  RectDomain domain{1.0, 1.0};
  double h = 1.0 / 64.0;
  BoundarySpec bc;

  double epsilon = 0.1;
  EpsRange eps_range{0.01, 1.0};
  int direction = 1;

  std::string seed = "limit";  ///< limit | nontrivial | D1..R4 | file
  std::string field_path;      ///< input field for seed = file and for classify
  double perturb = 0.0;        ///< uniform noise amplitude added to the seed interior
  std::uint64_t rng_seed = 1;

  std::string analytic_mode = "strong";  ///< strong | weak | theta
  std::string state = "D1";
  int n_roots = 4000;

  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  FlowOptions flow;
  ContinuationPolicy policy;

  double arc_radius = 0.0;  ///< vertex-degree arc; 0 picks the default

  std::string sweep_command = "solve";
  std::string sweep_key = "eps";
  std::vector<std::string> sweep_values;
  int sweep_jobs = 1;

  std::filesystem::path out_dir = "out";

  /// Sets one key from text. Throws ConfigError naming `where`.
  void set(const std::string& key, const std::string& value, const std::string& where = "");

  /// All keys with their current values, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// Cross-field checks (positive sizes, valid boundary data, ordered range).
  void validate() const;

  Grid grid() const { return make_grid(domain, h); }
  EnergyParams params() const { return EnergyParams{epsilon, bc}; }
};

/// Reads `key = value` lines; `#` starts a comment. Errors are reported as
/// "source:line: message".
void load_config(std::istream& in, RunConfig& config, const std::string& source = "<config>");
void load_config(const std::filesystem::path& path, RunConfig& config);

void save_config(std::ostream& out, const RunConfig& config);

}  // namespace ldg
