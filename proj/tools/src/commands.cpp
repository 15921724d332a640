#include "commands.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <random>
#include <thread>

#include "ldg/analytic.hpp"

#ifndef LDG_VERSION
#define LDG_VERSION "unknown"
#endif

namespace ldg::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kRngName = "mt19937_64";

std::string numbered(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, k, ext);
  return buf;
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

json class_json(const SolutionClass& c) {
  return {{"label", std::string(to_string(c.label))}, {"confidence", c.confidence}};
}

ThetaState seed_state(const std::string& name) {
  try {
    return parse_theta_state(name);
  } catch (const std::invalid_argument&) {
    throw ConfigError("seed: expected limit, file, nontrivial or D1..R4, got '" + name + "'");
  }
}

double centre_q11(const QField& f) {
  const auto& d = f.grid.domain();
  return interpolate(f.grid, f.q11, 0.5 * d.a, 0.5 * d.b);
}

/// Largest |q11| on diagonal nodes; NaN off the square.
double diagonal_max(const QField& f) {
  const Grid& g = f.grid;
  if (g.nx() != g.ny()) return std::numeric_limits<double>::quiet_NaN();
  double m = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    m = std::max({m, std::abs(f.q11[g.index(i, i)]), std::abs(f.q11[g.index(i, g.ny() - 1 - i)])});
  }
  return m;
}

json defects_of(const QField& field, const RunConfig& config) {
  return defects_json(detect_defects(field), arc_vertex_degrees(field, config.arc_radius, config.bc.d));
}

struct ErrorInfo {
  int code;
  std::string kind;
};

}  // namespace

json defects_json(const DefectSet& defects, const VertexDegrees& degrees) {
  json points = json::array();
  for (const auto& p : defects.points) points.push_back({{"x", p.x}, {"y", p.y}, {"winding", p.winding}});
  json lines = json::array();
  for (const auto& l : defects.lines) {
    lines.push_back({{"edge_or_diagonal", l.edge_or_diagonal},
                     {"bbox", {l.bbox.xmin, l.bbox.ymin, l.bbox.xmax, l.bbox.ymax}}});
  }
  return {{"points", points},
          {"lines", lines},
          {"vertex_degrees", json(std::vector<double>(degrees.begin(), degrees.end()))}};
}

json transitions_json(const std::vector<NamedTransition>& table) {
  json out = json::array();
  for (const auto& t : table) {
    out.push_back({{"name", t.name}, {"epsilon", t.epsilon}, {"a", t.a}, {"b", t.b}, {"h", t.h}});
  }
  return out;
}

json config_json(const RunConfig& config) {
  json out = json::object();
  for (const auto& [k, v] : config.entries()) out[k] = v;
  return out;
}

QField make_seed(const RunConfig& config) {
  const Grid grid = config.grid();
  QField seed(grid);
  if (config.seed == "limit") {
    seed = config.bc.mode == AnchoringMode::Dirichlet ? sample_strong_limit(grid, config.bc.d)
                                                      : harmonic_limit(grid, config.bc);
  } else if (config.seed == "file") {
    if (config.field_path.empty()) throw ConfigError("seed = file needs field = <csv>");
    seed = read_field_csv(fs::path(config.field_path));
    if (!seed.grid.same_shape(grid)) {
      throw ConfigError("field " + config.field_path + " does not match domain and grid.h");
    }
  } else {
    seed = theta_seed(grid, theta_edges(seed_state(config.seed)), config.bc);
  }
  if (config.perturb > 0.0) {
    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> noise(-config.perturb, config.perturb);
    const bool interior_only = config.bc.mode == AnchoringMode::Dirichlet;
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        if (interior_only && grid.on_boundary(i, j)) continue;
        const auto n = grid.index(i, j);
        seed.q11[n] += noise(rng);
        seed.q12[n] += noise(rng);
      }
    }
  }
  return seed;
}

CommandResult run_analytic(const RunConfig& config) {
  const Grid grid = config.grid();
  CommandResult r;
  QField field(grid);
  if (config.analytic_mode == "strong") {
    field = sample_strong_limit(grid, config.bc.d);
  } else if (config.analytic_mode == "weak") {
    field = sample_weak_limit(grid, config.bc.tau, config.n_roots);
  } else if (config.analytic_mode == "theta") {
    const auto edges = theta_edges(seed_state(config.state));
    field = lift_theta(sample_theta_harmonic(grid, edges));
    const auto deg = vertex_degrees(edges);
    r.results["vertex_degrees"] = std::vector<double>(deg.begin(), deg.end());
  } else {
    throw ConfigError("analytic.mode: expected strong, weak or theta, got '" + config.analytic_mode + "'");
  }
  write_field_csv(config.out_dir / "field.csv", field);
  r.outputs.push_back("field.csv");
  r.results["mode"] = config.analytic_mode;
  r.results["centre_q11"] = centre_q11(field);
  if (grid.domain().is_square()) r.results["diagonal_max_abs_q11"] = diagonal_max(field);
  return r;
}

CommandResult run_solve(const RunConfig& config) {
  const auto p = config.params();
  const auto nr = newton_solve_or_throw(make_seed(config), p, config.newton_tol, config.newton_max_iter);
  const auto bp = make_branch_point(nr.field, p, std::max(config.newton_tol, 1e-9));
  CommandResult r;
  write_field_csv(config.out_dir / "field.csv", nr.field);
  write_json(config.out_dir / "defects.json", defects_of(nr.field, config));
  r.outputs = {"field.csv", "defects.json"};
  r.results = {{"energy", bp.energy},
               {"lambda_min", bp.lambda_min},
               {"stable", bp.stable()},
               {"class", class_json(bp.class_label)},
               {"tag", bp.tag()},
               {"iterations", nr.report.iterations},
               {"residual", nr.report.final_residual_norm}};
  return r;
}

CommandResult run_relax(const RunConfig& config) {
  const auto traj = gradient_flow(make_seed(config), config.params(), config.flow);
  CommandResult r;
  const fs::path dir = config.out_dir / "trajectory";
  fs::create_directories(dir);
  json times = json::array(), energies = json::array(), files = json::array(), windings = json::array();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& s = traj.snapshots[k];
    const auto name = numbered("snapshot", k, ".csv");
    write_field_csv(dir / name, s.field);
    times.push_back(s.time);
    energies.push_back(s.energy);
    files.push_back(name);
    json w = json::array();
    for (const auto& d : detect_defects(s.field).points) w.push_back(d.winding);
    windings.push_back(w);
    r.outputs.push_back("trajectory/" + name);
  }
  const json manifest = {{"times", times},
                         {"energies", energies},
                         {"files", files},
                         {"point_windings", windings},
                         {"terminal_class", std::string(to_string(traj.terminal_class.label))},
                         {"converged", traj.converged}};
  write_json(dir / "trajectory.json", manifest);
  r.outputs.push_back("trajectory/trajectory.json");
  r.results = {{"terminal_class", class_json(traj.terminal_class)},
               {"converged", traj.converged},
               {"steps", traj.steps},
               {"dt", traj.dt},
               {"final_energy", traj.snapshots.back().energy},
               {"residual", traj.final_residual_norm}};
  if (!traj.converged) {
    throw NonConvergence("relaxation stopped before reaching relax.stop_tol",
                         SolverReport{false, static_cast<int>(traj.steps), traj.final_residual_norm,
                                      traj.snapshots.back().energy, {}});
  }
  return r;
}

CommandResult run_continue(const RunConfig& config) {
  RunConfig start = config;
  start.epsilon = config.direction > 0 ? config.eps_range.lo : config.eps_range.hi;
  const auto p = start.params();
  const auto nr = newton_solve_or_throw(make_seed(start), p, config.newton_tol, config.newton_max_iter);
  const auto seed = make_branch_point(nr.field, p, std::max(config.newton_tol, 1e-9));
  const auto branch = continue_branch(seed, config.bc, config.eps_range, config.direction, config.policy);
  const auto table = transition_parameters({branch}, config.grid());

  CommandResult r;
  write_branch_csv(config.out_dir / "branch.csv", branch);
  write_json(config.out_dir / "transitions.json", transitions_json(table));
  write_field_csv(config.out_dir / "final_field.csv", branch.points.back().field);
  r.outputs = {"branch.csv", "transitions.json", "final_field.csv"};
  r.results = {{"points", branch.points.size()},
               {"termination", std::string(to_string(branch.terminated))},
               {"folds", branch.folds},
               {"seed_tag", seed.tag()},
               {"final_tag", branch.points.back().tag()},
               {"transitions", transitions_json(table)}};
  return r;
}

CommandResult run_classify(const RunConfig& config) {
  if (config.field_path.empty()) throw ConfigError("classify needs field = <csv>");
  const auto field = read_field_csv(fs::path(config.field_path));
  const auto c = classify(field);
  const auto defects = detect_defects(field);
  CommandResult r;
  write_json(config.out_dir / "defects.json",
             defects_json(defects, arc_vertex_degrees(field, config.arc_radius, config.bc.d)));
  r.outputs = {"defects.json"};
  r.results = {{"class", class_json(c)},
               {"point_defects", defects.points.size()},
               {"total_point_winding", defects.total_point_winding()}};
  return r;
}

CommandResult run_sweep(const RunConfig& config) {
  if (config.sweep_command == "sweep") throw ConfigError("sweep.command cannot be sweep");
  if (config.sweep_values.empty()) throw ConfigError("sweep.values is empty");
  std::vector<RunConfig> runs;
  for (std::size_t k = 0; k < config.sweep_values.size(); ++k) {
    RunConfig c = config;
    c.set(config.sweep_key, config.sweep_values[k], "sweep.values[" + std::to_string(k) + "]");
    c.out_dir = config.out_dir / numbered("run", k, "");
    c.validate();
    runs.push_back(std::move(c));
  }

  std::vector<int> codes(runs.size(), 0);
  std::vector<std::string> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      std::ostringstream err;
      codes[k] = execute(config.sweep_command, runs[k], err);
      errors[k] = err.str();
    }
  };
  {
    const auto n = std::min<std::size_t>(config.sweep_jobs, runs.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  CommandResult r;
  json list = json::array();
  int failed = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto dir = numbered("run", k, "");
    list.push_back({{"value", config.sweep_values[k]}, {"dir", dir}, {"exit_code", codes[k]}});
    r.outputs.push_back(dir + "/manifest.json");
    failed += codes[k] != kOk;
  }
  r.results = {{"key", config.sweep_key}, {"command", config.sweep_command}, {"runs", list},
               {"failed", failed}};
  return r;
}

int execute(const std::string& command, const RunConfig& config, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  json manifest = {{"command", command},
                   {"version", LDG_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                 "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"config", config_json(config)},
                   {"rng", {{"engine", kRngName}, {"seed", config.rng_seed}}}};
  ErrorInfo error{kOk, ""};
  std::string message;
  CommandResult result;
  try {
    config.validate();
    fs::create_directories(config.out_dir);
    if (command == "analytic") result = run_analytic(config);
    else if (command == "solve") result = run_solve(config);
    else if (command == "relax") result = run_relax(config);
    else if (command == "continue") result = run_continue(config);
    else if (command == "classify") result = run_classify(config);
    else if (command == "sweep") result = run_sweep(config);
    else throw ConfigError("unknown command '" + command + "'");
    if (command == "sweep" && result.results.value("failed", 0) > 0) {
      error = {kNumericalFailure, "numerical"};
      message = "some sweep runs failed";
    }
  } catch (const ConfigError& e) {
    error = {kConfigError, "config"};
    message = e.what();
  } catch (const FormatError& e) {
    error = {kConfigError, "input"};
    message = e.what();
  } catch (const std::invalid_argument& e) {
    error = {kConfigError, "config"};
    message = e.what();
  } catch (const NonConvergence& e) {
    error = {kNumericalFailure, "non_convergence"};
    message = e.what();
    manifest["solver_report"] = {{"iterations", e.report().iterations},
                                 {"residual", e.report().final_residual_norm}};
  } catch (const SingularLinearization& e) {
    error = {kNumericalFailure, "singular_linearization"};
    message = e.what();
  } catch (const StepUnstable& e) {
    error = {kNumericalFailure, "step_unstable"};
    message = e.what();
  } catch (const std::exception& e) {
    error = {kNumericalFailure, "numerical"};
    message = e.what();
  }

  manifest["status"] = error.code == kOk ? "ok" : "failed";
  manifest["results"] = result.results;
  manifest["outputs"] = result.outputs;
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (error.code != kOk) {
    const json e = {{"kind", error.kind}, {"message", message}, {"exit_code", error.code}};
    manifest["error"] = e;
    err << json{{"error", e}}.dump() << '\n';
  }
  std::error_code ec;
  if (fs::is_directory(config.out_dir, ec)) {
    try {
      write_json(config.out_dir / "manifest.json", manifest);
    } catch (const std::exception& e) {
      err << json{{"error", {{"kind", "io"}, {"message", e.what()}}}}.dump() << '\n';
    }
  }
  return error.code;
}

}  // namespace ldg::cli
