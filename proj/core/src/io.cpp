#include "ldg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace ldg {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_number(std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(text) + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? "," : "") + items[k];
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Key real_key(std::string name, Member member) {
  return {std::move(name),
          [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = parse_number<double>(v); },
          [member](const RunConfig& c) { return format_double(std::invoke(member, c)); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(real_key("domain.a", [](auto& c) -> auto& { return c.domain.a; }));
    k.push_back(real_key("domain.b", [](auto& c) -> auto& { return c.domain.b; }));
    k.push_back(real_key("grid.h", [](auto& c) -> auto& { return c.h; }));
    k.push_back({"bc.mode",
                 [](RunConfig& c, std::string_view v) { c.bc.mode = parse_anchoring_mode(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.bc.mode)); }});
    k.push_back(real_key("bc.d", [](auto& c) -> auto& { return c.bc.d; }));
    k.push_back(real_key("bc.tau", [](auto& c) -> auto& { return c.bc.tau; }));
    k.push_back(real_key("eps", [](auto& c) -> auto& { return c.epsilon; }));
    k.push_back({"eps.range",
                 [](RunConfig& c, std::string_view v) {
                   const auto parts = split(v, ':');
                   if (parts.size() != 2) throw std::invalid_argument("expected lo:hi");
                   c.eps_range = {parse_number<double>(parts[0]), parse_number<double>(parts[1])};
                 },
                 [](const RunConfig& c) {
                   return format_double(c.eps_range.lo) + ":" + format_double(c.eps_range.hi);
                 }});
    k.push_back({"direction",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "up" || v == "+1" || v == "1") c.direction = 1;
                   else if (v == "down" || v == "-1") c.direction = -1;
                   else throw std::invalid_argument("expected up or down");
                 },
                 [](const RunConfig& c) { return std::string(c.direction > 0 ? "up" : "down"); }});
    k.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = v; },
                 [](const RunConfig& c) { return c.seed; }});
    k.push_back({"field", [](RunConfig& c, std::string_view v) { c.field_path = v; },
                 [](const RunConfig& c) { return c.field_path; }});
    k.push_back(real_key("perturb", [](auto& c) -> auto& { return c.perturb; }));
    k.push_back({"rng.seed",
                 [](RunConfig& c, std::string_view v) { c.rng_seed = parse_number<std::uint64_t>(v); },
                 [](const RunConfig& c) { return std::to_string(c.rng_seed); }});
    k.push_back({"analytic.mode", [](RunConfig& c, std::string_view v) { c.analytic_mode = v; },
                 [](const RunConfig& c) { return c.analytic_mode; }});
    k.push_back({"analytic.state", [](RunConfig& c, std::string_view v) { c.state = v; },
                 [](const RunConfig& c) { return c.state; }});
    k.push_back({"analytic.roots",
                 [](RunConfig& c, std::string_view v) { c.n_roots = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.n_roots); }});
    k.push_back(real_key("newton.tol", [](auto& c) -> auto& { return c.newton_tol; }));
    k.push_back({"newton.max_iter",
                 [](RunConfig& c, std::string_view v) { c.newton_max_iter = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.newton_max_iter); }});
    k.push_back(real_key("relax.dt", [](auto& c) -> auto& { return c.flow.dt; }));
    k.push_back(real_key("relax.stop_tol", [](auto& c) -> auto& { return c.flow.stop_tol; }));
    k.push_back({"relax.snap_every",
                 [](RunConfig& c, std::string_view v) { c.flow.snap_every = parse_number<long>(v); },
                 [](const RunConfig& c) { return std::to_string(c.flow.snap_every); }});
    k.push_back({"relax.max_steps",
                 [](RunConfig& c, std::string_view v) { c.flow.max_steps = parse_number<long>(v); },
                 [](const RunConfig& c) { return std::to_string(c.flow.max_steps); }});
    k.push_back(real_key("relax.max_seconds", [](auto& c) -> auto& { return c.flow.max_seconds; }));
    k.push_back(real_key("continue.initial_step", [](auto& c) -> auto& { return c.policy.initial_step; }));
    k.push_back(real_key("continue.min_step", [](auto& c) -> auto& { return c.policy.min_step; }));
    k.push_back(real_key("continue.max_step", [](auto& c) -> auto& { return c.policy.max_step; }));
    k.push_back({"continue.max_points",
                 [](RunConfig& c, std::string_view v) { c.policy.max_points = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.policy.max_points); }});
    k.push_back({"continue.at_fold",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "jump") c.policy.at_fold = FoldPolicy::Jump;
                   else if (v == "stop") c.policy.at_fold = FoldPolicy::Stop;
                   else throw std::invalid_argument("expected jump or stop");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.policy.at_fold == FoldPolicy::Jump ? "jump" : "stop");
                 }});
    k.push_back({"continue.refine",
                 [](RunConfig& c, std::string_view v) { c.policy.refine_transitions = parse_bool(v); },
                 [](const RunConfig& c) {
                   return std::string(c.policy.refine_transitions ? "true" : "false");
                 }});
    k.push_back(real_key("defects.arc_radius", [](auto& c) -> auto& { return c.arc_radius; }));
    k.push_back({"sweep.command", [](RunConfig& c, std::string_view v) { c.sweep_command = v; },
                 [](const RunConfig& c) { return c.sweep_command; }});
    k.push_back({"sweep.key", [](RunConfig& c, std::string_view v) { c.sweep_key = v; },
                 [](const RunConfig& c) { return c.sweep_key; }});
    k.push_back({"sweep.values",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_values.clear();
                   for (auto part : split(v, ',')) {
                     if (!part.empty()) c.sweep_values.emplace_back(part);
                   }
                 },
                 [](const RunConfig& c) { return join(c.sweep_values); }});
    k.push_back({"sweep.jobs",
                 [](RunConfig& c, std::string_view v) { c.sweep_jobs = parse_number<int>(v); },
                 [](const RunConfig& c) { return std::to_string(c.sweep_jobs); }});
    k.push_back({"out", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                 [](const RunConfig& c) { return c.out_dir.string(); }});
    return k;
  }();
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_field_csv(std::ostream& out, const QField& field) {
  const Grid& g = field.grid;
  out << "x,y,q11,q12,s2\n";
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto n = g.index(i, j);
      const double a = field.q11[n], b = field.q12[n];
      out << fmt17(g.x(i)) << ',' << fmt17(g.y(j)) << ',' << fmt17(a) << ',' << fmt17(b) << ','
          << fmt17(a * a + b * b) << '\n';
    }
  }
}

void write_field_csv(const std::filesystem::path& path, const QField& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_field_csv(out, field);
}

QField read_field_csv(std::istream& in, const std::string& source) {
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line) || trim(line) != "x,y,q11,q12,s2") {
    throw FormatError(source + ":1: expected header x,y,q11,q12,s2");
  }
  std::vector<double> xs, ys, a11, a12;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 5) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected 5 columns");
    }
    try {
      xs.push_back(parse_number<double>(cols[0]));
      ys.push_back(parse_number<double>(cols[1]));
      a11.push_back(parse_number<double>(cols[2]));
      a12.push_back(parse_number<double>(cols[3]));
    } catch (const std::invalid_argument& e) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::size_t nx = 0;
  while (nx < ys.size() && ys[nx] == ys[0]) ++nx;
  if (nx < 3 || xs.size() % nx != 0 || xs.size() / nx < 3) {
    throw FormatError(source + ": rows do not form a grid of at least 3x3 nodes");
  }
  const auto ny = xs.size() / nx;
  const Grid g({xs[nx - 1], ys.back()}, static_cast<int>(nx), static_cast<int>(ny));
  QField field(g);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const int i = static_cast<int>(n % nx), j = static_cast<int>(n / nx);
    if (std::abs(xs[n] - g.x(i)) > 1e-9 || std::abs(ys[n] - g.y(j)) > 1e-9) {
      throw FormatError(source + ":" + std::to_string(n + 2) + ": node out of grid order");
    }
    field.q11[n] = a11[n];
    field.q12[n] = a12[n];
  }
  return field;
}

QField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_field_csv(in, path.string());
}

void write_branch_csv(std::ostream& out, const Branch& branch) {
  out << "eps,energy,lambda_min,class,m11,m12,int_q12_sq\n";
  for (const auto& p : branch.points) {
    out << fmt17(p.epsilon) << ',' << fmt17(p.energy) << ',' << fmt17(p.lambda_min) << ','
        << p.tag() << ',' << fmt17(p.m11) << ',' << fmt17(p.m12) << ',' << fmt17(p.int_q12_sq)
        << '\n';
  }
}

void write_branch_csv(const std::filesystem::path& path, const Branch& branch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_branch_csv(out, branch);
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& where) {
  const std::string prefix = where.empty() ? "" : where + ": ";
  const auto& table = keys();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
  if (it == table.end()) throw ConfigError(prefix + "unknown key '" + key + "'");
  try {
    it->set(*this, trim(value));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix + key + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw ConfigError(prefix + key + ": value out of range");
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(domain.a > 0.0 && domain.b > 0.0)) fail("domain.a and domain.b must be positive");
  if (!(h > 0.0)) fail("grid.h must be positive");
  try {
    bc.validate(domain);
    (void)grid();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!(epsilon > 0.0)) fail("eps must be positive");
  if (!(eps_range.lo > 0.0 && eps_range.lo < eps_range.hi)) fail("eps.range must satisfy 0 < lo < hi");
  if (!(perturb >= 0.0)) fail("perturb must be non-negative");
  if (n_roots < 1) fail("analytic.roots must be positive");
  if (newton_max_iter < 1) fail("newton.max_iter must be positive");
  if (flow.snap_every < 1) fail("relax.snap_every must be positive");
  if (sweep_jobs < 1) fail("sweep.jobs must be positive");
}

void load_config(std::istream& in, RunConfig& config, const std::string& source) {
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno);
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    config.set(std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1))), where);
  }
}

void load_config(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  load_config(in, config, path.string());
}

void save_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [k, v] : config.entries()) out << k << " = " << v << '\n';
}

}  // namespace ldg
