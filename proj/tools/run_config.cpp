#include "run_config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace choquard::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '[' || ch == ']') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError(where + ": expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s, const std::string& where) {
  long long v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& where) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(where + ": expected true or false, got '" + s + "'");
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"problem", {"N", "alpha", "gamma", "mu", "q", "c"}},
      {"grid", {"M", "L"}},
      {"solver",
       {"max_iters", "step_init", "backtrack_factor", "armijo_c", "grad_tol", "rearrange_every", "seed", "metric",
        "sobolev_shift", "max_backtracks", "singular_rule", "auto_enlarge", "max_enlargements", "boundary_tol"}},
      {"potential",
       {"kind", "h_max", "h_inf", "epsilon", "maxima", "widths", "table_x", "table_h", "rho_tilde", "r_tilde",
        "levels"}},
      {"sweep", {"mu", "c", "solve_every", "threads"}},
      {"verify", {"trials", "seed", "descent_iters"}},
      {"output", {"dir", "format"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {
    for (const auto& [section, keys] : raw) {
      const auto it = schema().find(section);
      if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
      for (const auto& [key, value] : keys)
        if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = raw_.find(section);
    return s != raw_.end() && s->second.count(key);
  }
  bool has_section(const std::string& section) const { return raw_.count(section) > 0; }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return trim(raw_.at(section).at(key));
  }
  void number(const std::string& section, const std::string& key, double& out) const {
    if (auto t = text(section, key)) out = to_double(*t, where(section, key));
  }
  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    if (auto t = text(section, key)) {
      const long long v = to_integer(*t, where(section, key));
      if (v < 0 && std::is_unsigned_v<Int>) throw ConfigError(where(section, key) + ": must be >= 0");
      out = static_cast<Int>(v);
    }
  }
  void flag(const std::string& section, const std::string& key, bool& out) const {
    if (auto t = text(section, key)) out = to_bool(*t, where(section, key));
  }
  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (auto t = text(section, key))
      for (const auto& item : split_list(*t)) out.push_back(to_double(item, where(section, key)));
    return out;
  }

  static std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
  }

 private:
  const RawConfig& raw_;
};

PotentialSpec read_potential(const Reader& r, int dim) {
  const std::string kind = r.text("potential", "kind").value_or("gaussian");
  double h_max = 1.0;
  double h_inf = 0.5;
  double eps = 0.1;
  r.number("potential", "h_max", h_max);
  r.number("potential", "h_inf", h_inf);
  r.number("potential", "epsilon", eps);
  const std::vector<double> flat = r.has("potential", "maxima") ? r.numbers("potential", "maxima")
                                                                : std::vector<double>(static_cast<std::size_t>(dim), 0.0);
  if (flat.empty() || flat.size() % static_cast<std::size_t>(dim) != 0)
    throw ConfigError("[potential] maxima: need N coordinates per maximum");
  std::vector<Point> maxima;
  for (std::size_t i = 0; i < flat.size(); i += static_cast<std::size_t>(dim)) {
    Point a{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) a[static_cast<std::size_t>(k)] = flat[i + static_cast<std::size_t>(k)];
    maxima.push_back(a);
  }
  try {
    if (kind == "gaussian") {
      if (r.has("potential", "table_x") || r.has("potential", "table_h"))
        throw ConfigError("[potential] table_x/table_h need kind = table");
      std::vector<double> widths = r.has("potential", "widths") ? r.numbers("potential", "widths") : std::vector<double>{1.0};
      return PotentialSpec::gaussian(dim, h_max, h_inf, maxima, widths, eps);
    }
    if (kind == "table") {
      if (dim != 1) throw ConfigError("[potential] kind = table needs N = 1");
      if (r.has("potential", "widths") || r.has("potential", "h_max"))
        throw ConfigError("[potential] widths/h_max do not apply to kind = table");
      std::vector<double> xs;
      for (const auto& a : maxima) xs.push_back(a[0]);
      return PotentialSpec::tabulated(r.numbers("potential", "table_x"), r.numbers("potential", "table_h"), h_inf, xs,
                                      eps);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("[potential] kind: expected gaussian or table, got '" + kind + "'");
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::solve: return "solve";
    case Subcommand::sweep: return "sweep";
    case Subcommand::verify_critical: return "verify-critical";
    case Subcommand::multibump: return "multibump";
    case Subcommand::constants: return "constants";
  }
  return "unknown";
}

Subcommand parse_subcommand(const std::string& name) {
  for (auto s : {Subcommand::solve, Subcommand::sweep, Subcommand::verify_critical, Subcommand::multibump,
                 Subcommand::constants})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown subcommand '" + name + "'");
}

RawConfig read_raw(std::istream& is) {
  RawConfig raw;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(is);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() != 1)
      throw ConfigError("config key '" + item.fullname() + "' must sit in exactly one [section]");
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? ", " : "") + item.inputs[i];
    raw[item.parents[0]][item.name] = value;
  }
  return raw;
}

RawConfig read_raw_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  return read_raw(is);
}

void apply_assignment(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  raw[trim(assignment.substr(0, dot))][trim(assignment.substr(dot + 1, eq - dot - 1))] = trim(assignment.substr(eq + 1));
}

RunConfig resolve(Subcommand sub, const RawConfig& raw) {
  const Reader r(raw);
  RunConfig cfg;
  cfg.subcommand = sub;

  Problem& p = cfg.problem;
  r.integer("problem", "N", p.dim);
  r.number("problem", "alpha", p.alpha);
  r.number("problem", "gamma", p.gamma);
  r.number("problem", "mu", p.mu);
  r.number("problem", "q", p.q);
  r.number("problem", "c", p.c);
  // Snap a typed-out 2+4/N onto the double the library compares with.
  if (std::abs(p.q - p.critical_q()) <= 1e-12 * p.critical_q()) p.q = p.critical_q();

  r.integer("grid", "M", cfg.points_per_axis);
  r.number("grid", "L", cfg.half_width);

  SolverConfig& s = cfg.solver;
  r.integer("solver", "max_iters", s.max_iters);
  r.number("solver", "step_init", s.step_init);
  r.number("solver", "backtrack_factor", s.backtrack_factor);
  r.number("solver", "armijo_c", s.armijo_c);
  r.number("solver", "grad_tol", s.grad_tol);
  r.integer("solver", "rearrange_every", s.rearrange_every);
  r.integer("solver", "seed", s.seed);
  r.number("solver", "sobolev_shift", s.sobolev_shift);
  r.integer("solver", "max_backtracks", s.max_backtracks);
  r.flag("solver", "auto_enlarge", s.auto_enlarge);
  r.integer("solver", "max_enlargements", s.max_enlargements);
  r.number("solver", "boundary_tol", s.boundary_tol);
  if (auto m = r.text("solver", "metric")) {
    if (*m == "sobolev") s.metric = DescentMetric::sobolev;
    else if (*m == "l2") s.metric = DescentMetric::l2;
    else throw ConfigError("[solver] metric: expected sobolev or l2, got '" + *m + "'");
  }
  if (auto m = r.text("solver", "singular_rule")) {
    if (*m == "lattice_zeta") s.singular_rule = SingularRule::lattice_zeta;
    else if (*m == "cell_average") s.singular_rule = SingularRule::cell_average;
    else throw ConfigError("[solver] singular_rule: expected lattice_zeta or cell_average, got '" + *m + "'");
  }

  cfg.sweep.mu = r.numbers("sweep", "mu");
  cfg.sweep.c = r.numbers("sweep", "c");
  r.integer("sweep", "solve_every", cfg.sweep.solve_every);
  r.integer("sweep", "threads", cfg.sweep.threads);

  r.integer("verify", "trials", cfg.verify.trials);
  r.integer("verify", "seed", cfg.verify.seed);
  r.integer("verify", "descent_iters", cfg.verify.descent_iters);

  if (auto d = r.text("output", "dir")) cfg.output_dir = *d;
  if (auto f = r.text("output", "format")) {
    if (*f == "csv") cfg.format = OutputFormat::csv;
    else if (*f == "json") cfg.format = OutputFormat::json;
    else if (*f == "both") cfg.format = OutputFormat::both;
    else throw ConfigError("[output] format: expected csv, json or both, got '" + *f + "'");
  }

  if (r.has_section("potential")) {
    cfg.potential = read_potential(r, p.dim);
    r.flag("potential", "levels", cfg.levels);
    if (r.has("potential", "rho_tilde") || r.has("potential", "r_tilde")) {
      BasinSpec b = BasinSpec::defaults(*cfg.potential);
      r.number("potential", "rho_tilde", b.rho_tilde);
      r.number("potential", "r_tilde", b.r_tilde);
      cfg.basins = b;
    }
  }

  // Subcommand-specific checks, all before any computation.
  try {
    if (sub != Subcommand::constants) p.validate();
    if (p.dim < 1 || p.dim > 3) throw ConfigError("[problem] N must be 1, 2 or 3");
    (void)cfg.grid();
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  switch (sub) {
    case Subcommand::solve:
      if (!(p.q < p.critical_q())) throw ConfigError("solve requires q < 2+4/N");
      break;
    case Subcommand::sweep:
      if (cfg.sweep.mu.empty() || cfg.sweep.c.empty()) throw ConfigError("sweep requires [sweep] mu and c lists");
      if (cfg.sweep.solve_every < 0) throw ConfigError("[sweep] solve_every must be >= 0");
      for (double v : cfg.sweep.mu)
        if (!(v >= 0.0)) throw ConfigError("[sweep] mu values must be >= 0");
      for (double v : cfg.sweep.c)
        if (!(v > 0.0)) throw ConfigError("[sweep] c values must be > 0");
      break;
    case Subcommand::verify_critical:
      if (!p.is_critical()) throw ConfigError("verify-critical requires q = 2+4/N");
      if (cfg.verify.trials <= 0) throw ConfigError("[verify] trials must be > 0");
      break;
    case Subcommand::multibump:
      if (!cfg.potential) throw ConfigError("multibump requires a [potential] section");
      if (!(p.q < p.critical_q())) throw ConfigError("multibump requires q < 2+4/N");
      try {
        cfg.potential->validate_on(cfg.grid());
        (cfg.basins ? *cfg.basins : BasinSpec::defaults(*cfg.potential)).validate(*cfg.potential);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      break;
    case Subcommand::constants:
      if (!(p.q > 2.0)) throw ConfigError("constants requires q > 2");
      if (p.dim >= 3 && !(p.q < 2.0 * p.dim / (p.dim - 2.0))) throw ConfigError("constants requires q < 2N/(N-2)");
      if (!(p.alpha > 0.0 && p.alpha < p.dim)) throw ConfigError("constants requires 0 < alpha < N");
      break;
  }
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["subcommand"] = to_string(subcommand);
  j["problem"] = {{"N", problem.dim},  {"alpha", problem.alpha}, {"gamma", problem.gamma},
                  {"mu", problem.mu},  {"q", problem.q},         {"c", problem.c}};
  j["grid"] = {{"M", points_per_axis}, {"L", half_width}};
  j["solver"] = {{"max_iters", solver.max_iters},
                 {"step_init", solver.step_init},
                 {"backtrack_factor", solver.backtrack_factor},
                 {"armijo_c", solver.armijo_c},
                 {"grad_tol", solver.grad_tol},
                 {"rearrange_every", solver.rearrange_every},
                 {"seed", solver.seed},
                 {"metric", solver.metric == DescentMetric::sobolev ? "sobolev" : "l2"},
                 {"sobolev_shift", solver.sobolev_shift},
                 {"max_backtracks", solver.max_backtracks},
                 {"singular_rule", solver.singular_rule == SingularRule::lattice_zeta ? "lattice_zeta" : "cell_average"},
                 {"auto_enlarge", solver.auto_enlarge},
                 {"max_enlargements", solver.max_enlargements},
                 {"boundary_tol", solver.boundary_tol}};
  if (potential) {
    nlohmann::json pot = {{"kind", potential->kind == PotentialSpec::Kind::table ? "table" : "gaussian"},
                          {"h_max", potential->h_max},
                          {"h_inf", potential->h_inf},
                          {"epsilon", potential->epsilon},
                          {"levels", levels}};
    nlohmann::json maxima = nlohmann::json::array();
    for (const auto& a : potential->maxima) {
      nlohmann::json pt = nlohmann::json::array();
      for (int k = 0; k < problem.dim; ++k) pt.push_back(a[static_cast<std::size_t>(k)]);
      maxima.push_back(pt);
    }
    pot["maxima"] = maxima;
    if (potential->kind == PotentialSpec::Kind::gaussian_bumps) pot["widths"] = potential->widths;
    else {
      pot["table_x"] = potential->table_x;
      pot["table_h"] = potential->table_h;
    }
    const BasinSpec b = basins ? *basins : BasinSpec::defaults(*potential);
    pot["rho_tilde"] = b.rho_tilde;
    pot["r_tilde"] = b.r_tilde;
    j["potential"] = pot;
  }
  if (subcommand == Subcommand::sweep)
    j["sweep"] = {{"mu", sweep.mu}, {"c", sweep.c}, {"solve_every", sweep.solve_every}};
  if (subcommand == Subcommand::verify_critical)
    j["verify"] = {{"trials", verify.trials}, {"seed", verify.seed}, {"descent_iters", verify.descent_iters}};
  return j;
}

}  // namespace choquard::cli
