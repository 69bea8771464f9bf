#include "hlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "hlab/geometry.hpp"
#include "hlab/presets.hpp"
#include "hlab/ps_lab.hpp"
#include "hlab/suites.hpp"

namespace hlab {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ParseError, (path.empty() ? std::string("/") : path) + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "/" + key, "missing field");
  return *it;
}

double to_number(const json& v, const std::string& path) {
  if (!v.is_number()) parse_fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) parse_fail(path, "number is not finite");
  return x;
}

long long to_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) parse_fail(path, "expected an integer");
  return v.get<long long>();
}

std::vector<double> to_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], path + "/" + std::to_string(i)));
  return out;
}

Vec to_vec(const json& v, const std::string& path) {
  const std::vector<double> xs = to_numbers(v, path);
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

// {"dim": n, "data": [n*n row-major]} or {"rows", "cols", "data"}
Mat to_matrix(const json& v, const std::string& path) {
  long long rows, cols;
  if (v.is_object() && v.contains("dim")) {
    rows = cols = to_integer(v["dim"], path + "/dim");
  } else {
    rows = to_integer(require(v, "rows", path), path + "/rows");
    cols = to_integer(require(v, "cols", path), path + "/cols");
  }
  if (rows < 1 || cols < 1) parse_fail(path, "matrix dimensions must be positive");
  const std::vector<double> data = to_numbers(require(v, "data", path), path + "/data");
  if (static_cast<long long>(data.size()) != rows * cols)
    parse_fail(path + "/data", "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(data.size()));
  Mat m(rows, cols);
  for (long long i = 0; i < rows; ++i)
    for (long long j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  return m;
}

std::string to_string_field(const json& v, const std::string& path) {
  if (!v.is_string()) parse_fail(path, "expected a string");
  return v.get<std::string>();
}

ConvexDomain parse_domain(const json& d, const std::string& path) {
  if (!d.is_object()) parse_fail(path, "expected an object");
  if (d.contains("preset")) {
    const std::string name = to_string_field(d["preset"], path + "/preset");
    try {
      return domain_preset(name);
    } catch (const Error& e) {
      parse_fail(path + "/preset", e.what());
    }
  }
  const std::string kind = to_string_field(require(d, "kind", path), path + "/kind");
  try {
    if (kind == "ellipsoid")
      return ConvexDomain::ellipsoid(to_vec(require(d, "center", path), path + "/center"),
                                     to_matrix(require(d, "shape", path), path + "/shape"));
    if (kind == "unit_ball") return ConvexDomain::unit_ball(static_cast<int>(to_integer(require(d, "dim", path), path + "/dim")));
    if (kind == "pnorm_ball") {
      const double scale = d.contains("scale") ? to_number(d["scale"], path + "/scale") : 1.0;
      return ConvexDomain::pnorm_ball(static_cast<int>(to_integer(require(d, "dim", path), path + "/dim")),
                                      to_number(require(d, "p", path), path + "/p"), scale);
    }
    if (kind == "polytope")
      return ConvexDomain::polytope(to_matrix(require(d, "a", path), path + "/a"), to_vec(require(d, "b", path), path + "/b"));
    if (kind == "simplex") return ConvexDomain::standard_simplex(static_cast<int>(to_integer(require(d, "dim", path), path + "/dim")));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    parse_fail(path, e.what());
  }
  parse_fail(path + "/kind", "unknown domain kind '" + kind + "'");
}

void apply_overrides(GroupScenario& s, const json& block, const std::string& path) {
  if (block.contains("max_radius")) s.max_radius = to_number(block["max_radius"], path + "/max_radius");
  if (block.contains("prune_margin")) s.prune_margin = to_number(block["prune_margin"], path + "/prune_margin");
  if (block.contains("max_word_length"))
    s.max_word_length = static_cast<int>(to_integer(block["max_word_length"], path + "/max_word_length"));
}

// Parameter kinds checked when the configuration is read.
enum class Kind { Number, Integer, Numbers, Strings, Object };

struct ExperimentDef {
  std::string name;
  std::vector<std::pair<std::string, Kind>> params;
};

const std::vector<std::pair<std::string, Kind>> kDeltaParams{{"delta", Kind::Number}, {"delta_radius", Kind::Number}};

std::vector<std::pair<std::string, Kind>> with_delta(std::vector<std::pair<std::string, Kind>> p) {
  p.insert(p.end(), kDeltaParams.begin(), kDeltaParams.end());
  return p;
}

const std::vector<ExperimentDef>& experiment_table() {
  static const std::vector<ExperimentDef> table{
      {"distance", {{"samples", Kind::Integer}, {"pairs", Kind::Object}}},
      {"metric-axioms", {{"domains", Kind::Strings}, {"samples", Kind::Integer}}},
      {"klein-model", {{"samples", Kind::Integer}}},
      {"crampon", {{"domains", Kind::Strings}, {"pairs", Kind::Integer}, {"T", Kind::Number}}},
      {"busemann", {{"domains", Kind::Strings}, {"configurations", Kind::Integer}}},
      {"orbit-ball", {{"radius", Kind::Number}, {"word_length", Kind::Integer}}},
      {"critical-exponent", {{"radius", Kind::Number}, {"expected", Kind::Number}, {"tolerance", Kind::Number}}},
      {"ps-measure",
       with_delta({{"radius", Kind::Number},
                   {"s_factor", Kind::Number},
                   {"x_prime", Kind::Numbers},
                   {"generator", Kind::Integer},
                   {"far", Kind::Integer},
                   {"tolerance", Kind::Number},
                   {"far_tolerance", Kind::Number}})},
      {"shadow-audit",
       with_delta({{"radius", Kind::Number},
                   {"r", Kind::Number},
                   {"r_wide", Kind::Number},
                   {"band", Kind::Numbers},
                   {"bound", Kind::Number},
                   {"s_factor", Kind::Number}})},
      {"closed-geodesics", with_delta({{"max_word_length", Kind::Integer}, {"grid", Kind::Integer}})},
      {"orbit-count",
       with_delta({{"radii", Kind::Numbers}, {"x", Kind::Numbers}, {"y", Kind::Numbers}, {"tolerance", Kind::Number}})},
      {"equidistribution",
       with_delta({{"radii", Kind::Numbers},
                   {"x", Kind::Numbers},
                   {"y", Kind::Numbers},
                   {"r", Kind::Number},
                   {"caps", Kind::Object},
                   {"tolerance", Kind::Number}})},
  };
  return table;
}

void check_kind(const json& v, Kind k, const std::string& path) {
  switch (k) {
    case Kind::Number: to_number(v, path); break;
    case Kind::Integer: to_integer(v, path); break;
    case Kind::Numbers: to_numbers(v, path); break;
    case Kind::Strings:
      if (!v.is_array()) parse_fail(path, "expected an array of strings");
      for (std::size_t i = 0; i < v.size(); ++i) to_string_field(v[i], path + "/" + std::to_string(i));
      break;
    case Kind::Object:
      if (!v.is_object() && !v.is_array()) parse_fail(path, "expected an object or array");
      break;
  }
}

ExperimentSpec parse_experiment(const json& e, const std::string& path) {
  ExperimentSpec spec;
  spec.path = path;
  spec.name = to_string_field(require(e, "name", path), path + "/name");
  const ExperimentDef* def = nullptr;
  for (const auto& d : experiment_table())
    if (d.name == spec.name) def = &d;
  if (!def) parse_fail(path + "/name", "unknown experiment '" + spec.name + "'");
  spec.params = json::object();
  for (auto it = e.begin(); it != e.end(); ++it) {
    if (it.key() == "name") continue;
    const auto found = std::find_if(def->params.begin(), def->params.end(), [&](const auto& p) { return p.first == it.key(); });
    if (found == def->params.end()) parse_fail(path + "/" + it.key(), "unknown parameter for '" + spec.name + "'");
    check_kind(it.value(), found->second, path + "/" + it.key());
    spec.params[it.key()] = it.value();
  }
  return spec;
}

// line and column of a byte offset
std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// ----------------------------------------------------------------- CSV

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row_strings(header); }

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> r{cell(cells)...};
    row_strings(r);
  }
  void row_strings(const std::vector<std::string>& r) {
    if (r.size() != width_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(r[i]);
    }
    out_ << "\r\n";
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  std::size_t width_;
  std::ostringstream out_;
};

std::string word_string(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(w[i]);
  }
  return s;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// ------------------------------------------------------------- context

struct Context {
  GroupScenario scenario;
  Exec exec;
  std::uint64_t seed = 1;
  std::map<double, CriticalExponentEstimate> deltas;
};

class Params {
 public:
  explicit Params(const ExperimentSpec& s) : spec_(s) {}
  bool has(const std::string& k) const { return spec_.params.contains(k); }
  const json& raw(const std::string& k) const { return spec_.params.at(k); }
  std::string path(const std::string& k) const { return spec_.path + "/" + k; }
  double number(const std::string& k, double def) const { return has(k) ? to_number(raw(k), path(k)) : def; }
  int integer(const std::string& k, int def) const { return has(k) ? static_cast<int>(to_integer(raw(k), path(k))) : def; }
  std::vector<double> numbers(const std::string& k, std::vector<double> def) const {
    return has(k) ? to_numbers(raw(k), path(k)) : def;
  }
  Vec point(const std::string& k, const Vec& def, int dim) const {
    if (!has(k)) return def;
    const Vec v = to_vec(raw(k), path(k));
    if (v.size() != dim) parse_fail(path(k), "expected " + std::to_string(dim) + " coordinates");
    return v;
  }
  std::vector<std::string> strings(const std::string& k, std::vector<std::string> def) const {
    if (!has(k)) return def;
    std::vector<std::string> out;
    for (const auto& s : raw(k)) out.push_back(s.get<std::string>());
    return out;
  }

 private:
  const ExperimentSpec& spec_;
};

struct Result {
  std::string verdict = "pass";
  std::string csv;
  json summary = json::object();
  std::size_t elements = 0;
};

double delta_for(Context& ctx, const Params& p, Result& res) {
  if (p.has("delta")) {
    res.summary["delta_hat"] = p.number("delta", 0.0);
    res.summary["delta_source"] = "config";
    return p.number("delta", 0.0);
  }
  const double radius = p.number("delta_radius", ctx.scenario.max_radius);
  auto it = ctx.deltas.find(radius);
  if (it == ctx.deltas.end()) it = ctx.deltas.emplace(radius, critical_exponent(ctx.scenario, radius, ctx.exec)).first;
  res.summary["delta_hat"] = it->second.delta_hat;
  res.summary["delta_source"] = "critical-exponent at radius " + format_double(radius);
  return it->second.delta_hat;
}

Result suite_result(const std::vector<SuiteReport>& reports) {
  Result res;
  Csv csv({"suite", "domain", "check", "value", "threshold", "pass"});
  json checks = json::array();
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      csv.row(r.suite, c.domain, c.name, c.value, c.threshold, c.pass);
      checks.push_back({{"suite", r.suite}, {"domain", c.domain}, {"check", c.name}, {"value", c.value}, {"pass", c.pass}});
    }
    if (!r.pass()) res.verdict = "fail";
  }
  res.csv = csv.str();
  res.summary["checks"] = checks;
  return res;
}

const std::vector<std::string> kDefaultDomains{"disk", "ellipse", "p4-ball", "simplex"};
const std::vector<std::string> kSmoothDomains{"disk", "ellipse", "p4-ball"};

Vec chart_of(const Vec& h) { return h.head(h.size() - 1) / h(h.size() - 1); }

// ----------------------------------------------------------- runners

Result run_distance(Context& ctx, const Params& p) {
  const ConvexDomain& d = ctx.scenario.domain;
  const int n = d.dimension();
  std::vector<std::pair<Vec, Vec>> pairs;
  if (p.has("pairs")) {
    const json& arr = p.raw("pairs");
    if (!arr.is_array()) parse_fail(p.path("pairs"), "expected an array of [x, y] pairs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = p.path("pairs") + "/" + std::to_string(i);
      if (!arr[i].is_array() || arr[i].size() != 2) parse_fail(at, "expected [x, y]");
      Vec x = to_vec(arr[i][0], at + "/0"), y = to_vec(arr[i][1], at + "/1");
      if (x.size() != n || y.size() != n) parse_fail(at, "points need " + std::to_string(n) + " coordinates");
      pairs.emplace_back(std::move(x), std::move(y));
    }
  } else {
    std::mt19937_64 rng(ctx.seed);
    const int samples = p.integer("samples", 100);
    for (int i = 0; i < samples; ++i) {
      Vec x = d.sample_interior(rng);
      pairs.emplace_back(std::move(x), d.sample_interior(rng));
    }
  }
  std::vector<std::string> header;
  for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
  for (int i = 0; i < n; ++i) header.push_back("y" + std::to_string(i));
  header.push_back("distance");
  Csv csv(header);
  Result res;
  double asym = 0.0;
  for (const auto& [x, y] : pairs) {
    const double dxy = hilbert_distance(d, x, y);
    asym = std::max(asym, std::abs(dxy - hilbert_distance(d, y, x)));
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) row.push_back(format_double(x(i)));
    for (int i = 0; i < n; ++i) row.push_back(format_double(y(i)));
    row.push_back(format_double(dxy));
    csv.row_strings(row);
  }
  res.csv = csv.str();
  res.summary["pairs"] = pairs.size();
  res.summary["max_symmetry_defect"] = asym;
  if (asym > 1e-12) res.verdict = "fail";
  return res;
}

Result run_orbit_ball(Context& ctx, const Params& p) {
  const GroupScenario& s = ctx.scenario;
  const OrbitBall b = p.has("word_length") ? orbit_ball_words(s, p.integer("word_length", 1), ctx.exec)
                                           : orbit_ball(s, p.number("radius", std::min(10.0, s.max_radius)), ctx.exec);
  Csv csv({"index", "word", "distance", "log_kappa"});
  for (std::size_t i = 0; i < b.size(); ++i)
    csv.row(i, word_string(b.elements[i].g.word()), b.elements[i].distance, b.elements[i].g.log_kappa());
  Result res;
  res.csv = csv.str();
  res.elements = b.size();
  res.summary["size"] = b.size();
  res.summary["radius"] = b.radius;
  res.summary["generated"] = b.generated;
  res.summary["duplicates"] = b.duplicates;
  res.summary["key_collisions"] = b.key_collisions;
  return res;
}

Result run_critical_exponent(Context& ctx, const Params& p) {
  const double radius = p.number("radius", ctx.scenario.max_radius);
  auto it = ctx.deltas.find(radius);
  if (it == ctx.deltas.end()) it = ctx.deltas.emplace(radius, critical_exponent(ctx.scenario, radius, ctx.exec)).first;
  const CriticalExponentEstimate& e = it->second;
  Csv csv({"radius", "count", "log_count"});
  for (std::size_t i = 0; i < e.radii_used.size(); ++i)
    csv.row(e.radii_used[i], e.counts_used[i], std::log(static_cast<double>(e.counts_used[i])));
  Result res;
  res.csv = csv.str();
  res.elements = e.ball_size;
  res.summary = {{"delta_hat", e.delta_hat},
                 {"fit_stderr", e.fit_stderr},
                 {"method", e.method},
                 {"bracket", {e.bracket.lo, e.bracket.hi}},
                 {"bracket_stderr", e.bracket.stderr_slope},
                 {"bracket_agrees", e.bracket_agrees},
                 {"ball_radius", e.ball_radius},
                 {"ball_size", e.ball_size}};
  bool ok = e.bracket_agrees;
  if (p.has("expected")) {
    const double tol = p.number("tolerance", 0.1);
    res.summary["expected"] = p.number("expected", 0.0);
    res.summary["tolerance"] = tol;
    ok = ok && std::abs(e.delta_hat - p.number("expected", 0.0)) <= tol;
  }
  res.verdict = ok ? "pass" : "fail";
  return res;
}

Vec default_offset_point(const GroupScenario& s) {
  Vec x = s.basepoint;
  // a fifth of the way to the boundary along the first axis
  const Vec e = Vec::Unit(s.domain.dimension(), 0);
  x += 0.2 * (s.domain.ray_boundary(s.basepoint, e) - s.basepoint);
  return x;
}

Result run_ps_measure(Context& ctx, const Params& p) {
  const GroupScenario& s = ctx.scenario;
  Result res;
  const double delta = delta_for(ctx, p, res);
  const double sf = p.number("s_factor", 1.02);
  const OrbitBall b = orbit_ball(s, p.number("radius", std::min(12.0, s.max_radius)), ctx.exec);
  const Vec xp = p.point("x_prime", default_offset_point(s), s.domain.dimension());
  const double sv = delta * sf;
  const AtomicMeasure mu = ps_density(s, b, s.basepoint, sv, delta, 2.0, ctx.exec);
  const AtomicMeasure mu2 = ps_density(s, b, xp, sv, delta, 2.0, ctx.exec);
  const ConformalityReport conf = conformality_check(s, b, mu, mu2, static_cast<std::size_t>(p.integer("far", 20)));
  const ProjectiveMap& g = s.letter(p.integer("generator", 1));
  const Vec gx = chart_of(g.apply(Vec(mu2.x.homogeneous())));
  const AtomicMeasure mug = ps_density(s, b, gx, sv, delta, 2.0, ctx.exec);
  const EquivarianceReport eq = equivariance_check(s, b, mu2, mug, g);
  // s_k = delta (1 + 0.1 2^-k): how the far-atom conformality and the
  // boundary-proxy mass share move as s approaches delta
  json schedule = json::array();
  for (int k = 1; k <= 5; ++k) {
    const double sk = delta * (1.0 + 0.1 * std::ldexp(1.0, -k));
    const AtomicMeasure a = ps_density(s, b, s.basepoint, sk, delta, 2.0, ctx.exec);
    const AtomicMeasure a2 = ps_density(s, b, xp, sk, delta, 2.0, ctx.exec);
    double outer = 0.0;
    for (const auto& atom : a.atoms)
      if (!atom.interior) outer += atom.weight;
    const ConformalityReport c = conformality_check(s, b, a, a2, static_cast<std::size_t>(p.integer("far", 20)));
    schedule.push_back({{"k", k}, {"s", sk}, {"far_error", c.far_error}, {"boundary_mass_fraction", outer / a.total_mass}});
  }
  res.summary["s_schedule"] = schedule;
  Csv csv({"element", "word", "distance", "weight_o", "weight_x_prime", "interior"});
  for (std::size_t i = 0; i < b.size(); ++i)
    csv.row(i, word_string(b.elements[i].g.word()), mu.atoms[i].distance, mu.atoms[i].weight, mu2.atoms[i].weight,
            mu.atoms[i].interior);
  res.csv = csv.str();
  res.elements = b.size();
  const double tol = p.number("tolerance", 1e-9), far_tol = p.number("far_tolerance", 0.05);
  res.summary["s"] = sv;
  res.summary["total_mass_o"] = mu.total_mass;
  res.summary["total_mass_x_prime"] = mu2.total_mass;
  res.summary["x_prime"] = vec_json(xp);
  res.summary["conformality_exact_error"] = conf.exact_error;
  res.summary["conformality_far_error"] = conf.far_error;
  res.summary["far_atoms"] = conf.far_atoms;
  res.summary["equivariance_matched"] = eq.matched;
  res.summary["equivariance_log_error"] = eq.max_log_error;
  const bool ok = std::abs(mu.total_mass - 1.0) <= 1e-12 && conf.exact_error <= tol && eq.max_log_error <= tol &&
                  conf.far_error <= far_tol && eq.matched > 0;
  res.verdict = ok ? "pass" : "fail";
  return res;
}

Result run_shadow_audit(Context& ctx, const Params& p) {
  const GroupScenario& s = ctx.scenario;
  Result res;
  const double delta = delta_for(ctx, p, res);
  const std::vector<double> band = p.numbers("band", {4.0, 10.0});
  if (band.size() != 2 || !(band[0] < band[1])) parse_fail(p.path("band"), "expected [lo, hi] with lo < hi");
  const double radius = p.number("radius", band[1] + 2.0);
  const OrbitBall b = orbit_ball(s, radius, ctx.exec);
  const AtomicMeasure mu = ps_density(s, b, s.basepoint, delta * p.number("s_factor", 1.02), delta, 2.0, ctx.exec);
  const ShadowLemmaReport rep = shadow_lemma_audit(s, b, mu, delta, p.number("r", 2.0), p.number("r_wide", 3.0), band[0],
                                                   band[1], p.number("bound", 1e3), ctx.exec);
  Csv csv({"element", "word", "distance", "mass_r", "normalized_r", "atoms_r", "mass_wide", "normalized_wide", "atoms_wide"});
  for (std::size_t i = 0; i < rep.base.rows.size(); ++i) {
    const ShadowRow& a = rep.base.rows[i];
    const ShadowRow& w = rep.wider.rows[i];
    csv.row(a.element, word_string(b.elements[a.element].g.word()), a.distance, a.mass, a.normalized, a.atoms, w.mass,
            w.normalized, w.atoms);
  }
  res.csv = csv.str();
  res.elements = b.size();
  const std::size_t violations = rep.base.sandwich_violations + rep.wider.sandwich_violations;
  res.summary["band"] = band;
  res.summary["shadows"] = rep.base.rows.size();
  res.summary["ratio_r"] = rep.base.ratio;
  res.summary["ratio_trimmed_band"] = rep.trimmed.ratio;
  res.summary["ratio_r_wide"] = rep.wider.ratio;
  res.summary["bound"] = rep.bound;
  res.summary["sandwich_checks"] = rep.base.sandwich_checks + rep.wider.sandwich_checks;
  res.summary["sandwich_violations"] = violations;
  res.summary["max_busemann_error"] = std::max(rep.base.max_busemann_error, rep.wider.max_busemann_error);
  res.verdict = rep.pass && violations == 0 ? "pass" : "fail";
  return res;
}

Result run_closed_geodesics(Context& ctx, const Params& p) {
  Result res;
  const double delta = delta_for(ctx, p, res);
  const GeodesicCountingResult g =
      geodesic_counting_experiment(ctx.scenario, p.integer("max_word_length", 10), delta, p.integer("grid", 40), ctx.exec);
  Csv csv({"length", "count", "normalized"});
  for (const auto& r : g.rows) csv.row(r.length, r.count, r.normalized);
  res.csv = csv.str();
  res.elements = g.classes;
  res.summary["classes"] = g.classes;
  res.summary["complete_length"] = g.complete_length;
  res.summary["bottom_quartile_mean"] = g.bottom_quartile_mean;
  res.summary["top_quartile_mean"] = g.top_quartile_mean;
  res.verdict = g.pass ? "pass" : "fail";
  return res;
}

Result run_orbit_count(Context& ctx, const Params& p) {
  const GroupScenario& s = ctx.scenario;
  Result res;
  const double delta = delta_for(ctx, p, res);
  const int n = s.domain.dimension();
  const Vec x = p.point("x", s.basepoint, n), y = p.point("y", s.basepoint, n);
  const double top = std::min(12.0, s.max_radius);
  const OrbitCountingResult oc = orbit_counting_experiment(
      s, x, y, p.numbers("radii", {top - 4, top - 3, top - 2, top - 1, top}), delta, p.number("tolerance", 0.25), ctx.exec);
  Csv csv({"t", "count", "normalized"});
  for (const auto& r : oc.rows) csv.row(r.t, r.count, r.normalized);
  res.csv = csv.str();
  res.elements = oc.rows.empty() ? 0 : oc.rows.back().count;
  res.summary["plateau"] = oc.plateau;
  res.summary["drift"] = oc.drift;
  res.summary["tolerance"] = oc.tolerance;
  res.verdict = oc.rows.size() < 3 ? "inconclusive" : (oc.pass ? "pass" : "fail");
  return res;
}

Cap parse_cap(const Context& ctx, const Params& p, const std::string& key, Word def, double r) {
  const GroupScenario& s = ctx.scenario;
  Cap cap;
  cap.r = r;
  if (p.has("caps") && p.raw("caps").contains(key)) {
    const json& c = p.raw("caps")[key];
    const std::string at = p.path("caps") + "/" + key;
    if (c.is_object() && c.contains("point")) {
      cap.anchor = to_vec(c["point"], at + "/point");
      if (cap.anchor.size() != s.domain.dimension()) parse_fail(at + "/point", "wrong dimension");
      if (c.contains("r")) cap.r = to_number(c["r"], at + "/r");
      return cap;
    }
    const json& w = c.is_object() ? require(c, "word", at) : c;
    def.clear();
    if (!w.is_array()) parse_fail(at, "expected a word (array of signed generator indices) or {\"point\": [...]}");
    for (std::size_t i = 0; i < w.size(); ++i) def.push_back(static_cast<int>(to_integer(w[i], at + "/" + std::to_string(i))));
    if (c.is_object() && c.contains("r")) cap.r = to_number(c["r"], at + "/r");
  }
  cap.anchor = chart_of(s.element(def).apply(s.basepoint_homogeneous()));
  return cap;
}

Result run_equidistribution(Context& ctx, const Params& p) {
  const GroupScenario& s = ctx.scenario;
  Result res;
  const double delta = delta_for(ctx, p, res);
  const int n = s.domain.dimension();
  const Vec x = p.point("x", s.basepoint, n), y = p.point("y", s.basepoint, n);
  const double r = p.number("r", 1.0);
  const int second = s.rank() >= 2 ? 2 : 1;
  const Cap a = parse_cap(ctx, p, "a", {1}, r), a2 = parse_cap(ctx, p, "a2", {second}, r);
  const Cap b = parse_cap(ctx, p, "b", {-1}, r), b2 = parse_cap(ctx, p, "b2", {-second}, r);
  const EquidistributionResult eq = equidistribution_experiment(
      s, x, y, a, a2, b, b2, p.numbers("radii", {8, 9, 10, 11, 12}), delta, p.number("tolerance", 0.3), ctx.exec);
  Csv csv({"t", "nu_ab", "nu_ab2", "nu_a2b", "nu_a2b2", "cross_ratio"});
  for (const auto& row : eq.rows) csv.row(row.t, row.nu_ab, row.nu_ab2, row.nu_a2b, row.nu_a2b2, row.cross_ratio);
  res.csv = csv.str();
  res.summary["measure_cross_ratio"] = eq.measure_cross_ratio;
  res.summary["empirical_cross_ratio"] = eq.rows.back().cross_ratio;
  res.summary["relative_gap"] = eq.relative_gap;
  res.summary["cap_masses"] = eq.cap_masses;
  res.summary["tolerance"] = eq.tolerance;
  res.verdict = eq.pass ? "pass" : "fail";
  return res;
}

Result run_one(Context& ctx, const ExperimentSpec& spec) {
  const Params p(spec);
  const std::string& n = spec.name;
  if (n == "distance") return run_distance(ctx, p);
  if (n == "metric-axioms")
    return suite_result({metric_axioms_suite(p.strings("domains", kDefaultDomains), p.integer("samples", 10000), ctx.seed)});
  if (n == "klein-model") return suite_result({klein_model_suite(p.integer("samples", 10000), ctx.seed)});
  if (n == "crampon")
    return suite_result({crampon_suite(p.strings("domains", kDefaultDomains), p.integer("pairs", 100), p.number("T", 5.0), ctx.seed)});
  if (n == "busemann")
    return suite_result({busemann_suite(p.strings("domains", kSmoothDomains), p.integer("configurations", 1000), ctx.seed)});
  if (n == "orbit-ball") return run_orbit_ball(ctx, p);
  if (n == "critical-exponent") return run_critical_exponent(ctx, p);
  if (n == "ps-measure") return run_ps_measure(ctx, p);
  if (n == "shadow-audit") return run_shadow_audit(ctx, p);
  if (n == "closed-geodesics") return run_closed_geodesics(ctx, p);
  if (n == "orbit-count") return run_orbit_count(ctx, p);
  if (n == "equidistribution") return run_equidistribution(ctx, p);
  throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + n + "'");
}

GroupScenario build_scenario(const json& block, const std::string& path);

}  // namespace

// -------------------------------------------------------------- parsing

GroupScenario parse_scenario(const json& block, const std::string& path) {
  if (!block.is_object()) parse_fail(path, "expected an object");
  GroupScenario s = build_scenario(block, path);
  apply_overrides(s, block, path);
  return s;
}

namespace {

GroupScenario build_scenario(const json& block, const std::string& path) {
  if (block.contains("preset")) {
    const std::string name = to_string_field(block["preset"], path + "/preset");
    try {
      return scenario_preset(name);
    } catch (const Error& e) {
      parse_fail(path + "/preset", e.what());
    }
  } else {
    const std::string name = block.contains("name") ? to_string_field(block["name"], path + "/name") : "custom";
    ConvexDomain dom = parse_domain(require(block, "domain", path), path + "/domain");
    const json& gens = require(block, "generators", path);
    if (!gens.is_array() || gens.empty()) parse_fail(path + "/generators", "expected a non-empty array of matrices");
    std::vector<Mat> mats;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const std::string at = path + "/generators/" + std::to_string(i);
      mats.push_back(to_matrix(gens[i], at));
      if (mats.back().rows() != dom.dimension() + 1 || mats.back().cols() != dom.dimension() + 1)
        parse_fail(at, "generator must be " + std::to_string(dom.dimension() + 1) + "x" + std::to_string(dom.dimension() + 1));
    }
    const Vec base = block.contains("basepoint") ? to_vec(block["basepoint"], path + "/basepoint") : dom.interior_point();
    if (base.size() != dom.dimension()) parse_fail(path + "/basepoint", "wrong dimension");
    bool free_group = false;
    if (block.contains("free_group")) {
      if (!block["free_group"].is_boolean()) parse_fail(path + "/free_group", "expected true or false");
      free_group = block["free_group"].get<bool>();
    }
    try {
      return make_scenario(name, dom, mats, base, free_group);
    } catch (const Error& e) {
      parse_fail(path, e.what());
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, position(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!root.is_object()) parse_fail("", "configuration must be an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    static const std::vector<std::string> known{"scenario", "experiments", "output", "seed", "threads", "budget"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) parse_fail("/" + it.key(), "unknown field");
  }
  ScenarioConfig cfg{parse_scenario(require(root, "scenario", ""), "/scenario"), json(), {}, "out", 1, 0, std::nullopt};
  cfg.scenario_echo = root["scenario"];
  const json& ex = require(root, "experiments", "");
  if (!ex.is_array()) parse_fail("/experiments", "expected an array");
  for (std::size_t i = 0; i < ex.size(); ++i) cfg.experiments.push_back(parse_experiment(ex[i], "/experiments/" + std::to_string(i)));
  if (root.contains("output")) cfg.out_dir = to_string_field(require(root["output"], "dir", "/output"), "/output/dir");
  if (root.contains("seed")) {
    const long long v = to_integer(root["seed"], "/seed");
    if (v < 0) parse_fail("/seed", "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  if (root.contains("threads")) cfg.threads = static_cast<int>(to_integer(root["threads"], "/threads"));
  if (root.contains("budget")) {
    const long long v = to_integer(root["budget"], "/budget");
    if (v < 1) parse_fail("/budget", "budget must be positive");
    cfg.budget = static_cast<std::size_t>(v);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& d : experiment_table()) v.push_back(d.name);
    return v;
  }();
  return names;
}

const std::vector<std::string>& property_suite_names() {
  static const std::vector<std::string> names{"klein-model", "metric-axioms", "crampon", "busemann"};
  return names;
}

// ---------------------------------------------------------------- running

bool ExperimentReport::any_fail() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const ExperimentOutcome& o) { return o.verdict == "fail"; });
}

json ExperimentReport::to_json() const {
  json ex = json::array();
  for (const auto& o : outcomes) {
    json e = {{"experiment", o.name}, {"verdict", o.verdict}, {"csv", o.csv},        {"key_numbers", o.summary},
              {"seconds", o.seconds},  {"elements", o.elements}};
    if (!o.error.empty()) e["error"] = o.error;
    ex.push_back(e);
  }
  return {{"scenario", scenario}, {"parameters", parameters}, {"experiments", ex}, {"pass", !any_fail()}};
}

int effective_threads(int flag, int config) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("HLAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return config > 0 ? config : 1;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentReport run_experiments(const ScenarioConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  Context ctx{cfg.scenario, Exec{}, 1, {}};
  ctx.seed = ov.seed.value_or(cfg.seed);
  ctx.exec.threads = effective_threads(ov.threads, cfg.threads);
  if (ov.budget)
    ctx.scenario.element_budget = *ov.budget;
  else if (cfg.budget)
    ctx.scenario.element_budget = *cfg.budget;
  const std::filesystem::path out = ov.out_dir.value_or(cfg.out_dir);
  std::filesystem::create_directories(out);

  ExperimentReport report;
  report.scenario = cfg.scenario_echo;
  report.parameters = {{"seed", ctx.seed}, {"threads", ctx.exec.threads}, {"budget", ctx.scenario.element_budget},
                       {"scenario_name", ctx.scenario.name}};
  std::map<std::string, int> used;
  for (const auto& spec : cfg.experiments) {
    ExperimentOutcome o;
    o.name = spec.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Result r = run_one(ctx, spec);
      const int k = ++used[spec.name];
      const std::string file = spec.name + (k > 1 ? "-" + std::to_string(k) : "") + ".csv";
      std::ofstream f(out / file, std::ios::binary);
      f << r.csv;
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + (out / file).string());
      o.csv = (out / file).string();
      o.verdict = r.verdict;
      o.summary = std::move(r.summary);
      o.elements = r.elements;
    } catch (const OrbitBudgetError& e) {
      o.verdict = "fail";
      o.error = std::string(e.what()) + " (exact below radius " + format_double(e.cutoff()) + ")";
    } catch (const Error& e) {
      o.verdict = e.kind() == ErrorKind::InsufficientData ? "inconclusive" : "fail";
      o.error = e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.error.empty()) log << "experiment '" << o.name << "' failed: " << o.error << "\n";
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", o.seconds);
    log << o.name << ": " << o.verdict << " (" << secs << " s)\n";
    report.outcomes.push_back(std::move(o));
  }
  std::ofstream summary(out / "summary.json", std::ios::binary);
  summary << report.to_json().dump(2) << "\n";
  return report;
}

}  // namespace hlab
