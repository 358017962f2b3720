#include "mrbf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "mrbf/errors.hpp"

namespace mrbf {

using nlohmann::json;

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

NodeCount parse_count(const json& c) {
  if (c.is_array()) {
    if (c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
      throw ConfigError("a node count array must be [boundary, interior]");
    return {c[0].get<int>(), c[1].get<int>()};
  }
  if (c.is_number_integer()) return {c.get<int>(), 0};
  allow_keys(c, {"boundary", "interior"}, "node count");
  return {get_or(c, "boundary", 0, "node count"), get_or(c, "interior", 0, "node count")};
}

GeometrySpec parse_geometry(const json& j) {
  const std::string where = "geometry";
  allow_keys(j, {"kind", "counts", "params", "jitter"}, where);
  GeometrySpec g;
  g.kind = get_or<std::string>(j, "kind", g.kind, where);
  g.jitter = get_or(j, "jitter", 0.0, where);
  if (g.jitter < 0.0 || g.jitter >= 0.5) throw ConfigError("geometry jitter must lie in [0, 0.5)");
  if (!j.contains("counts") || !j["counts"].is_array()) throw ConfigError("geometry needs a 'counts' array");
  for (const auto& c : j["counts"]) {
    NodeCount n = parse_count(c);
    if (n.boundary < 0 || n.interior < 0) throw ConfigError("node counts must be >= 0");
    g.counts.push_back(n);
  }
  const json p = j.value("params", json::object());
  const std::string pw = "geometry params";
  if (g.kind == "square_cutout") {
    allow_keys(p, {"half_side", "base_radius", "amplitude", "lobes", "neumann_top"}, pw);
    g.square.half_side = get_or(p, "half_side", g.square.half_side, pw);
    g.square.base_radius = get_or(p, "base_radius", g.square.base_radius, pw);
    g.square.amplitude = get_or(p, "amplitude", g.square.amplitude, pw);
    g.square.lobes = get_or(p, "lobes", g.square.lobes, pw);
    g.square.neumann_top = get_or(p, "neumann_top", g.square.neumann_top, pw);
  } else if (g.kind == "cube_two_ball_cavity") {
    allow_keys(p, {"half_side", "ball_radius", "center_offset", "neumann_face"}, pw);
    g.cube.half_side = get_or(p, "half_side", g.cube.half_side, pw);
    g.cube.ball_radius = get_or(p, "ball_radius", g.cube.ball_radius, pw);
    g.cube.center_offset = get_or(p, "center_offset", g.cube.center_offset, pw);
    g.cube.neumann_face = get_or(p, "neumann_face", g.cube.neumann_face, pw);
  } else if (g.kind == "circle" || g.kind == "sphere" || g.kind == "interval") {
    allow_keys(p, {"radius"}, pw);
    g.radius = get_or(p, "radius", g.radius, pw);
    if (!(g.radius > 0.0)) throw ConfigError("geometry radius must be > 0");
  } else {
    throw ConfigError("unknown geometry kind '" + g.kind + "'");
  }
  return g;
}

SchemeSpec parse_scheme(const json& j) {
  if (j.is_string()) return parse_scheme(json{{"name", j}});
  const std::string where = "scheme";
  allow_keys(j, {"name", "shape", "order", "truncation", "level_solver", "rank_tolerance", "exploit_structure",
                 "oversampling"},
             where);
  SchemeSpec s;
  s.name = get_or<std::string>(j, "name", "", where);
  static const std::set<std::string> known{"BKM", "BPM", "Kansa", "MKM", "LSRCM", "interpolation"};
  if (!known.count(s.name)) throw ConfigError("unknown scheme '" + s.name + "'");
  s.shape = get_or(j, "shape", s.shape, where);
  if (!(s.shape > 0.0)) throw ConfigError("scheme shape parameter must be > 0");
  s.order = get_or(j, "order", s.order, where);
  s.truncation = get_or(j, "truncation", s.truncation, where);
  const std::string ls = get_or<std::string>(j, "level_solver", "svd", where);
  if (ls == "svd") s.level_solver = LevelSolver::TruncatedSvd;
  else if (ls == "lu") s.level_solver = LevelSolver::LU;
  else throw ConfigError("level_solver must be 'svd' or 'lu'");
  s.rank_tolerance = get_or(j, "rank_tolerance", s.rank_tolerance, where);
  s.exploit_structure = get_or(j, "exploit_structure", s.exploit_structure, where);
  s.oversampling = get_or(j, "oversampling", s.oversampling, where);
  if (!(s.oversampling >= 1.0)) throw ConfigError("LSRCM oversampling must be >= 1");
  return s;
}

StudySpec parse_study(const json& j, const std::string& fallback_name) {
  const std::string where = "study";
  StudySpec s;
  s.name = get_or<std::string>(j, "name", fallback_name, where);
  const json& p = j.contains("problem") ? j["problem"] : throw ConfigError("study '" + s.name + "' has no problem");
  if (p.is_string()) {
    s.problem = p.get<std::string>();
  } else {
    allow_keys(p, {"tag", "gamma", "sigma", "powers"}, "problem");
    s.problem = get_or<std::string>(p, "tag", "", "problem");
    if (p.contains("gamma")) s.params.gamma = get_or(p, "gamma", 0.0, "problem");
    s.params.sigma = get_or(p, "sigma", s.params.sigma, "problem");
    s.params.powers = get_or(p, "powers", s.params.powers, "problem");
  }
  if (!j.contains("geometry")) throw ConfigError("study '" + s.name + "' has no geometry");
  s.geometry = parse_geometry(j["geometry"]);
  if (j.contains("schemes")) {
    if (!j["schemes"].is_array()) throw ConfigError("'schemes' must be an array");
    for (const auto& e : j["schemes"]) s.schemes.push_back(parse_scheme(e));
  }
  s.checkpoints = get_or(j, "checkpoints", s.checkpoints, where);
  if (s.checkpoints < 1) throw ConfigError("checkpoint count must be >= 1");
  s.checkpoint_offset = get_or(j, "checkpoint_offset", s.checkpoint_offset, where);
  return s;
}

std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const ConditioningError*>(&e)) return "ConditioningError";
  if (dynamic_cast<const SingularMatrixError*>(&e)) return "SingularMatrixError";
  if (dynamic_cast<const RankError*>(&e)) return "RankError";
  if (dynamic_cast<const CapabilityError*>(&e)) return "CapabilityError";
  if (dynamic_cast<const GeometryError*>(&e)) return "GeometryError";
  if (dynamic_cast<const ParameterError*>(&e)) return "ParameterError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "Exception";
}

// MQ interpolation of the exact solution through every node.
Solution interpolate_exact(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const ProfilePtr& rbf,
                           bool exploit) {
  if (!bvp.exact) throw ConfigError("interpolation needs an exact solution");
  const std::size_t n = cloud.size();
  const std::vector<Vec3> c = cloud.positions();
  Matrix a(n, n);
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rbf->evaluate(norm(c[i] - c[j]));
    b[i] = bvp.exact(c[i]);
  }
  const SystemFactorization f = factor_system(a, exploit);
  Solution s;
  s.coefficients = {f.solve(b)};
  s.condition_estimate = condition_estimate(f);
  s.factorizations = 1;
  s.structure = f.structure();
  s.rows = s.cols = s.rank = n;
  const Vector w = s.coefficients[0];
  s.set_field([rbf, c, w](const Vec3& x) {
    double v = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) v += w[j] * rbf->evaluate(norm(x - c[j]));
    return v;
  });
  return s;
}

struct Cell {
  std::size_t study;
  std::size_t count;
  std::size_t scheme;
};

ReportRow run_cell(const StudySpec& st, const NodeCount& nc, const SchemeSpec& sc, std::uint64_t seed) {
  ReportRow row;
  row.study = st.name;
  row.problem = st.problem;
  row.scheme = sc.name;
  row.boundary = nc.boundary;
  row.interior = sc.name == "BPM" ? 0 : nc.interior;
  try {
    const BoundaryValueProblem bvp = named_problem(st.problem, st.params);
    const auto region = make_region(st.geometry);
    const NodeCloud cloud = make_cloud(st.geometry, {nc.boundary, row.interior}, seed);
    const std::vector<Vec3> checks = material_grid(*region, st.checkpoints, st.checkpoint_offset);
    const ProfilePtr mq = multiquadric(sc.shape);
    CollocationOptions co;
    co.exploit_structure = sc.exploit_structure;

    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    if (sc.name == "BKM") {
      BkmOptions o;
      o.order = sc.order;
      o.drm_basis = mq;
      o.exploit_structure = sc.exploit_structure;
      sol = bkm_solve(bvp, cloud, o);
    } else if (sc.name == "BPM") {
      BpmOptions o;
      o.truncation = sc.truncation;
      o.solver = sc.level_solver;
      o.rank_tolerance = sc.rank_tolerance;
      o.exploit_structure = sc.exploit_structure;
      sol = bpm_solve(bvp, cloud, o);
    } else if (sc.name == "Kansa") {
      sol = kansa_solve(bvp, cloud, mq, co);
    } else if (sc.name == "MKM") {
      sol = mkm_solve(bvp, cloud, mq, co);
    } else if (sc.name == "LSRCM") {
      // Field cloud: every block scaled by the oversampling factor (an
      // interval keeps its two end points).
      NodeCount fc{static_cast<int>(std::lround(nc.boundary * sc.oversampling)),
                   static_cast<int>(std::lround(nc.interior * sc.oversampling))};
      if (cloud.dim() == 1) {
        fc.boundary = 2;
        fc.interior = static_cast<int>(std::lround(static_cast<double>(cloud.size()) * sc.oversampling)) - 2;
      }
      const NodeCloud field = make_cloud(st.geometry, fc, seed ^ 0x9e3779b97f4a7c15ULL);
      LsrcmOptions o;
      sol = lsrcm_solve(bvp, field, cloud.positions(), mq, o);
    } else {
      sol = interpolate_exact(bvp, cloud, mq, sc.exploit_structure);
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.seconds = std::chrono::duration<double>(t1 - t0).count();
    row.unknowns = sol.cols;
    row.condition = sol.condition_estimate;
    row.l2_error = l2_relative_error(sol, bvp.exact.value, checks);
    if (!std::isfinite(row.l2_error)) throw ConditioningError("non-finite error norm", sol.condition_estimate);
  } catch (const std::exception& e) {
    row.ok = false;
    row.failure = error_tag(e) + ": " + e.what();
    row.l2_error = std::numeric_limits<double>::quiet_NaN();
    if (auto* ce = dynamic_cast<const ConditioningError*>(&e)) row.condition = ce->condition_estimate();
    else row.condition = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::unique_ptr<Region> make_region(const GeometrySpec& g) {
  if (g.kind == "square_cutout") return std::make_unique<SquareCutout>(g.square);
  if (g.kind == "cube_two_ball_cavity") return std::make_unique<CubeTwoBallCavity>(g.cube);
  if (g.kind == "circle") {
    auto d = std::make_unique<Disk>();
    d->radius = g.radius;
    return d;
  }
  if (g.kind == "sphere") {
    auto b = std::make_unique<Ball>();
    b->radius = g.radius;
    return b;
  }
  if (g.kind == "interval") {
    auto i = std::make_unique<Interval>();
    i->half_length = g.radius;
    return i;
  }
  throw ConfigError("unknown geometry kind '" + g.kind + "'");
}

NodeCloud make_cloud(const GeometrySpec& g, const NodeCount& count, std::uint64_t seed) {
  NodeCloud cloud;
  if (g.kind == "square_cutout") cloud = sample_square_with_cutout(g.square, count.boundary, count.interior);
  else if (g.kind == "cube_two_ball_cavity") cloud = sample_cube_with_two_ball_cavity(g.cube, count.boundary, count.interior);
  else if (g.kind == "circle") cloud = sample_circle(g.radius, count.boundary, count.interior);
  else if (g.kind == "sphere") cloud = sample_sphere(g.radius, count.boundary, count.interior);
  else if (g.kind == "interval") {
    if (count.boundary != 2 && count.boundary != 0) throw ConfigError("an interval has exactly 2 boundary nodes");
    cloud = sample_interval(g.radius, count.interior);
  } else {
    throw ConfigError("unknown geometry kind '" + g.kind + "'");
  }
  if (g.jitter == 0.0 || count.interior == 0) return cloud;

  const auto region = make_region(g);
  const int dim = cloud.dim();
  const double h = 2.0 * region->half_extent() / std::pow(static_cast<double>(count.interior), 1.0 / dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-g.jitter * h, g.jitter * h);
  std::vector<Node> nodes = cloud.nodes();
  for (Node& n : nodes) {
    if (n.kind != NodeKind::Interior) continue;
    for (int tries = 0; tries < 20; ++tries) {
      Vec3 p = n.position;
      for (int a = 0; a < dim; ++a) p[a] += u(rng);
      if (region->contains(p)) {
        n.position = p;
        break;
      }
    }
  }
  return NodeCloud(dim, std::move(nodes));
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.source = j;
  c.name = get_or<std::string>(j, "name", c.name, "config");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
  if (j.contains("output")) {
    const json& o = j["output"];
    allow_keys(o, {"csv", "json", "timing_in_csv"}, "output");
    c.csv_path = get_or<std::string>(o, "csv", "", "output");
    c.json_path = get_or<std::string>(o, "json", "", "output");
    c.timing_in_csv = get_or(o, "timing_in_csv", false, "output");
  }
  static const std::set<std::string> top{"name", "seed", "output", "studies", "problem", "geometry", "schemes",
                                         "checkpoints", "checkpoint_offset", "metadata"};
  for (const auto& [k, v] : j.items())
    if (!top.count(k)) throw ConfigError("unknown key '" + k + "' in config");
  if (j.contains("studies")) {
    if (j.contains("problem") || j.contains("geometry") || j.contains("schemes"))
      throw ConfigError("give either 'studies' or a single top-level study, not both");
    std::size_t i = 0;
    for (const auto& s : j["studies"]) {
      static const std::set<std::string> keys{"name", "problem", "geometry", "schemes", "checkpoints",
                                              "checkpoint_offset", "metadata"};
      for (const auto& [k, v] : s.items())
        if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in study");
      c.studies.push_back(parse_study(s, c.name + "#" + std::to_string(i++)));
    }
  } else if (j.contains("problem")) {
    c.studies.push_back(parse_study(j, c.name));
  }

  // Spot-check every closed form before anything is solved.
  for (const StudySpec& s : c.studies) {
    const BoundaryValueProblem bvp = named_problem(s.problem, s.params);
    const auto region = make_region(s.geometry);
    if (region->dim() != bvp.op.dim)
      throw ConfigError("study '" + s.name + "': problem is " + std::to_string(bvp.op.dim) + "D but geometry is " +
                        std::to_string(region->dim()) + "D");
    try {
      validate_problem(bvp, *region, 1e-8, c.seed);
    } catch (const ConfigError& e) {
      throw ConfigError("study '" + s.name + "': " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

bool ExperimentReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.ok; });
}

ExperimentReport run_experiment(const ExperimentConfig& config, int jobs) {
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.studies.size(); ++s)
    for (std::size_t c = 0; c < config.studies[s].geometry.counts.size(); ++c)
      for (std::size_t k = 0; k < config.studies[s].schemes.size(); ++k) cells.push_back({s, c, k});
  // Scheme-major order within a study reads like the tables: all counts of
  // the first scheme, then the next scheme.
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.study != b.study ? a.study < b.study : a.scheme < b.scheme;
  });

  ExperimentReport report;
  report.name = config.name;
  report.config = config.source;
  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const StudySpec& st = config.studies[c.study];
      report.rows[i] = run_cell(st, st.geometry.counts[c.count], st.schemes[c.scheme], cell_seed(config.seed, i));
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

ConvergenceFit fit_convergence(const std::vector<double>& m, const std::vector<double>& err, bool log_log_term) {
  if (m.size() != err.size()) throw ParameterError("node counts and errors differ in length");
  const std::size_t need = log_log_term ? 4 : 3;
  const std::set<double> distinct(m.begin(), m.end());
  if (distinct.size() < need)
    throw FitError("convergence fit needs at least " + std::to_string(need) + " distinct node counts, got " +
                   std::to_string(distinct.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(err[i] > 0.0) || !std::isfinite(err[i])) throw FitError("convergence fit needs positive finite errors");
    if (!(m[i] > (log_log_term ? 1.0 : 0.0))) throw FitError("node counts must be > 1 for the fit");
  }
  const std::size_t cols = log_log_term ? 3 : 2;
  Matrix a(m.size(), cols);
  Vector b(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(m[i]);
    if (log_log_term) a(i, 2) = std::log(std::log(m[i]));
    b[i] = std::log(err[i]);
  }
  Vector x;
  try {
    x = least_squares_solve(a, b);
  } catch (const RankError& e) {
    throw FitError(std::string("degenerate convergence fit: ") + e.what());
  }
  ConvergenceFit f;
  f.p = x[1];
  f.q = log_log_term ? x[2] : 0.0;
  f.points = m.size();
  const Vector r = a * x;
  double ss = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) ss += (r[i] - b[i]) * (r[i] - b[i]);
  f.residual = std::sqrt(ss / static_cast<double>(m.size()));
  return f;
}

void add_convergence_fits(ExperimentReport& report, bool log_log_term) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const ReportRow& r : report.rows) {
    const auto key = std::make_pair(r.study, r.scheme);
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    if (!r.ok) continue;
    g.first.push_back(static_cast<double>(r.boundary + r.interior));
    g.second.push_back(r.l2_error);
  }
  report.fits.clear();
  for (const auto& key : order) {
    const auto& g = groups[key];
    try {
      report.fits.push_back({key.first, key.second, fit_convergence(g.first, g.second, log_log_term)});
    } catch (const FitError&) {
      // too few successful refinement levels for this scheme
    }
  }
}

void write_csv(const ExperimentReport& report, std::ostream& os, bool timing) {
  os << "study,problem,scheme,boundary,interior,unknowns,l2_error,condition,status,failure";
  if (timing) os << ",seconds";
  os << '\n';
  for (const ReportRow& r : report.rows) {
    os << csv_field(r.study) << ',' << csv_field(r.problem) << ',' << r.scheme << ',' << r.boundary << ','
       << r.interior << ',' << r.unknowns << ',' << fmt(r.l2_error) << ',' << fmt(r.condition) << ','
       << (r.ok ? "ok" : "failed") << ',' << csv_field(r.failure);
    if (timing) os << ',' << fmt(r.seconds);
    os << '\n';
  }
}

json to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"study", r.study},
                    {"problem", r.problem},
                    {"scheme", r.scheme},
                    {"boundary", r.boundary},
                    {"interior", r.interior},
                    {"unknowns", r.unknowns},
                    {"l2_error", num_or_null(r.l2_error)},
                    {"condition", num_or_null(r.condition)},
                    {"seconds", r.seconds},
                    {"status", r.ok ? "ok" : "failed"},
                    {"failure", r.failure}});
  }
  json fits = json::array();
  for (const FitRow& f : report.fits)
    fits.push_back({{"study", f.study},
                    {"scheme", f.scheme},
                    {"p", f.fit.p},
                    {"q", f.fit.q},
                    {"residual", f.fit.residual},
                    {"points", f.fit.points}});
  return {{"name", report.name}, {"config", report.config}, {"rows", rows}, {"fits", fits}};
}

void write_outputs(const ExperimentReport& report, const ExperimentConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  auto place = [&](const std::string& p, const std::string& fallback) {
    const std::string name = p.empty() ? fallback : p;
    if (dir.empty()) return fs::path(name);
    return fs::path(dir) / fs::path(name).filename();
  };
  if (!dir.empty()) fs::create_directories(dir);
  if (!config.csv_path.empty() || !dir.empty()) {
    const fs::path p = place(config.csv_path, config.name + ".csv");
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    write_csv(report, os, config.timing_in_csv);
  }
  if (!config.json_path.empty() || !dir.empty()) {
    const fs::path p = place(config.json_path, config.name + ".json");
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    os << to_json(report).dump(2) << '\n';
  }
}

}  // namespace mrbf
