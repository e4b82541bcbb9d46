#include "semiwkb/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "semiwkb/error.hpp"

namespace semiwkb {

using nlohmann::json;

namespace {

struct NamedScenario {
  Scenario s;
  const char* name;
};
constexpr NamedScenario kScenarios[] = {
    {Scenario::Classify, "classify"},          {Scenario::EvolveEp, "evolve-ep"},
    {Scenario::WkbEval, "wkb-eval"},           {Scenario::SchrodingerRun, "schrodinger-run"},
    {Scenario::Converge, "converge"},          {Scenario::DecayStudy, "decay-study"},
};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ParameterError("config: " + key + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path + key, "must be finite");
  return x;
}

long long get_integer(const json& obj, const std::string& key, const std::string& path,
                      long long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + key, "expected an integer");
  return v.get<long long>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(path + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(path + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(path + key, "expected an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) fail(path + key, "entries must be finite");
  }
  return out;
}

GridConfig parse_grid(const json& obj, const std::string& name) {
  reject_unknown(obj, name, {"r_max", "points"});
  GridConfig g;
  g.r_max = get_number(obj, "r_max", name + ".", g.r_max);
  const long long pts = get_integer(obj, "points", name + ".", static_cast<long long>(g.points));
  if (!(g.r_max > 0.0)) fail(name + ".r_max", "must be positive");
  if (pts < static_cast<long long>(RadialGrid::min_points)) {
    fail(name + ".points", "must be at least " + std::to_string(RadialGrid::min_points));
  }
  g.points = static_cast<std::size_t>(pts);
  return g;
}

json grid_json(const GridConfig& g) { return json{{"r_max", g.r_max}, {"points", g.points}}; }

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& e : kScenarios) {
    if (e.s == s) return e.name;
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (const auto& e : kScenarios) {
    if (name == e.name) return e.s;
  }
  throw ParameterError("unknown scenario '" + std::string(name) + "'");
}

namespace {

bool present(const json& obj, const char* key) { return obj.contains(key) && !obj.at(key).is_null(); }

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"scenario", "data", "grid", "output_grid", "wave_grid", "eps", "t_end", "dt",
                  "dt_over_eps", "times", "corrector", "sweep", "decay", "output_dir", "threads"});
  ExperimentConfig c;
  if (present(root, "scenario")) c.scenario = parse_scenario(get_string(root, "scenario", "", ""));

  if (root.contains("data")) {
    const auto& d = root.at("data");
    reject_unknown(d, "data",
                   {"family", "n", "lambda", "scale", "chirp", "kappa", "delta", "phase",
                    "velocity_scale"});
    auto& D = c.data;
    D.family = get_string(d, "family", "data.", D.family);
    D.n = static_cast<int>(get_integer(d, "n", "data.", D.n));
    D.lambda = get_number(d, "lambda", "data.", D.lambda);
    D.scale = get_number(d, "scale", "data.", D.scale);
    D.chirp = get_number(d, "chirp", "data.", D.chirp);
    D.kappa = static_cast<int>(get_integer(d, "kappa", "data.", D.kappa));
    D.delta = get_number(d, "delta", "data.", D.delta);
    D.phase = get_string(d, "phase", "data.", D.phase);
    D.velocity_scale = get_number(d, "velocity_scale", "data.", D.velocity_scale);
    if (D.family != "sample" && D.family != "gaussian" && D.family != "ball" &&
        D.family != "smooth_ball") {
      fail("data.family", "expected sample, gaussian, ball or smooth_ball");
    }
    if (D.phase != "compatible" && D.phase != "zero") fail("data.phase", "expected compatible or zero");
    if (D.n < 1) fail("data.n", "must be at least 1");
  }
  if (root.contains("grid")) c.grid = parse_grid(root.at("grid"), "grid");
  if (present(root, "output_grid")) c.output_grid = parse_grid(root.at("output_grid"), "output_grid");
  if (present(root, "wave_grid")) c.wave_grid = parse_grid(root.at("wave_grid"), "wave_grid");

  c.eps = get_numbers(root, "eps", "", {});
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (!(c.eps[i] > 0.0 && c.eps[i] <= 1.0)) fail("eps", "values must lie in (0, 1]");
    if (i > 0 && !(c.eps[i] < c.eps[i - 1])) fail("eps", "ladder must be strictly decreasing");
  }
  c.t_end = get_number(root, "t_end", "", c.t_end);
  if (!(c.t_end >= 0.0)) fail("t_end", "must be nonnegative");
  c.dt = get_number(root, "dt", "", c.dt);
  if (!(c.dt >= 0.0)) fail("dt", "must be nonnegative");
  c.dt_over_eps = get_number(root, "dt_over_eps", "", c.dt_over_eps);
  if (!(c.dt_over_eps >= 0.0)) fail("dt_over_eps", "must be nonnegative");
  c.times = get_numbers(root, "times", "", {});
  for (double t : c.times) {
    if (!(t >= 0.0)) fail("times", "must be nonnegative");
  }
  if (root.contains("corrector")) {
    if (!root.at("corrector").is_boolean()) fail("corrector", "expected a boolean");
    c.corrector = root.at("corrector").get<bool>();
  }
  if (root.contains("sweep")) {
    const auto& s = root.at("sweep");
    reject_unknown(s, "sweep", {"amplitude_scales", "velocity_scales"});
    c.sweep.amplitude_scales = get_numbers(s, "amplitude_scales", "sweep.", c.sweep.amplitude_scales);
    c.sweep.velocity_scales = get_numbers(s, "velocity_scales", "sweep.", c.sweep.velocity_scales);
    if (c.sweep.amplitude_scales.empty() || c.sweep.velocity_scales.empty()) {
      fail("sweep", "scale lists must be nonempty");
    }
    for (double b : c.sweep.velocity_scales) {
      if (b < 0.0) fail("sweep.velocity_scales", "must be nonnegative");
    }
  }
  if (root.contains("decay")) {
    const auto& s = root.at("decay");
    reject_unknown(s, "decay", {"t_min", "t_max", "per_decade", "p", "fit_from", "x_t_min", "x_t_max"});
    auto& D = c.decay;
    D.t_min = get_number(s, "t_min", "decay.", D.t_min);
    D.t_max = get_number(s, "t_max", "decay.", D.t_max);
    const long long per = get_integer(s, "per_decade", "decay.", static_cast<long long>(D.per_decade));
    D.p = get_number(s, "p", "decay.", D.p);
    D.x_t_min = get_number(s, "x_t_min", "decay.", D.x_t_min);
    D.x_t_max = get_number(s, "x_t_max", "decay.", D.x_t_max);
    D.fit_from = get_number(s, "fit_from", "decay.", D.fit_from);
    if (!(D.t_min > 0.0 && D.t_max > D.t_min)) fail("decay", "need 0 < t_min < t_max");
    if (!(D.x_t_min > 0.0 && D.x_t_max > D.x_t_min)) fail("decay", "need 0 < x_t_min < x_t_max");
    if (per < 1) fail("decay.per_decade", "must be positive");
    if (!(D.p >= 1.0)) fail("decay.p", "must be at least 1");
    D.per_decade = static_cast<std::size_t>(per);
  }
  c.output_dir = get_string(root, "output_dir", "", c.output_dir);
  const long long th = get_integer(root, "threads", "", 0);
  if (th < 0) fail("threads", "must be nonnegative");
  c.threads = static_cast<unsigned>(th);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_for(const ExperimentConfig& c, Scenario s) {
  if (c.scenario && *c.scenario != s) {
    throw ParameterError("config is for scenario '" + to_string(*c.scenario) + "', not '" +
                         to_string(s) + "'");
  }
  switch (s) {
    case Scenario::EvolveEp:
    case Scenario::WkbEval:
      if (c.times.empty()) fail("times", "required for " + to_string(s));
      break;
    case Scenario::SchrodingerRun:
      if (!c.wave_grid) fail("wave_grid", "required for schrodinger-run");
      if (c.eps.size() != 1) fail("eps", "schrodinger-run takes exactly one value");
      break;
    case Scenario::Converge:
      if (!c.wave_grid) fail("wave_grid", "required for converge");
      if (c.eps.size() < 3) fail("eps", "converge needs a ladder of at least 3 values");
      break;
    case Scenario::DecayStudy:
      if (c.data.phase != "compatible" || c.data.velocity_scale != 1.0 || !(c.data.lambda < 0.0) ||
          c.data.n < 3) {
        fail("data", "decay-study needs compatible data (lambda < 0, n >= 3)");
      }
      break;
    case Scenario::Classify:
      break;
  }
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario ? json(to_string(*c.scenario)) : json(nullptr);
  const auto& D = c.data;
  j["data"] = json{{"family", D.family}, {"n", D.n},         {"lambda", D.lambda},
                   {"scale", D.scale},   {"chirp", D.chirp}, {"kappa", D.kappa},
                   {"delta", D.delta},   {"phase", D.phase}, {"velocity_scale", D.velocity_scale}};
  j["grid"] = grid_json(c.grid);
  j["output_grid"] = c.output_grid ? grid_json(*c.output_grid) : json(nullptr);
  j["wave_grid"] = c.wave_grid ? grid_json(*c.wave_grid) : json(nullptr);
  j["eps"] = c.eps;
  j["t_end"] = c.t_end;
  j["dt"] = c.dt;
  j["dt_over_eps"] = c.dt_over_eps;
  j["times"] = c.times;
  j["corrector"] = c.corrector;
  j["sweep"] = json{{"amplitude_scales", c.sweep.amplitude_scales},
                    {"velocity_scales", c.sweep.velocity_scales}};
  const auto& Y = c.decay;
  j["decay"] = json{{"t_min", Y.t_min}, {"t_max", Y.t_max},     {"per_decade", Y.per_decade},
                    {"p", Y.p},         {"fit_from", Y.fit_from},
                    {"x_t_min", Y.x_t_min}, {"x_t_max", Y.x_t_max}};
  // output_dir and threads do not affect results and are left out.
  return j.dump();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json(c))));
  return buf;
}

RadialGrid make_uniform(const GridConfig& g) { return RadialGrid::uniform(g.r_max, g.points); }
RadialGrid make_interior(const GridConfig& g) { return RadialGrid::interior(g.r_max, g.points); }

InitialData build_data(const DataConfig& d, const GridConfig& gc, double amplitude_scale,
                       double velocity_scale) {
  const auto grid = make_uniform(gc);
  const double scale = d.scale * amplitude_scale;
  std::vector<std::complex<double>> a(grid.size());
  if (d.family == "sample") {
    const auto base = sample_amplitude(d.kappa, d.delta, d.n, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = base[i];
  } else if (d.family == "gaussian") {
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = std::exp(-grid[i] * grid[i] / 2);
  } else if (d.family == "ball") {
    const auto base = ball_indicator(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = base[i];
  } else if (d.family == "smooth_ball") {
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = smooth_cutoff(grid[i]);
  } else {
    fail("data.family", "unknown family '" + d.family + "'");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a[i] *= scale * std::polar(1.0, 0.5 * d.chirp * grid[i] * grid[i]);
  }
  DataTags tags;
  tags.family = d.family;
  if (d.family == "sample") {
    tags.kappa = d.kappa;
    tags.delta = d.delta;
  }
  const int order = d.family == "ball" ? 1 : 7;
  ComplexProfile A(grid, std::move(a), order);
  const double beta = d.velocity_scale * velocity_scale;
  if (d.phase == "zero") {
    return InitialData::with_velocity(std::move(A), RealProfile(grid, std::vector<double>(grid.size(), 0.0)),
                                      d.lambda, d.n, tags);
  }
  if (beta == 1.0) return InitialData::compatible(std::move(A), d.lambda, d.n, tags);
  auto pv = compatible_phase(A, d.lambda, d.n);
  std::vector<double> v(pv.velocity.data());
  for (double& x : v) x *= beta;
  return InitialData::with_velocity(std::move(A), RealProfile(grid, std::move(v), 7), d.lambda, d.n,
                                    tags);
}

}  // namespace semiwkb
