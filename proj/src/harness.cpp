#include "semiwkb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "semiwkb/error.hpp"
#include "semiwkb/io.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/schrodinger.hpp"
#include "semiwkb/wkb.hpp"

namespace semiwkb {

namespace nm = numerics;
using cd = std::complex<double>;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> log_times(double lo, double hi, std::size_t per_decade) {
  const double decades = std::log10(hi / lo);
  const auto count = static_cast<std::size_t>(std::llround(decades * per_decade));
  std::vector<double> t;
  for (std::size_t k = 0; k <= count; ++k) {
    t.push_back(lo * std::pow(10.0, decades * static_cast<double>(k) / static_cast<double>(count)));
  }
  t.back() = hi;
  return t;
}

double wave_l2(const RadialGrid& g, const std::vector<cd>& f) {
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += std::norm(f[j]) * g[j] * g[j];
  return std::sqrt(4.0 * std::numbers::pi * g.step() * acc);
}

double step_for(const ExperimentConfig& c, double eps) {
  if (c.dt_over_eps > 0.0) return c.dt_over_eps * eps;
  return c.dt;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return !v.empty();
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- converge -----------------------------------------------------------

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 3) {
    throw ParameterError("order fit needs at least 3 (eps, error) pairs");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(err[i] > 0.0)) throw DomainError("order fit: non-positive error at eps = " + std::to_string(eps[i]));
    x.push_back(std::log(eps[i]));
    y.push_back(std::log(err[i]));
  }
  OrderFit out;
  const auto top = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
  if (x.size() >= 4) {
    std::vector<double> xr, yr;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i != top) {
        xr.push_back(x[i]);
        yr.push_back(y[i]);
      }
    }
    const auto rest = nm::fit_line(xr, yr);
    const double resid = y[top] - (rest.intercept + rest.slope * x[top]);
    if (std::fabs(resid) > 3.0 * std::max(rest.rms, 0.02)) {
      out.excluded_eps = eps[top];
      out.order = rest.slope;
      out.slope_stderr = rest.slope_stderr;
      out.rms = rest.rms;
      return out;
    }
  }
  const auto all = nm::fit_line(x, y);
  out.order = all.slope;
  out.slope_stderr = all.slope_stderr;
  out.rms = all.rms;
  return out;
}

ConvergenceReport converge(const ExperimentConfig& config) {
  validate_for(config, Scenario::Converge);
  const auto data = build_data(config.data, config.grid);
  const auto wg = make_interior(*config.wave_grid);
  const double T = config.t_end;

  // Everything eps-independent is computed once.
  const auto t0 = std::chrono::steady_clock::now();
  const LimitSolution limit(data);
  const auto lead = limit.at(T, wg);
  std::vector<double> growth_t;
  for (int k = 1; k <= 4; ++k) growth_t.push_back(T * k / 4.0);
  CorrectorOptions copt;
  copt.output_times = growth_t;
  const auto corr_series = first_corrector(data, T, wg, std::nullopt, copt);
  const auto& corr = corr_series.back();
  ConvergenceReport rep;
  rep.t_end = T;
  rep.corrector_runtime = seconds_since(t0);

  // Resolution is checked for every eps before any march starts.
  for (double eps : config.eps) {
    try {
      (void)initial_wavefield(data, eps, wg);
    } catch (const ResolutionError& e) {
      throw ResolutionError("converge aborted at eps = " + short_number(eps) + ": " + e.what());
    }
  }

  auto full_error = [&](const WaveField& u, const WkbFields& f, const CorrectorSample& c) {
    std::vector<cd> d(wg.size());
    for (std::size_t j = 0; j < wg.size(); ++j) {
      d[j] = u.values[j] * std::polar(1.0, -f.phi0[j] / u.eps) - f.a0[j] * std::polar(1.0, c.phi1[j]);
    }
    return wave_l2(wg, d);
  };

  const std::size_t last = config.eps.size() - 1;
  std::vector<WaveField> snaps;
  rep.rows.resize(config.eps.size());
  parallel_for(config.eps.size(), config.threads, [&](std::size_t k) {
    const double eps = config.eps[k];
    const auto start = std::chrono::steady_clock::now();
    RunOptions opt;
    if (k == last) opt.snapshot_times = growth_t;
    auto res = run(data, eps, T, step_for(config, eps), wg, opt);
    const auto& u = res.final;
    std::vector<cd> dmod(wg.size());
    for (std::size_t j = 0; j < wg.size(); ++j) dmod[j] = std::abs(u.values[j]) - std::abs(lead.a0[j]);
    rep.rows[k] = ConvergenceRow{eps, wave_l2(wg, dmod), full_error(u, lead, corr), seconds_since(start)};
    if (k == last) snaps = std::move(res.snapshots);
  });

  // Error growth in time at the smallest eps.
  rep.growth_eps = config.eps[last];
  std::vector<double> gt, ge;
  for (const auto& snap : snaps) {
    const CorrectorSample* c = nullptr;
    for (const auto& s : corr_series) {
      if (std::fabs(s.t - snap.t) <= 1e-9 * std::max(1.0, T)) c = &s;
    }
    if (!c || !(snap.t > 0.0)) continue;
    const double e = full_error(snap, limit.at(snap.t, wg), *c);
    rep.growth.push_back({snap.t, e});
    gt.push_back(snap.t);
    ge.push_back(std::log(e));
  }
  if (gt.size() >= 3) {
    // log e = c0 + c1 t + c2 t^2 by normal equations on t / T.
    double S[5] = {0, 0, 0, 0, 0}, Y[3] = {0, 0, 0};
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double x = gt[i] / T;
      double p = 1.0;
      for (int m = 0; m < 5; ++m, p *= x) {
        S[m] += p;
        if (m < 3) Y[m] += p * ge[i];
      }
    }
    const double M[3][3] = {{S[0], S[1], S[2]}, {S[1], S[2], S[3]}, {S[2], S[3], S[4]}};
    auto det3 = [](const double A[3][3]) {
      return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
             A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
             A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    };
    double M2[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) M2[i][j] = j == 2 ? Y[i] : M[i][j];
    }
    rep.log_growth_curvature = det3(M2) / det3(M);
    rep.log_growth_at_most_linear = rep.log_growth_curvature <= 0.1;
  }

  std::vector<double> e, em, ef;
  for (const auto& r : rep.rows) {
    e.push_back(r.eps);
    em.push_back(r.err_modulus);
    ef.push_back(r.err_full);
  }
  rep.modulus = fit_order(e, em);
  rep.full = fit_order(e, ef);
  return rep;
}

// ---- classify sweep -----------------------------------------------------

std::vector<ClassifyRow> classify_sweep(const ExperimentConfig& config) {
  std::vector<ClassifyRow> rows;
  for (double a : config.sweep.amplitude_scales) {
    for (double b : config.sweep.velocity_scales) rows.push_back(ClassifyRow{a, b, "sweep", {}});
  }
  const bool family_check = config.data.phase == "compatible" && config.data.lambda < 0.0 &&
                            config.data.n >= 3;
  std::optional<InitialData> base;
  if (family_check) {
    base.emplace(build_data(config.data, config.grid));
    for (double a : config.sweep.amplitude_scales) {
      rows.push_back(ClassifyRow{a, 1.0, "scaling", {}});
    }
  }
  parallel_for(rows.size(), config.threads, [&](std::size_t i) {
    auto& row = rows[i];
    if (row.kind == "sweep") {
      row.verdict = classify(build_data(config.data, config.grid, row.amplitude_scale, row.velocity_scale));
      return;
    }
    const double a = row.amplitude_scale;
    std::vector<cd> amp(base->amplitude().data());
    for (auto& x : amp) x *= a;
    std::vector<double> vel(base->velocity().data());
    for (auto& v : vel) v *= std::fabs(a);
    const auto& g = base->grid();
    const auto scaled = InitialData::with_velocity(
        ComplexProfile(g, std::move(amp), base->amplitude().interpolation_order()),
        RealProfile(g, std::move(vel), base->velocity().interpolation_order()), base->lambda(),
        base->n(), base->tags());
    row.verdict = classify(scaled);
  });
  return rows;
}

// ---- decay study --------------------------------------------------------

DecaySeries& DecayReport::at(const std::string& name) {
  for (auto& s : series) {
    if (s.name == name) return s;
  }
  throw ContractError("no decay series named " + name);
}

const DecaySeries& DecayReport::at(const std::string& name) const {
  return const_cast<DecayReport*>(this)->at(name);
}

DecayReport decay_study(const ExperimentConfig& config) {
  validate_for(config, Scenario::DecayStudy);
  const auto data = build_data(config.data, config.grid);
  const LimitSolution sol(data);
  const auto& map = sol.map();
  const int n = data.n();
  const double area = nm::sphere_area(n);
  const double p = config.decay.p;
  const auto times = log_times(config.decay.t_min, config.decay.t_max, config.decay.per_decade);

  // Labels for the Lagrangian integrals; the velocity field reaches far
  // beyond the support of the density.
  const auto labels = RadialGrid::geometric(1e-4, 1e7, 6001);
  const auto lw = nm::trapezoid_weights(labels);

  // Eulerian window: labels carrying the amplitude.
  double amax = 0.0;
  for (const auto& a : data.amplitude().values()) amax = std::max(amax, std::abs(a));
  double r_hi = data.grid().back();
  for (std::size_t i = data.grid().size(); i-- > 1;) {
    if (std::abs(data.amplitude()[i]) > 1e-10 * amax) {
      r_hi = data.grid()[std::min(i + 1, data.grid().size() - 1)];
      break;
    }
  }
  const double r_lo = data.grid()[1] * 1e-2;

  DecayReport rep;
  rep.series = {{"a0_l2", {}, {}, {}, {}, false},
                {"grad_a0_l2", {}, {}, {}, {}, false},
                {"grad_phi0_lp", {}, {}, {}, {}, false},
                {"sup_v", {}, {}, {}, {}, false},
                {"X_1", {}, {}, {}, {}, false}};
  std::vector<std::array<double, 4>> values(times.size());
  parallel_for(times.size(), config.threads, [&](std::size_t k) {
    const double t = times[k];
    double sup = 0.0, lp = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto s = map.at(t, labels[i]);
      const double v = std::fabs(s.Xdot);
      sup = std::max(sup, v);
      lp += lw[i] * std::pow(v, p) * std::pow(s.X, n - 1) * s.B;
    }
    const auto eg = RadialGrid::geometric(map.at(t, r_lo).X, map.at(t, r_hi).X, 4001);
    const auto f = sol.at(t, eg);
    const auto da = nm::derivative(eg, f.a0.values(), 1);
    std::vector<double> g(eg.size());
    for (std::size_t i = 0; i < eg.size(); ++i) g[i] = std::abs(da[i]);
    values[k] = {lp_norm(f.a0, n, 2.0), lp_norm(RealProfile(eg, std::move(g)), n, 2.0),
                 std::pow(area * lp, 1.0 / p), sup};
  });
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t s = 0; s < 4; ++s) {
      rep.series[s].t.push_back(times[k]);
      rep.series[s].values.push_back(values[k][s]);
    }
  }
  auto& X = rep.series[4];
  X.t = log_times(config.decay.x_t_min, config.decay.x_t_max, config.decay.per_decade);
  for (double t : X.t) X.values.push_back(map.at(t, 1.0).X);

  for (auto& s : rep.series) {
    s.strictly_decreasing = strictly_decreasing(s.values);
    try {
      s.fit = decay_fit(s.t, s.values, s.name == "X_1" ? 0.0 : config.decay.fit_from);
    } catch (const Error& e) {
      s.fit_error = e.what();
    }
  }
  return rep;
}

// ---- scenario driver ----------------------------------------------------

namespace {

json verdict_json(const Verdict& v) {
  json j{{"kind", to_string(v.kind)},
         {"certificate", {{"condition", v.certificate.condition},
                          {"r", v.certificate.r},
                          {"value", v.certificate.value}}}};
  j["t_c"] = v.t_c ? json(*v.t_c) : json(nullptr);
  j["mechanism"] = v.mechanism ? json(to_string(*v.mechanism)) : json(nullptr);
  return j;
}

json fit_json(const OrderFit& f) {
  json j{{"order", f.order}, {"stderr", f.slope_stderr}, {"rms", f.rms}};
  j["excluded_eps"] = f.excluded_eps ? json(*f.excluded_eps) : json(nullptr);
  return j;
}

json report_json(const NormReport& r) {
  json lp = json::object();
  for (const auto& [e, v] : r.lp_norms) lp[std::isinf(e) ? "inf" : io::format_number(e)] = v;
  json j{{"t", r.t},
         {"lp_norms", lp},
         {"gradient_norm", r.gradient_norm},
         {"hessian_norm", r.hessian_norm},
         {"h_s", r.h_s},
         {"y_norm", r.y_norm},
         {"method", r.method == SobolevMethod::Spectral ? "spectral" : "finite_difference"}};
  if (r.spectral_tail_fraction) j["spectral_tail_fraction"] = *r.spectral_tail_fraction;
  return j;
}

std::string indexed(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu.csv", i);
  return stem + buf;
}

}  // namespace

std::vector<std::filesystem::path> run_scenario(const ExperimentConfig& config_in, Scenario scenario,
                                                const std::filesystem::path& out_dir,
                                                unsigned threads) {
  ExperimentConfig config = config_in;
  validate_for(config, scenario);
  config.threads = threads;
  const std::string hash = config_hash(config);
  std::vector<std::filesystem::path> written;
  auto path = [&](const std::string& name) {
    written.push_back(out_dir / name);
    return written.back();
  };

  switch (scenario) {
    case Scenario::Classify: {
      const auto rows = classify_sweep(config);
      io::CsvWriter csv(path("classify.csv"),
                        {"amplitude_scale", "velocity_scale", "kind", "verdict", "t_c", "mechanism",
                         "certificate", "certificate_r", "certificate_value"},
                        hash);
      for (const auto& r : rows) {
        const auto& v = r.verdict;
        csv.row_cells({io::format_number(r.amplitude_scale), io::format_number(r.velocity_scale), r.kind,
                       to_string(v.kind), v.t_c ? io::format_number(*v.t_c) : "",
                       v.mechanism ? to_string(*v.mechanism) : "", v.certificate.condition,
                       io::format_number(v.certificate.r), io::format_number(v.certificate.value)});
      }
      break;
    }
    case Scenario::EvolveEp: {
      const auto data = build_data(config.data, config.grid);
      const auto out = make_uniform(config.output_grid.value_or(config.grid));
      io::write_json(path("verdict.json"), verdict_json(classify(data)), hash);
      for (std::size_t i = 0; i < config.times.size(); ++i) {
        const auto f = eulerian_fields(data, config.times[i], out);
        io::CsvWriter csv(path(indexed("eulerian", i)),
                          {"t", "r", "density", "velocity", "label", "extrapolated"}, hash);
        for (std::size_t j = 0; j < out.size(); ++j) {
          csv.row({f.t, out[j], f.density[j], f.velocity[j], f.labels[j], f.extrapolated[j] ? 1.0 : 0.0});
        }
      }
      break;
    }
    case Scenario::WkbEval: {
      const auto data = build_data(config.data, config.grid);
      const auto out = make_uniform(config.output_grid.value_or(config.grid));
      const LimitSolution sol(data);
      std::vector<CorrectorSample> corr;
      if (config.corrector) {
        CorrectorOptions opt;
        opt.dt = config.dt;
        opt.output_times = config.times;
        corr = first_corrector(data, *std::max_element(config.times.begin(), config.times.end()), out,
                               std::nullopt, opt);
      }
      io::JsonLinesWriter norms(path("norms.jsonl"), hash);
      for (std::size_t i = 0; i < config.times.size(); ++i) {
        const double t = config.times[i];
        const auto f = sol.at(t, out);
        const CorrectorSample* c = nullptr;
        for (const auto& s : corr) {
          if (std::fabs(s.t - t) <= 1e-12 * std::max(1.0, t)) c = &s;
        }
        io::CsvWriter csv(path(indexed("wkb", i)),
                          {"t", "r", "a0_re", "a0_im", "phi0", "V_P", "a1_re", "a1_im", "phi1"}, hash);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j < out.size(); ++j) {
          csv.row({t, out[j], f.a0[j].real(), f.a0[j].imag(), f.phi0[j], f.potential[j],
                   c ? c->a1[j].real() : nan, c ? c->a1[j].imag() : nan, c ? c->phi1[j] : nan});
        }
        const int n = data.n();
        auto ra = report_json(norm_diagnostics(f.a0, n, 2.0, 2.0, 2.0, FieldKind::Scalar, t));
        ra["field"] = "a0";
        norms.write(ra);
        const auto v = nm::derivative(out, f.phi0.values(), 1, nm::Parity::Even);
        auto rv = report_json(norm_diagnostics(RealProfile(out, v), n, config.decay.p, 2.0, 2.0,
                                               FieldKind::Vector, t));
        rv["field"] = "grad_phi0";
        norms.write(rv);
      }
      break;
    }
    case Scenario::SchrodingerRun: {
      const auto data = build_data(config.data, config.grid);
      const auto wg = make_interior(*config.wave_grid);
      const double eps = config.eps.front();
      RunOptions opt;
      opt.sample_times = config.times;
      const auto res = run(data, eps, config.t_end, step_for(config, eps), wg, opt);
      json head{{"eps", eps},
                {"dt", res.dt},
                {"steps", res.steps},
                {"t_end", config.t_end},
                {"grid", {{"r_max", wg.r_max()}, {"points", wg.size()}, {"step", wg.step()}}}};
      json warn = json::array();
      for (const auto& w : res.warnings) warn.push_back({{"t", w.t}, {"boundary_fraction", w.boundary_fraction}});
      head["truncation_warnings"] = warn;
      io::write_json(path("run.json"), head, hash);
      io::JsonLinesWriter obs(path("observables.jsonl"), hash);
      for (const auto& s : res.series) {
        obs.write({{"t", s.t}, {"mass", s.mass}, {"energy", s.energy}, {"boundary_mass", s.boundary_mass}});
      }
      io::CsvWriter csv(path("snapshot_final.csv"), {"r", "re", "im"}, hash);
      for (std::size_t j = 0; j < wg.size(); ++j) {
        csv.row({wg[j], res.final.values[j].real(), res.final.values[j].imag()});
      }
      break;
    }
    case Scenario::Converge: {
      const auto rep = converge(config);
      io::CsvWriter csv(path("convergence.csv"), {"eps", "err_modulus", "err_full"}, hash);
      json timing{{"corrector_seconds", rep.corrector_runtime}};
      json runs = json::array();
      for (const auto& r : rep.rows) {
        csv.row({r.eps, r.err_modulus, r.err_full});
        runs.push_back({{"eps", r.eps}, {"seconds", r.runtime}});
      }
      timing["runs"] = runs;
      json growth = json::array();
      for (const auto& g : rep.growth) growth.push_back({{"t", g.t}, {"err_full", g.err_full}});
      io::write_json(path("convergence.json"),
                     {{"t_end", rep.t_end},
                      {"fitted_order_modulus", fit_json(rep.modulus)},
                      {"fitted_order_full", fit_json(rep.full)},
                      {"error_growth",
                       {{"eps", rep.growth_eps},
                        {"samples", growth},
                        {"log_curvature", rep.log_growth_curvature},
                        {"log_growth_at_most_linear", rep.log_growth_at_most_linear}}}},
                     hash);
      // Wall-clock numbers live apart from the reproducible reports.
      io::write_json(path("timing.json"), timing, hash);
      break;
    }
    case Scenario::DecayStudy: {
      const auto rep = decay_study(config);
      io::CsvWriter csv(path("decay_series.csv"), {"series", "t", "value"}, hash);
      json doc{{"series", json::array()}};
      for (const auto& s : rep.series) {
        for (std::size_t k = 0; k < s.t.size(); ++k) {
          csv.row_cells({s.name, io::format_number(s.t[k]), io::format_number(s.values[k])});
        }
        json e{{"name", s.name}, {"strictly_decreasing", s.strictly_decreasing}};
        if (s.fit) {
          e["exponent"] = s.fit->exponent;
          e["stderr"] = s.fit->slope_stderr;
          e["samples"] = s.fit->samples;
        } else {
          e["fit_error"] = s.fit_error;
        }
        doc["series"].push_back(e);
      }
      io::write_json(path("decay.json"), doc, hash);
      break;
    }
  }
  return written;
}

}  // namespace semiwkb
