// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semiwkb/config.hpp"
#include "semiwkb/error.hpp"
#include "semiwkb/euler_poisson.hpp"
#include "semiwkb/harness.hpp"
#include "semiwkb/norms.hpp"
#include "semiwkb/profiles.hpp"
#include "semiwkb/schrodinger.hpp"
#include "semiwkb/wkb.hpp"

using namespace semiwkb;
using cd = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

InitialData compatible_ball(double r_max = 6.0, std::size_t pts = 4097) {
  const auto g = RadialGrid::uniform(r_max, pts);
  return InitialData::compatible(to_complex(ball_indicator(g)), -1.0, 3);
}

// 1. explicit vs adaptive characteristics ---------------------------------

Outcome characteristics_cross_check() {
  const auto t0 = Clock::now();
  const auto data = compatible_ball();
  std::vector<double> ts;
  for (int k = 0; k <= 20; ++k) ts.push_back(0.5 * k);
  double worst = 0.0;
  for (int i = 0; i <= 49; ++i) {
    const double R = 0.1 + (5.0 - 0.1) * i / 49.0;
    const auto tr = integrate_characteristics(data, R, 10.0, 1e-12, ts);
    if (tr.samples.size() != ts.size()) return {false, fmt("trajectory from R=%g stopped early", R)};
    for (const auto& s : tr.samples) {
      const auto e = explicit_characteristics(data, s.t, R);
      worst = std::max({worst, rel(s.X, e.X), rel(s.B, e.B)});
    }
  }
  const double secs = since(t0);
  return {worst <= 1e-8 && secs < 5.0,
          fmt("max relative |X - X_ode|, |B - B_ode| = %.2e (tol 1e-8), %.2f s (limit 5 s)", worst, secs)};
}

// 2. collapse time of the uniform ball ----------------------------------

Outcome collapse_time() {
  const auto g = RadialGrid::uniform(4.0, 4097);
  const auto still = RealProfile::sample(g, [](double) { return 0.0; });
  const auto data = InitialData::with_velocity(to_complex(ball_indicator(g)), still, -1.0, 3);
  const auto ev = blowup_time(data, 1.0, 10.0);
  if (!ev) return {false, "no collapse detected"};
  // Energy method: X'^2 = 2|lambda| m (1/X - 1/R), m = 1/3, R = 1.
  const double oracle = std::numbers::pi / 2.0 * std::sqrt(1.5);
  const double err = std::fabs(ev->t_c - 1.92382);
  return {err <= 1e-4 && std::fabs(oracle - 1.92382) <= 1e-4,
          fmt("t_c = %.7f, energy-method value %.7f, target 1.92382 +- 1e-4", ev->t_c, oracle)};
}

// 3. classifier vs brute-force event detection ---------------------------

struct Instance {
  InitialData data;
  std::string family;
};

Instance random_instance(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto g = RadialGrid::uniform(8.0, 1025);
  const bool attractive = index < 70;
  const int n = 3 + static_cast<int>(U(rng) * 3.0);
  const double s = 0.5 + 1.5 * U(rng);
  const double w = 0.6 + 0.9 * U(rng);
  const auto A = to_complex(RealProfile::sample(g, [&](double r) { return s * std::exp(-r * r / (2 * w * w)); }));
  const double lambda = attractive ? -(0.5 + U(rng)) : 0.5 + U(rng);
  if (attractive) {
    const auto vc = compatible_phase(A, lambda, n).velocity;
    const int kind = static_cast<int>(U(rng) * 7.0);
    const double c = 0.05 + 0.45 * U(rng);
    const double beta = U(rng) < 0.5 ? 0.7 + 0.25 * U(rng) : 1.05 + 0.25 * U(rng);
    std::vector<double> v(g.size());
    std::string fam;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g[i], q = vc[i] * vc[i];
      switch (kind) {
        case 0: v[i] = vc[i]; fam = "compatible"; break;
        case 1: v[i] = std::sqrt(q + c * r * r); fam = "C = c r^2"; break;
        case 2: v[i] = std::sqrt(q + c * std::tanh(r) * r); fam = "C = c r tanh r"; break;
        case 3: v[i] = std::sqrt(std::max(0.0, q - c * r * r * std::exp(-r * r))); fam = "C < 0 bump"; break;
        case 4: v[i] = beta * vc[i]; fam = "beta v_c"; break;
        case 5: v[i] = std::sqrt(q + c * r * r * std::exp(-r * r)); fam = "C > 0 bump"; break;
        default: v[i] = vc[i] - c * r * std::exp(-r * r); fam = "inward dent"; break;
      }
    }
    return {InitialData::with_velocity(A, RealProfile(g, std::move(v), 7), lambda, n), fam};
  }
  const double a = 2.0 * U(rng) - 1.0;
  const double b = U(rng);
  const auto v = RealProfile::sample(
      g, [&](double r) { return a * r * std::exp(-r * r / 2) + b * std::tanh(r); }, 7);
  return {InitialData::with_velocity(A, v, lambda, n), "repulsive"};
}

// Integrates every label to the horizon; an event is a collapse or a vanishing
// Jacobian on one trajectory, or two labels swapping order at a common time.
bool brute_force_event(const InitialData& data, double horizon) {
  const auto& g = data.grid();
  std::vector<double> ts;
  for (int k = 0; k <= 60; ++k) ts.push_back(horizon * std::pow(10.0, -6.0 + 6.0 * k / 60.0));
  std::vector<std::vector<double>> X;
  for (std::size_t i = 4; i < g.size(); i += 4) {
    const auto tr = integrate_characteristics(data, g[i], horizon, 1e-10, ts);
    if (tr.event) return true;
    std::vector<double> x;
    for (const auto& s : tr.samples) x.push_back(s.X);
    X.push_back(std::move(x));
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t i = 1; i < X.size(); ++i) {
      if (X[i][k] <= X[i - 1][k]) return true;
    }
  }
  return false;
}

Outcome classifier_soundness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  std::vector<Instance> cases;
  for (int i = 0; i < 100; ++i) cases.push_back(random_instance(rng, i));
  std::vector<int> agree(cases.size(), 0);
  std::vector<std::string> why(cases.size());
  int n_global = 0, n_blow = 0, n_violated = 0;
  std::vector<VerdictKind> kinds(cases.size());
  parallel_for(cases.size(), 0, [&](std::size_t i) {
    ClassifyOptions opt;
    opt.estimate_blowup_time = false;
    const auto v = classify(cases[i].data, opt);
    kinds[i] = v.kind;
    const bool event = brute_force_event(cases[i].data, 1e4);
    bool ok;
    if (cases[i].data.lambda() < 0.0) {
      ok = (v.kind == VerdictKind::Global && !event) || (v.kind == VerdictKind::FiniteTimeBlowup && event);
    } else {
      ok = (v.kind != VerdictKind::NecessaryConditionViolated || event) && (v.kind != VerdictKind::Global || !event);
    }
    agree[i] = ok ? 1 : 0;
    if (!ok) why[i] = cases[i].family + ": " + to_string(v.kind) + (event ? " vs event" : " vs no event");
  });
  int total = 0;
  std::string first_bad;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    total += agree[i];
    if (!agree[i] && first_bad.empty()) first_bad = " first disagreement #" + std::to_string(i) + " " + why[i];
    n_global += kinds[i] == VerdictKind::Global;
    n_blow += kinds[i] == VerdictKind::FiniteTimeBlowup;
    n_violated += kinds[i] == VerdictKind::NecessaryConditionViolated;
  }
  const double secs = since(t0);
  return {total == 100 && secs < 60.0,
          fmt("%d/100 agree (global %d, blowup %d, violated %d), %.1f s (limit 60 s)%s", total, n_global,
              n_blow, n_violated, secs, first_bad.c_str())};
}

// 4. compatible phase threshold ------------------------------------------

Outcome compatible_threshold() {
  double worst = 0.0;
  std::string where;
  for (int n : {3, 4, 5}) {
    const auto g = RadialGrid::uniform(20.0, 4096);
    std::vector<std::pair<std::string, ComplexProfile>> amps{
        {"gaussian", gaussian_amplitude(g)},
        {"chirped gaussian", gaussian_amplitude(g, 1.5, 1.0)},
        {"ball", to_complex(ball_indicator(g))},
        {"sample", to_complex(sample_amplitude(7, 0.25, n, g))}};
    for (const auto& [name, A] : amps) {
      for (double lambda : {-1.0, -3.0}) {
        const auto pv = compatible_phase(A, lambda, n);
        std::vector<double> rho(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::norm(A[i]);
        const auto C = critical_threshold(RealProfile(g, rho), pv.velocity, lambda, n);
        for (double c : C.values()) {
          if (std::fabs(c) > worst) {
            worst = std::fabs(c);
            where = name + ", n=" + std::to_string(n);
          }
        }
      }
    }
  }
  return {worst <= 1e-8, fmt("max |C| = %.2e (tol 1e-8) over 24 profiles, worst %s", worst, where.c_str())};
}

// 5. limit-system residuals ----------------------------------------------

double max_on(const RealProfile& f, double lo, double hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.grid()[i] >= lo && f.grid()[i] <= hi) m = std::max(m, std::fabs(f[i]));
  }
  return m;
}

Outcome limit_residuals() {
  const auto g = RadialGrid::uniform(20.0, 8193);
  const auto data = InitialData::compatible(gaussian_amplitude(g), -1.0, 3);
  const auto out = RadialGrid::uniform(10.0, 8192);
  const LimitSolution sol(data);
  double worst[3] = {0, 0, 0};
  for (double t : {0.5, 1.0, 5.0}) {
    const double dt = 1e-4;
    const auto r = limit_system_residual(sol.at(t - dt / 2, out), sol.at(t + dt / 2, out), data);
    worst[0] = std::max(worst[0], max_on(r.transport, 0.2, 10.0));
    worst[1] = std::max(worst[1], max_on(r.hamilton_jacobi, 0.2, 10.0));
    worst[2] = std::max(worst[2], max_on(r.poisson, 0.2, 10.0));
  }
  const double m = std::max({worst[0], worst[1], worst[2]});
  return {m <= 1e-5, fmt("transport %.2e, Hamilton-Jacobi %.2e, Poisson %.2e on [0.2, 10], t in {0.5, 1, 5} "
                         "(tol 1e-5)",
                         worst[0], worst[1], worst[2])};
}

// 6. Schrodinger solver verification -------------------------------------

WaveField gaussian_wave(double eps, double lambda, double r_max, std::size_t M) {
  const auto g = RadialGrid::interior(r_max, M);
  std::vector<cd> u(M);
  for (std::size_t j = 0; j < M; ++j) u[j] = std::exp(-g[j] * g[j] / 2);
  return WaveField{eps, lambda, 0.0, g, std::move(u)};
}

double distance(const WaveField& a, const WaveField& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) acc += std::norm(a.values[j] - b.values[j]) * a.grid[j] * a.grid[j];
  return std::sqrt(4 * std::numbers::pi * a.grid.step() * acc);
}

WaveField march(WaveField u, double dt, std::size_t steps) {
  StrangStepper s(u.grid, u.eps, u.lambda, dt);
  for (std::size_t k = 0; k < steps; ++k) s.step(u);
  return u;
}

Outcome solver_verification() {
  const double eps = 0.1;
  const auto u = march(gaussian_wave(eps, 0.0, 20.0, 4096), 1e-3, 1000);
  WaveField exact = u;
  const cd z(1.0, eps * u.t);
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    exact.values[j] = std::pow(z, -1.5) * std::exp(-u.grid[j] * u.grid[j] / (2.0 * z));
  }
  const double err = distance(u, exact);

  double drift = 0.0;
  for (double lambda : {-1.0, 1.0}) {
    const auto w = gaussian_wave(0.05, lambda, 20.0, 2048);
    const double m0 = wave_mass(w);
    drift = std::max(drift, std::fabs(wave_mass(march(w, 1e-3, 1000)) - m0) / m0);
  }

  auto solve = [](double dt) {
    return march(gaussian_wave(0.25, -1.0, 20.0, 1024), dt, static_cast<std::size_t>(std::llround(0.5 / dt)));
  };
  const auto a = solve(0.02), b = solve(0.01), c = solve(0.005);
  const double order = std::log2(distance(a, b) / distance(b, c));
  return {err <= 1e-6 && drift <= 1e-10 && order >= 1.9 && order <= 2.1,
          fmt("free Gaussian L2 error %.2e (tol 1e-6), relative mass drift %.2e per 1000 steps (tol 1e-10), "
              "dt order %.4f (in [1.9, 2.1])",
              err, drift, order)};
}

// 7 and 8. WKB convergence -------------------------------------------------

ConvergenceReport wkb_study(double& secs) {
  ExperimentConfig c;
  c.data.family = "gaussian";
  c.data.n = 3;
  c.data.lambda = -1.0;
  c.data.chirp = 1.0;
  c.grid = {20.0, 8193};
  c.wave_grid = GridConfig{40.0, 8192};
  c.eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  c.t_end = 0.5;
  c.dt_over_eps = 0.1;
  const auto t0 = Clock::now();
  auto rep = converge(c);
  secs = since(t0);
  return rep;
}

std::string rows_text(const ConvergenceReport& r, bool full) {
  std::string s;
  for (const auto& row : r.rows) s += fmt(" %.3g:%.3e", row.eps, full ? row.err_full : row.err_modulus);
  return s;
}

std::string excluded_text(const OrderFit& f) {
  return f.excluded_eps ? fmt(", excluded eps %g", *f.excluded_eps) : std::string();
}

Outcome wkb_modulus(const ConvergenceReport& r, double secs) {
  const double o = r.modulus.order;
  return {o >= 0.8 && o <= 1.2 && secs < 600.0,
          fmt("fitted order %.4f (in [0.8, 1.2])%s, errors%s, %.1f s (limit 600 s)", o,
              excluded_text(r.modulus).c_str(), rows_text(r, false).c_str(), secs)};
}

Outcome wkb_full(const ConvergenceReport& r, double secs) {
  const double o = r.full.order;
  return {o >= 0.8 && o <= 1.2 && secs < 900.0,
          fmt("fitted order %.4f (in [0.8, 1.2])%s, errors%s, %.1f s incl. corrector %.2f s (limit 900 s)", o,
              excluded_text(r.full).c_str(), rows_text(r, true).c_str(), secs, r.corrector_runtime)};
}

// 9. large-time exponents -------------------------------------------------

Outcome large_time() {
  ExperimentConfig c;
  c.data.family = "gaussian";
  c.data.lambda = -1.0;
  c.grid = {10.0, 4097};
  const auto rep = decay_study(c);
  const auto& X = rep.at("X_1");
  const auto& v = rep.at("sup_v");
  const auto& a = rep.at("a0_l2");
  const auto& p = rep.at("grad_phi0_lp");
  if (!X.fit || !v.fit || !a.fit) return {false, "decay fit failed: " + X.fit_error + v.fit_error + a.fit_error};
  const bool ok = std::fabs(X.fit->exponent - 2.0 / 3) <= 0.02 && std::fabs(v.fit->exponent + 1.0 / 3) <= 0.02 &&
                  std::fabs(a.fit->exponent) <= 0.01 && p.strictly_decreasing;
  return {ok, fmt("X(t,1) slope %.4f (2/3 +- 0.02), sup|v| slope %.4f (-1/3 +- 0.02), ||a0||_L2 slope %.1e "
                  "(0 +- 0.01), ||grad phi0||_L8 strictly decreasing: %s (%.4g -> %.4g)",
                  X.fit->exponent, v.fit->exponent, a.fit->exponent, p.strictly_decreasing ? "yes" : "no",
                  p.values.front(), p.values.back())};
}

// 10. scaling family -------------------------------------------------------

Outcome scaling_family() {
  const auto g = RadialGrid::uniform(10.0, 4097);
  const auto base = InitialData::compatible(gaussian_amplitude(g), -1.0, 3);
  double worst = 0.0;
  bool all_global = true;
  for (double alpha : {0.1, 1.0, 10.0}) {
    std::vector<cd> A(base.amplitude().data());
    for (auto& x : A) x *= alpha;
    std::vector<double> v(base.velocity().data());
    for (auto& x : v) x *= std::fabs(alpha);
    const auto scaled = InitialData::with_velocity(ComplexProfile(g, std::move(A), 7),
                                                   RealProfile(g, std::move(v), 7), -1.0, 3);
    all_global = all_global && classify(scaled).kind == VerdictKind::Global;
    const std::vector<double> ts{0.1, 0.5, 1.0, 2.0, 5.0};
    for (double R : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const auto tr = integrate_characteristics(scaled, R, ts.back(), 1e-12, ts);
      for (const auto& s : tr.samples) {
        worst = std::max(worst, rel(s.X, explicit_characteristics(base, alpha * s.t, R).X));
      }
    }
  }
  return {all_global && worst <= 1e-8,
          fmt("alpha in {0.1, 1, 10}: all Global: %s; max relative |X_alpha(t,R) - X(alpha t,R)| = %.2e (tol 1e-8)",
              all_global ? "yes" : "no", worst)};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  report(1, "characteristic cross-validation", guarded(characteristics_cross_check));
  report(2, "collapse time", guarded(collapse_time));
  report(3, "classifier soundness", guarded(classifier_soundness));
  report(4, "compatible-phase threshold", guarded(compatible_threshold));
  report(5, "limit-system residuals", guarded(limit_residuals));
  report(6, "solver verification", guarded(solver_verification));
  double secs = 0.0;
  ConvergenceReport conv;
  std::string conv_error;
  try {
    conv = wkb_study(secs);
  } catch (const std::exception& e) {
    conv_error = std::string("exception: ") + e.what();
  }
  if (conv_error.empty()) {
    report(7, "WKB order (modulus)", wkb_modulus(conv, secs));
    report(8, "WKB order (full)", wkb_full(conv, secs));
  } else {
    report(7, "WKB order (modulus)", {false, conv_error});
    report(8, "WKB order (full)", {false, conv_error});
  }
  report(9, "large-time exponents", guarded(large_time));
  report(10, "scaling family", guarded(scaling_family));
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
