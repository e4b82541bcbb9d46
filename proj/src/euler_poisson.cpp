#include "semiwkb/euler_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/ode.hpp"

namespace semiwkb {

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Global: return "Global";
    case VerdictKind::FiniteTimeBlowup: return "FiniteTimeBlowup";
    case VerdictKind::NecessaryConditionViolated: return "NecessaryConditionViolated";
    case VerdictKind::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

std::string to_string(BlowupMechanism mechanism) {
  return mechanism == BlowupMechanism::PositionVanishes ? "PositionVanishes"
                                                        : "DeformationVanishes";
}

namespace {

struct Extremum {
  double value = std::numeric_limits<double>::infinity();
  double r = 0.0;
};

Extremum minimum(const RadialGrid& grid, std::span<const double> f, bool skip_origin = false) {
  Extremum e;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (skip_origin && grid[i] == 0.0) continue;
    if (f[i] < e.value) {
      e.value = f[i];
      e.r = grid[i];
    }
  }
  return e;
}

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::fabs(x));
  return m;
}

std::optional<BlowupEvent> earliest_event(const InitialData& data, const ClassifyOptions& opt,
                                          double hint_r) {
  const RadialGrid& grid = data.grid();
  std::vector<double> labels;
  const std::size_t first = grid.has_origin() ? 1 : 0;
  const std::size_t count = grid.size() - first;
  const std::size_t probes = std::min(opt.probe_labels, count);
  for (std::size_t k = 0; k < probes; ++k) {
    const std::size_t i = first + (k * (count - 1)) / std::max<std::size_t>(probes - 1, 1);
    labels.push_back(grid[i]);
  }
  if (hint_r > 0.0) labels.push_back(hint_r);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  std::optional<BlowupEvent> best;
  std::size_t best_k = 0;
  std::vector<double> times(labels.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (auto ev = blowup_time(data, labels[k], opt.horizon)) {
      times[k] = ev->t_c;
      if (!best || ev->t_c < best->t_c) {
        best = ev;
        best_k = k;
      }
    }
  }
  if (!best) return best;
  // Golden-section refinement between the neighbouring probes.
  if (best_k > 0 && best_k + 1 < labels.size() && std::isfinite(times[best_k - 1]) &&
      std::isfinite(times[best_k + 1])) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = labels[best_k - 1], b = labels[best_k + 1];
    auto eval = [&](double R) {
      auto ev = blowup_time(data, R, opt.horizon);
      if (ev && ev->t_c < best->t_c) best = ev;
      return ev ? ev->t_c : std::numeric_limits<double>::infinity();
    };
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 30 && (b - a) > 1e-10 * std::max(1.0, b); ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = eval(x2);
      }
    }
  }
  return best;
}

}  // namespace

Verdict classify(const InitialData& data, const ClassifyOptions& opt) {
  const RadialGrid& grid = data.grid();
  const int n = data.n();
  const double lambda = data.lambda();
  const auto v = data.velocity().values();
  const auto vp = data.velocity_slope().values();
  const double tol = opt.tolerance;
  const double sv = max_abs(v);
  if (grid.has_origin() && std::fabs(v[0]) > 10.0 * tol * std::max(sv, 1.0)) {
    throw ContractError("classify requires v0(0) = 0");
  }

  Verdict verdict;
  const Extremum vmin = minimum(grid, v);
  const bool v_ok = vmin.value >= -tol * sv;

  if (n >= 3 && lambda != 0.0) {
    const RealProfile& C = *data.threshold();
    const auto dC = numerics::derivative(grid, C.values(), 1, numerics::Parity::Even,
                                         numerics::Stencil::Adaptive);
    double scale = 0.0;
    const auto m = data.mass().values();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scale = std::max(scale, v[i] * v[i]);
      if (grid[i] > 0.0) {
        scale = std::max(scale, 2.0 * std::fabs(lambda) * m[i] / ((n - 2) * std::pow(grid[i], n - 2)));
      }
    }
    const double tol_c = tol * scale;
    const Extremum cmin = minimum(grid, C.values());
    const Extremum dcmin = minimum(grid, dC);
    if (lambda < 0.0) {
      if (!v_ok) {
        verdict.kind = VerdictKind::FiniteTimeBlowup;
        verdict.certificate = {"v0 >= 0", vmin.r, vmin.value};
      } else if (cmin.value < -tol_c) {
        verdict.kind = VerdictKind::FiniteTimeBlowup;
        verdict.certificate = {"C >= 0", cmin.r, cmin.value};
      } else if (dcmin.value < -tol_c) {
        verdict.kind = VerdictKind::FiniteTimeBlowup;
        verdict.certificate = {"C' >= 0", dcmin.r, dcmin.value};
      } else {
        verdict.kind = VerdictKind::Global;
        verdict.certificate = {"v0 >= 0, C >= 0, C' >= 0", cmin.r, cmin.value};
      }
    } else {
      if (dcmin.value < -tol_c) {
        verdict.kind = VerdictKind::NecessaryConditionViolated;
        verdict.certificate = {"C' >= 0", dcmin.r, dcmin.value};
      } else {
        verdict.kind = VerdictKind::Undetermined;
        verdict.certificate = {"C' >= 0 holds; no sufficient condition", dcmin.r, dcmin.value};
      }
    }
  } else if (lambda > 0.0) {
    verdict.kind = VerdictKind::Undetermined;
    verdict.certificate = {"no criterion for lambda > 0, n <= 2", 0.0, 0.0};
  } else {
    // lambda < 0 with n <= 2, or no force at all.
    const auto rho = data.density().values();
    double rmax = 0.0, r_at = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] > rmax) {
        rmax = rho[i];
        r_at = grid[i];
      }
    }
    const Extremum dvmin = minimum(grid, vp);
    const double tol_vp = tol * max_abs(vp);
    if (lambda < 0.0 && rmax > 0.0) {
      verdict.kind = VerdictKind::FiniteTimeBlowup;
      verdict.certificate = {"rho0 == 0", r_at, rmax};
    } else if (!v_ok) {
      verdict.kind = VerdictKind::FiniteTimeBlowup;
      verdict.certificate = {"v0 >= 0", vmin.r, vmin.value};
    } else if (dvmin.value < -tol_vp) {
      verdict.kind = VerdictKind::FiniteTimeBlowup;
      verdict.certificate = {"v0' >= 0", dvmin.r, dvmin.value};
    } else {
      verdict.kind = VerdictKind::Global;
      verdict.certificate = {lambda < 0.0 ? "rho0 == 0, v0 >= 0, v0' >= 0" : "v0 >= 0, v0' >= 0",
                             dvmin.r, dvmin.value};
    }
  }

  if (verdict.kind == VerdictKind::FiniteTimeBlowup && opt.estimate_blowup_time) {
    if (auto ev = earliest_event(data, opt, verdict.certificate.r)) {
      verdict.t_c = ev->t_c;
      verdict.mechanism = ev->mechanism;
    }
  }
  return verdict;
}

LargeTimeClass large_time_class(double C, double lambda, int n, double tol) {
  if (n < 3) throw UnsupportedConfiguration("large-time classification needs n >= 3");
  if (C > tol) return {LargeTimeKind::Linear, 1.0, std::sqrt(C)};
  if (C < -tol) return {LargeTimeKind::Collapse, 0.0, 0.0};
  if (lambda < 0.0) return {LargeTimeKind::Sublinear, 2.0 / n, 0.0};
  throw ContractError("C = 0 with lambda >= 0 forces a locally vanishing density; undetermined");
}

std::optional<CharacteristicMap> CharacteristicMap::for_data(const InitialData& data) {
  if (data.is_compatible() && data.lambda() < 0.0 && data.n() >= 3) {
    return CharacteristicMap(data, Kind::Compatible);
  }
  if (data.lambda() == 0.0 || data.density_vanishes()) {
    return CharacteristicMap(data, Kind::FreeStreaming);
  }
  return std::nullopt;
}

double CharacteristicMap::F(double R) const {
  const int n = data_->n();
  if (R == 0.0) return 0.5 * n * data_->velocity_slope_at(0.0);
  return 0.5 * n * data_->velocity_at(R) / R;
}

double CharacteristicMap::G(double R) const {
  const int n = data_->n();
  const double k = std::fabs(data_->lambda()) / (n - 2);
  if (R == 0.0) {
    const double vp = data_->velocity_slope_at(0.0);
    return vp > 0.0 && std::isfinite(vp) ? k * data_->density_at(0.0) / vp : 0.0;
  }
  const double v = data_->velocity_at(R);
  return v > 0.0 ? k * R * data_->density_at(R) / v : 0.0;
}

CharacteristicState CharacteristicMap::at(double t, double R) const {
  CharacteristicState s;
  s.R = R;
  s.t = t;
  if (kind_ == Kind::FreeStreaming) {
    const double v = data_->velocity_at(R);
    const double vp = data_->velocity_slope_at(R);
    s.X = R + v * t;
    s.Xdot = v;
    s.B = 1.0 + vp * t;
    s.Bdot = vp;
    return s;
  }
  const int n = data_->n();
  const double f = F(R), g = G(R);
  const double a = 1.0 + f * t;
  const double e = 2.0 / n;
  const double pa = std::pow(a, e - 1.0);
  s.X = R * a * pa;
  s.Xdot = R > 0.0 ? data_->velocity_at(R) * pa : 0.0;
  s.B = pa * (1.0 + g * t);
  s.Bdot = (e - 1.0) * f * (pa / a) * (1.0 + g * t) + g * pa;
  return s;
}

double CharacteristicMap::invert(double t, double r, double lo, double hi) const {
  if (!(r > 0.0)) return 0.0;
  auto X = [&](double R) { return at(t, R).X; };
  lo = std::max(lo, 0.0);
  if (lo > 0.0 && X(lo) > r) lo = 0.0;
  // Global data have v0 >= 0, hence X(t, R) >= R.
  if (!(hi >= lo)) hi = std::max(r, lo);
  int guard = 0;
  while (X(hi) < r) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw ResolutionError("characteristic inversion failed to bracket");
  }
  const double scale = std::max(1.0, hi);
  while (hi - lo > 1e-7 * scale) {
    const double mid = 0.5 * (lo + hi);
    (X(mid) < r ? lo : hi) = mid;
  }
  double R = 0.5 * (lo + hi);
  for (int k = 0; k < 4; ++k) {
    const CharacteristicState s = at(t, R);
    if (!(s.B > 0.0)) break;
    const double next = R - (s.X - r) / s.B;
    if (!(next >= lo && next <= hi)) break;
    const double step = std::fabs(next - R);
    R = next;
    if (step <= 1e-12 * scale) break;
  }
  return R;
}

CharacteristicState explicit_characteristics(const InitialData& data, double t, double R) {
  if (!(data.is_compatible() && data.lambda() < 0.0 && data.n() >= 3)) {
    throw ContractError("explicit characteristics require compatible data with lambda < 0, n >= 3");
  }
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  if (!(R >= 0.0)) throw ParameterError("label must be nonnegative");
  return CharacteristicMap::for_data(data)->at(t, R);
}

CharacteristicTrajectory integrate_characteristics(const InitialData& data, double R, double t_end,
                                                   double tol,
                                                   std::span<const double> output_times) {
  if (!(R > 0.0)) throw ParameterError("integrate_characteristics: label must be positive");
  if (!(tol > 0.0)) throw ParameterError("integrate_characteristics: tolerance must be positive");
  if (!(t_end >= 0.0)) throw ParameterError("integrate_characteristics: t_end must be >= 0");
  const int n = data.n();
  const double lambda = data.lambda();
  const double m = data.mass_at(R);
  const double mp = data.density_at(R) * std::pow(R, n - 1);
  using State = ode::State<4>;
  auto rhs = [=](double, const State& y) -> State {
    const double X = y[0];
    const double xn1 = n == 1 ? 1.0 : std::pow(X, n - 1);
    const double force = lambda * m / xn1;
    const double dforce = n == 1 ? lambda * mp : lambda * (mp / xn1 - (n - 1) * m * y[2] / (xn1 * X));
    return {y[1], force, y[3], dforce};
  };
  ode::StepControl ctl;
  ctl.rtol = tol;
  ctl.atol = tol;
  ode::DormandPrince<4, decltype(rhs)> solver(rhs, ctl);

  std::vector<double> outs;
  for (double t : output_times) {
    if (t >= 0.0 && t <= t_end) outs.push_back(t);
  }
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  const bool dense = output_times.empty();

  CharacteristicTrajectory traj;
  traj.R = R;
  const State y0{R, data.velocity_at(R), 1.0, data.velocity_slope_at(R)};
  auto record = [&](double t, const State& y) {
    traj.samples.push_back({R, t, y[0], y[1], y[2], y[3]});
  };
  std::size_t next_out = 0;
  if (dense || (!outs.empty() && outs.front() == 0.0)) {
    record(0.0, y0);
    if (!dense) ++next_out;
  }

  auto admissible = [n](const State& y) { return n == 1 || y[0] > 0.0; };
  auto observe = [&](const ode::Step<4>& step) {
    double tc = std::numeric_limits<double>::infinity();
    std::optional<BlowupMechanism> mech;
    auto refine = [&](std::size_t comp) {
      const double h = step.t1 - step.t0;
      auto g = [&](double tau) { return solver.single_step(step.t0, step.y0, step.f0, tau)[comp]; };
      const double tau = numerics::brent(g, 0.0, h, step.y0[comp], step.y1[comp], 1e-12);
      return step.t0 + tau;
    };
    if (n == 1 && step.y1[0] <= 0.0) {
      tc = refine(0);
      mech = BlowupMechanism::PositionVanishes;
    }
    if (step.y1[2] <= 0.0) {
      const double tb = refine(2);
      if (tb < tc - 1e-9) {
        tc = tb;
        mech = BlowupMechanism::DeformationVanishes;
      }
    }
    if (mech) {
      traj.event = BlowupEvent{tc, *mech, true};
      return false;
    }
    if (dense) {
      record(step.t1, step.y1);
    } else {
      while (next_out < outs.size() && outs[next_out] <= step.t1) {
        if (outs[next_out] == step.t1) record(step.t1, step.y1);
        ++next_out;
      }
    }
    if (step.y1[0] < 1e-8 * R && step.y1[1] < 0.0) {
      traj.event = BlowupEvent{step.t1, BlowupMechanism::PositionVanishes, false};
      return false;
    }
    return true;
  };
  const auto res = solver.solve(0.0, y0, t_end, outs, admissible, observe);
  traj.t_reached = res.t;
  traj.steps = res.accepted;
  if (!traj.event) {
    switch (res.outcome) {
      case ode::Outcome::Reached:
      case ode::Outcome::Stopped:
        break;
      case ode::Outcome::StepUnderflow:
      case ode::Outcome::Rejected:
        if (res.y[1] < 0.0) {
          traj.event = BlowupEvent{res.t, BlowupMechanism::PositionVanishes, false};
          break;
        }
        throw ResolutionError("characteristic integration stalled at t = " + std::to_string(res.t));
      case ode::Outcome::MaxSteps:
        throw ResolutionError("characteristic integration exceeded the step budget");
    }
  }
  return traj;
}

std::optional<BlowupEvent> blowup_time(const InitialData& data, double R, double t_max) {
  if (!(t_max > 0.0)) throw ParameterError("blowup_time: t_max must be positive");
  const double outs[] = {t_max};
  return integrate_characteristics(data, R, t_max, 1e-10, outs).event;
}

EulerianFields eulerian_fields(const InitialData& data, double t, const RadialGrid& grid) {
  if (!(t >= 0.0)) throw ParameterError("eulerian_fields: t must be >= 0");
  ClassifyOptions copt;
  copt.estimate_blowup_time = false;
  if (classify(data, copt).kind != VerdictKind::Global) {
    throw ContractError("eulerian_fields requires data classified Global");
  }
  const int n = data.n();
  const double r_data = data.grid().back();
  std::vector<double> rho(grid.size()), vel(grid.size()), labels(grid.size());
  std::vector<bool> extrap(grid.size(), false);

  if (auto map = CharacteristicMap::for_data(data)) {
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid[i];
      const double R = map->invert(t, r, prev, r);
      prev = R;
      const CharacteristicState s = map->at(t, R);
      labels[i] = R;
      extrap[i] = R > r_data;
      vel[i] = s.Xdot;
      if (R == 0.0) {
        rho[i] = data.density_at(0.0) / std::pow(s.B, n);
      } else {
        rho[i] = std::pow(R / s.X, n - 1) * data.density_at(R) / s.B;
      }
    }
  } else {
    // Generic Global data: integrate every data label and invert the sampled map.
    const RadialGrid& lg = data.grid();
    std::vector<double> Rs, Xs, Vs, Bs;
    if (lg.has_origin()) {
      Rs.push_back(0.0);
      Xs.push_back(0.0);
      Vs.push_back(0.0);
      Bs.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    const double outs[] = {t};
    for (std::size_t j = lg.has_origin() ? 1 : 0; j < lg.size(); ++j) {
      const auto tr = integrate_characteristics(data, lg[j], t, 1e-10, outs);
      if (tr.event || tr.samples.empty()) {
        throw ContractError("characteristic broke down for data classified Global");
      }
      const auto& s = tr.samples.back();
      Rs.push_back(lg[j]);
      Xs.push_back(s.X);
      Vs.push_back(s.Xdot);
      Bs.push_back(s.B);
    }
    if (lg.has_origin()) Bs[0] = Bs[1];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid[i];
      if (r >= Xs.back()) {
        extrap[i] = r > Xs.back();
        labels[i] = Rs.back();
        vel[i] = Vs.back();
        rho[i] = extrap[i] ? 0.0 : std::pow(Rs.back() / Xs.back(), n - 1) * data.density_at(Rs.back()) / Bs.back();
        continue;
      }
      const std::size_t k = static_cast<std::size_t>(
          std::upper_bound(Xs.begin(), Xs.end(), r) - Xs.begin() - 1);
      const double w = (r - Xs[k]) / (Xs[k + 1] - Xs[k]);
      const double R = Rs[k] + w * (Rs[k + 1] - Rs[k]);
      const double B = Bs[k] + w * (Bs[k + 1] - Bs[k]);
      labels[i] = R;
      vel[i] = Vs[k] + w * (Vs[k + 1] - Vs[k]);
      rho[i] = R == 0.0 || r == 0.0 ? data.density_at(0.0) / std::pow(B, n)
                                     : std::pow(R / r, n - 1) * data.density_at(R) / B;
    }
  }
  const int order = data.density().interpolation_order();
  return {t, RealProfile(grid, std::move(rho), order), RealProfile(grid, std::move(vel), order),
          std::move(labels), std::move(extrap)};
}

}  // namespace semiwkb
