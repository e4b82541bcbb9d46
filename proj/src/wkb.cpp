#include "semiwkb/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"

namespace semiwkb {

namespace {

using cd = std::complex<double>;
namespace nm = numerics;

// ((1+x)^c - 1)/c, log(1+x) at c = 0.
double growth(double c, double x) {
  const double l = std::log1p(x);
  return c == 0.0 ? l : std::expm1(c * l) / c;
}

// int_a^inf f(R) dR with R = a/s^2; algebraic tails in R^{-n/2} become
// polynomial in s.
template <class F>
double integrate_to_infinity(F&& f, double a, int panels = 16) {
  if (!(a > 0.0)) throw ContractError("integrate_to_infinity: lower limit must be positive");
  return nm::gauss_legendre(
      [&](double s) {
        const double R = a / (s * s);
        return f(R) * 2.0 * a / (s * s * s);
      },
      0.0, 1.0, panels);
}

template <class F>
double integrate_span(F&& f, double a, double b, double cell) {
  if (!(b > a)) return 0.0;
  const int panels = std::clamp(static_cast<int>(std::ceil((b - a) / cell)), 1, 1 << 16);
  return nm::gauss_legendre(f, a, b, panels);
}

CharacteristicMap require_map(const InitialData& data) {
  auto map = CharacteristicMap::for_data(data);
  if (!map) {
    throw ContractError(
        "the limit system has a closed form only for compatible data (lambda < 0, n >= 3) or "
        "force-free data");
  }
  return *map;
}

// R^{n-1} / (X^{n-1} B): the Jacobian of the label map.
double jacobian_ratio(const CharacteristicState& s, int n) {
  if (!(s.B > 0.0)) {
    throw DomainError("characteristics crossed (B <= 0) at label R = " + std::to_string(s.R));
  }
  if (s.R == 0.0) return std::pow(s.B, -n);
  return std::pow(s.R / s.X, n - 1) / s.B;
}

double laplacian_of_phase(const CharacteristicState& s, int n) {
  if (s.R == 0.0) return n * s.Bdot / s.B;
  return s.Bdot / s.B + (n - 1) * s.Xdot / s.X;
}

std::vector<double> radial_laplacian(const RadialGrid& grid, std::span<const double> f, int n) {
  const auto d1 = nm::derivative(grid, f, 1, nm::Parity::Even);
  const auto d2 = nm::derivative(grid, f, 2, nm::Parity::Even);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = grid[i] == 0.0 ? n * d2[i] : d2[i] + (n - 1) * d1[i] / grid[i];
  }
  return out;
}

}  // namespace

RealProfile poisson_radial(const RealProfile& rho, int n, PoissonGauge gauge,
                           std::optional<double> boundary_value) {
  if (n < 1) throw ParameterError("dimension must be at least 1");
  if (gauge == PoissonGauge::Automatic) {
    gauge = n >= 3 ? PoissonGauge::DecayAtInfinity : PoissonGauge::ZeroAtOrigin;
  }
  if (gauge == PoissonGauge::DecayAtInfinity && n <= 2) {
    throw ContractError("a potential decaying at infinity does not exist for n = 1, 2");
  }
  const RadialGrid& grid = rho.grid();
  const std::size_t N = grid.size();
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) f[i] = rho[i] * std::pow(grid[i], n - 1);
  const auto m = nm::cumulative_integral(grid, f, nm::OriginModel::Polynomial);
  std::vector<double> q(N);
  for (std::size_t i = 0; i < N; ++i) {
    q[i] = grid[i] > 0.0 ? m[i] / std::pow(grid[i], n - 1) : 0.0;
  }
  const auto Q = nm::cumulative_integral(grid, q, nm::OriginModel::Polynomial);
  std::vector<double> V(N);
  if (gauge == PoissonGauge::ZeroAtOrigin) {
    // V' = -m / r^{n-1}, so that -(r^{n-1} V')' = r^{n-1} rho.
    for (std::size_t i = 0; i < N; ++i) V[i] = -Q[i];
  } else {
    const double rb = grid.back();
    const double tail = boundary_value ? *boundary_value : m.back() / ((n - 2) * std::pow(rb, n - 2));
    for (std::size_t i = 0; i < N; ++i) V[i] = Q.back() - Q[i] + tail;
  }
  return RealProfile(grid, std::move(V), rho.interpolation_order());
}

// ---- leading order ------------------------------------------------------

LimitSolution::LimitSolution(const InitialData& data) : data_(&data), map_(require_map(data)) {
  const RadialGrid& g = data.grid();
  offset_weight_.assign(g.size(), 0.0);
  if (map_.kind() == CharacteristicMap::Kind::Compatible) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = data.velocity()[i];
      offset_weight_[i] = v > 0.0 ? data.density()[i] * g[i] * g[i] / v : 0.0;
    }
  }
}

double LimitSolution::phase_offset(double t) const {
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  if (map_.kind() == CharacteristicMap::Kind::FreeStreaming) return data_->phase_at(0.0);
  // g(t) = 2|lambda|/(n(n-2)) int_0^inf rho0 r^2/v0 ((1+Ft)^c - 1)/c dr, c = (4-n)/n.
  const int n = data_->n();
  const double c = (4.0 - n) / n;
  const RadialGrid& g = data_->grid();
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = offset_weight_[i] == 0.0 ? 0.0 : offset_weight_[i] * growth(c, map_.F(g[i]) * t);
  }
  double total = nm::integral(g, f, nm::OriginModel::Polynomial);
  if (data_->tail().active()) {
    total += integrate_to_infinity(
        [&](double r) {
          const double v = data_->velocity_at(r);
          return v > 0.0 ? data_->density_at(r) * r * r / v * growth(c, map_.F(r) * t) : 0.0;
        },
        g.back());
  }
  return 2.0 * std::fabs(data_->lambda()) / (n * (n - 2)) * total;
}

std::complex<double> LimitSolution::amplitude(double t, double R) const {
  const auto s = map_.at(t, R);
  return data_->amplitude_at(R) * std::sqrt(jacobian_ratio(s, data_->n()));
}

double LimitSolution::phase_laplacian(double t, double R) const {
  return laplacian_of_phase(map_.at(t, R), data_->n());
}

// phi0(t, X(t,R)) - Phi0(R) - g(t).
double LimitSolution::lift(double t, double R) const {
  if (map_.kind() == CharacteristicMap::Kind::FreeStreaming) {
    const double v = data_->velocity_at(R);
    return 0.5 * v * v * t;
  }
  const int n = data_->n();
  const double c = 4.0 / n - 2.0;
  auto integrand = [&](double s) {
    const double v = data_->velocity_at(s);
    if (v == 0.0) return 0.0;
    return v * std::expm1(c * std::log1p(map_.F(s) * t) + std::log1p(map_.G(s) * t));
  };
  return integrate_span(integrand, 0.0, R, 0.05);
}

double LimitSolution::phase(double t, double R) const {
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  return data_->phase_at(R) + lift(t, R) + phase_offset(t);
}

double LimitSolution::potential(double t, double R) const {
  const int n = data_->n();
  if (n <= 2) throw ContractError("label potential uses the decaying gauge, n >= 3");
  auto integrand = [&](double s) {
    const auto st = map_.at(t, s);
    return data_->mass_at(s) * std::pow(st.X, 1 - n) * st.B;
  };
  const double rb = data_->grid().back();
  double v = 0.0;
  if (R < rb) v += integrate_span(integrand, R, rb, 0.05);
  if (data_->is_compatible()) {
    v += integrate_to_infinity(integrand, std::max(R, rb));
  } else {
    // No velocity beyond the grid, but no density either: the exterior mass
    // is constant and its Eulerian integral is explicit.
    v += data_->mass_at(rb) * std::pow(map_.at(t, std::max(R, rb)).X, 2 - n) / (n - 2);
  }
  return v;
}

WkbFields LimitSolution::at(double t, const RadialGrid& grid) const {
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  const int n = data_->n();
  const RadialGrid& lg = data_->grid();
  const std::size_t N = grid.size();
  const bool compatible = map_.kind() == CharacteristicMap::Kind::Compatible;

  // phi0 - Phi0 - g on the data labels, for interpolation.
  std::optional<RealProfile> lift_profile;
  if (compatible) {
    const double c = 4.0 / n - 2.0;
    std::vector<double> f(lg.size());
    for (std::size_t j = 0; j < lg.size(); ++j) {
      const double v = data_->velocity()[j];
      f[j] = v == 0.0 ? 0.0
                      : v * std::expm1(c * std::log1p(map_.F(lg[j]) * t) +
                                       std::log1p(map_.G(lg[j]) * t));
    }
    lift_profile.emplace(lg, nm::cumulative_integral(lg, f, nm::OriginModel::Polynomial), 7);
  }
  const double offset = phase_offset(t);

  std::vector<cd> a(N);
  std::vector<double> phi(N), rho(N);
  double prev = 0.0;
  double last_label = 0.0;
  double ext_from = lg.back();
  double ext_value = lift_profile ? lift_profile->data().back() : 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double r = grid[i];
    const double R = t == 0.0 ? r : map_.invert(t, r, prev, r);
    prev = R;
    last_label = R;
    const auto s = map_.at(t, R);
    a[i] = data_->amplitude_at(R) * std::sqrt(jacobian_ratio(s, n));
    rho[i] = std::norm(a[i]);
    double lifted;
    if (!compatible) {
      lifted = lift(t, R);
    } else if (R <= lg.back()) {
      lifted = (*lift_profile)(R);
    } else {
      // Labels increase with r, so the tail integral is accumulated.
      ext_value += integrate_span(
          [&](double x) {
            const double v = data_->velocity_at(x);
            return v * std::expm1((4.0 / n - 2.0) * std::log1p(map_.F(x) * t) +
                                  std::log1p(map_.G(x) * t));
          },
          ext_from, R, 0.05);
      ext_from = R;
      lifted = ext_value;
    }
    phi[i] = data_->phase_at(R) + lifted + offset;
  }
  const int order = data_->amplitude().interpolation_order();
  RealProfile density(grid, rho, order);
  std::optional<double> boundary;
  if (n >= 3 && !data_->density_vanishes()) boundary = potential(t, last_label);
  auto V = n >= 3 && data_->density_vanishes()
               ? RealProfile(grid, std::vector<double>(N, 0.0), order)
               : poisson_radial(density, n, PoissonGauge::Automatic, boundary);
  return WkbFields{t, ComplexProfile(grid, std::move(a), order), RealProfile(grid, std::move(phi), order),
                   std::move(V), std::nullopt, std::nullopt};
}

WkbFields leading_order(const InitialData& data, double t, const RadialGrid& grid) {
  return LimitSolution(data).at(t, grid);
}

// ---- residuals ----------------------------------------------------------

LimitResiduals limit_system_residual(const WkbFields& earlier, const WkbFields& later,
                                     const InitialData& data) {
  const RadialGrid& grid = earlier.a0.grid();
  if (!(later.a0.grid() == grid) || !(earlier.phi0.grid() == grid) ||
      !(later.phi0.grid() == grid) || !(earlier.potential.grid() == grid) ||
      !(later.potential.grid() == grid)) {
    throw ContractError("limit_system_residual: snapshots live on different grids");
  }
  const double dt = later.t - earlier.t;
  if (!(dt > 0.0)) throw ParameterError("limit_system_residual: snapshots must be time ordered");
  const int n = data.n();
  const double lambda = data.lambda();
  const std::size_t N = grid.size();

  std::vector<cd> a(N), at(N);
  std::vector<double> phi(N), pt(N), V(N);
  for (std::size_t i = 0; i < N; ++i) {
    a[i] = 0.5 * (earlier.a0[i] + later.a0[i]);
    at[i] = (later.a0[i] - earlier.a0[i]) / dt;
    phi[i] = 0.5 * (earlier.phi0[i] + later.phi0[i]);
    pt[i] = (later.phi0[i] - earlier.phi0[i]) / dt;
    V[i] = 0.5 * (earlier.potential[i] + later.potential[i]);
  }
  const auto ar = nm::derivative(grid, std::span<const cd>(a), 1, nm::Parity::Even);
  const auto pr = nm::derivative(grid, phi, 1, nm::Parity::Even);
  const auto lap_phi = radial_laplacian(grid, phi, n);
  const auto lap_V = radial_laplacian(grid, V, n);

  std::vector<double> tr(N), hj(N), po(N);
  for (std::size_t i = 0; i < N; ++i) {
    tr[i] = std::abs(at[i] + pr[i] * ar[i] + 0.5 * a[i] * lap_phi[i]);
    hj[i] = pt[i] + 0.5 * pr[i] * pr[i] + lambda * V[i];
    po[i] = -std::pow(grid[i], n - 1) * (lap_V[i] + std::norm(a[i]));
  }
  const double tm = 0.5 * (earlier.t + later.t);
  return LimitResiduals{tm, RealProfile(grid, std::move(tr)), RealProfile(grid, std::move(hj)),
                        RealProfile(grid, std::move(po))};
}

// ---- first corrector ----------------------------------------------------

namespace {

struct LabelFrame {
  std::vector<CharacteristicState> states;
  std::vector<cd> a0;
  std::vector<double> lap_phi0;
  std::vector<double> B_R;  // d B / d R
};

class CorrectorSystem {
 public:
  CorrectorSystem(const LimitSolution& sol) : sol_(sol), grid_(sol.data().grid()) {}

  LabelFrame frame(double t) const {
    const std::size_t N = grid_.size();
    const int n = sol_.data().n();
    LabelFrame f;
    f.states.resize(N);
    f.a0.resize(N);
    f.lap_phi0.resize(N);
    std::vector<double> B(N);
    for (std::size_t j = 0; j < N; ++j) {
      const auto s = sol_.map().at(t, grid_[j]);
      f.states[j] = s;
      f.a0[j] = sol_.data().amplitude()[j] * std::sqrt(jacobian_ratio(s, n));
      f.lap_phi0[j] = laplacian_of_phase(s, n);
      B[j] = s.B;
    }
    f.B_R = nm::derivative(grid_, B, 1, nm::Parity::Even);
    return f;
  }

  // Eulerian first derivative and Laplacian from label derivatives.
  template <class T>
  void eulerian(const LabelFrame& f, std::span<const T> v, std::vector<T>& dr,
                std::vector<T>& lap) const {
    const int n = sol_.data().n();
    const auto d1 = derivative_of(v, 1);
    const auto d2 = derivative_of(v, 2);
    const std::size_t N = v.size();
    dr.resize(N);
    lap.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
      const auto& s = f.states[j];
      const T fr = d1[j] / s.B;
      const T frr = (d2[j] - fr * f.B_R[j]) / (s.B * s.B);
      dr[j] = fr;
      lap[j] = s.R == 0.0 ? static_cast<double>(n) * frr : frr + static_cast<double>(n - 1) / s.X * fr;
    }
  }

  // V[f] at the label positions for the decaying gauge, computed in labels.
  std::vector<double> potential(const LabelFrame& f, std::span<const double> src) const {
    const int n = sol_.data().n();
    const std::size_t N = src.size();
    std::vector<double> w(N);
    for (std::size_t j = 0; j < N; ++j) {
      const auto& s = f.states[j];
      w[j] = src[j] * std::pow(s.X, n - 1) * s.B;
    }
    const auto m = nm::cumulative_integral(grid_, w, nm::OriginModel::Polynomial);
    std::vector<double> q(N);
    for (std::size_t j = 0; j < N; ++j) {
      const auto& s = f.states[j];
      q[j] = s.X > 0.0 ? m[j] * std::pow(s.X, 1 - n) * s.B : 0.0;
    }
    const auto Q = nm::cumulative_integral(grid_, q, nm::OriginModel::Polynomial);
    const double Xb = f.states.back().X;
    const double tail = m.back() / ((n - 2) * std::pow(Xb, n - 2));
    std::vector<double> V(N);
    for (std::size_t j = 0; j < N; ++j) V[j] = Q.back() - Q[j] + tail;
    return V;
  }

  void rhs(const LabelFrame& f, std::span<const cd> a1, std::span<const double> phi1,
           std::vector<cd>& da1, std::vector<double>& dphi1) const {
    const std::size_t N = a1.size();
    const int n = sol_.data().n();
    const double lambda = sol_.data().lambda();
    std::vector<cd> a0r, a0lap;
    eulerian(f, std::span<const cd>(f.a0), a0r, a0lap);
    std::vector<double> p1r, p1lap;
    eulerian(f, phi1, p1r, p1lap);
    da1.resize(N);
    dphi1.assign(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      da1[j] = -p1r[j] * a0r[j] - 0.5 * (f.a0[j] * p1lap[j] + a1[j] * f.lap_phi0[j]) +
               cd(0.0, 0.5) * a0lap[j];
    }
    if (lambda != 0.0 && n >= 3) {
      std::vector<double> src(N);
      for (std::size_t j = 0; j < N; ++j) src[j] = 2.0 * std::real(f.a0[j] * std::conj(a1[j]));
      const auto V = potential(f, src);
      for (std::size_t j = 0; j < N; ++j) dphi1[j] = -lambda * V[j];
    }
  }

 private:
  std::vector<double> derivative_of(std::span<const double> v, int m) const {
    return nm::derivative(grid_, v, m, nm::Parity::Even);
  }
  std::vector<cd> derivative_of(std::span<const cd> v, int m) const {
    return nm::derivative(grid_, v, m, nm::Parity::Even);
  }

  const LimitSolution& sol_;
  const RadialGrid& grid_;
};

}  // namespace

std::vector<CorrectorSample> first_corrector(const InitialData& data, double t_end,
                                             const RadialGrid& grid,
                                             const std::optional<ComplexProfile>& A1,
                                             const CorrectorOptions& options) {
  if (!(t_end >= 0.0)) throw ParameterError("first_corrector: t_end must be nonnegative");
  const LimitSolution sol(data);
  const RadialGrid& lg = data.grid();
  const std::size_t N = lg.size();
  const CorrectorSystem sys(sol);

  std::vector<cd> a1(N, cd(0.0, 0.0));
  if (A1) {
    if (A1->grid().back() < lg.back()) {
      throw ContractError("first_corrector: A1 must cover the data grid");
    }
    for (std::size_t j = 0; j < N; ++j) a1[j] = (*A1)(lg[j]);
  }
  std::vector<double> phi1(N, 0.0);

  // Fastest rate in the linear system: the coupling frequency sqrt(2|lambda| |a0|^2)
  // and the expansion rate Delta phi0 (largest at t = 0).
  const LabelFrame f0 = sys.frame(0.0);
  double rate = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    rate = std::max(rate, std::sqrt(2.0 * std::fabs(data.lambda()) * std::norm(f0.a0[j])));
    rate = std::max(rate, std::fabs(f0.lap_phi0[j]));
  }
  double dt = options.dt;
  if (dt == 0.0) dt = rate > 0.0 ? std::min(1e-3, 0.2 / rate) : 1e-3;
  if (!(dt > 0.0)) throw ParameterError("first_corrector: dt must be positive");
  if (dt * rate > 1.0) {
    throw CflViolation("first_corrector: dt = " + std::to_string(dt) + " exceeds the stability limit " +
                       std::to_string(1.0 / rate) + " set by the coupling rate " +
                       std::to_string(rate));
  }

  std::vector<double> outs;
  for (double t : options.output_times) {
    if (t >= 0.0 && t <= t_end) outs.push_back(t);
  }
  outs.push_back(t_end);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

  std::vector<CorrectorSample> samples;
  auto emit = [&](double t) {
    const int order = 7;
    const ComplexProfile ap(lg, a1, order);
    const RealProfile pp(lg, phi1, order);
    std::vector<cd> ao(grid.size());
    std::vector<double> po(grid.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double R = t == 0.0 ? grid[i] : sol.map().invert(t, grid[i], prev, grid[i]);
      prev = R;
      if (R <= lg.back()) {
        ao[i] = ap(R);
        po[i] = pp(R);
      } else {
        ao[i] = 0.0;
        po[i] = phi1.back();
      }
    }
    samples.push_back({t, ComplexProfile(grid, std::move(ao), order),
                       RealProfile(grid, std::move(po), order)});
  };

  double t = 0.0;
  std::vector<cd> k1a, k2a, k3a, k4a, ta(N);
  std::vector<double> k1p, k2p, k3p, k4p, tp(N);
  LabelFrame fa = f0;
  for (double target : outs) {
    const double span = target - t;
    const std::size_t steps = span > 0.0 ? static_cast<std::size_t>(std::ceil(span / dt - 1e-9)) : 0;
    const double h = steps > 0 ? span / steps : 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const LabelFrame fm = sys.frame(t + 0.5 * h);
      const LabelFrame fb = sys.frame(t + h);
      sys.rhs(fa, a1, phi1, k1a, k1p);
      for (std::size_t j = 0; j < N; ++j) {
        ta[j] = a1[j] + 0.5 * h * k1a[j];
        tp[j] = phi1[j] + 0.5 * h * k1p[j];
      }
      sys.rhs(fm, ta, tp, k2a, k2p);
      for (std::size_t j = 0; j < N; ++j) {
        ta[j] = a1[j] + 0.5 * h * k2a[j];
        tp[j] = phi1[j] + 0.5 * h * k2p[j];
      }
      sys.rhs(fm, ta, tp, k3a, k3p);
      for (std::size_t j = 0; j < N; ++j) {
        ta[j] = a1[j] + h * k3a[j];
        tp[j] = phi1[j] + h * k3p[j];
      }
      sys.rhs(fb, ta, tp, k4a, k4p);
      for (std::size_t j = 0; j < N; ++j) {
        a1[j] += h / 6.0 * (k1a[j] + 2.0 * k2a[j] + 2.0 * k3a[j] + k4a[j]);
        phi1[j] += h / 6.0 * (k1p[j] + 2.0 * k2p[j] + 2.0 * k3p[j] + k4p[j]);
      }
      t += h;
      fa = fb;
    }
    t = target;
    emit(t);
  }
  return samples;
}

}  // namespace semiwkb
