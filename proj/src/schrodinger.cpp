#include "semiwkb/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/sine_transform.hpp"
#include "semiwkb/wkb.hpp"

namespace semiwkb {

namespace nm = numerics;
using cd = std::complex<double>;

namespace {

constexpr double kSphere = 4.0 * std::numbers::pi;

void require_wave_grid(const RadialGrid& grid) {
  if (grid.spacing() != Spacing::Uniform || grid.has_origin() || grid.ends_at_r_max()) {
    throw ContractError("the Schrodinger solver needs an interior grid r_j = j h, j = 1..M");
  }
}

void require_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("eps must lie in (0, 1]");
}

RealProfile density_of(const WaveField& u) {
  std::vector<double> rho(u.values.size());
  for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(u.values[j]);
  return RealProfile(u.grid, std::move(rho));
}

double boundary_mass(const WaveField& u) {
  const std::size_t M = u.values.size();
  const double h = u.grid.step();
  double acc = 0.0;
  for (std::size_t j = M - M / 10; j < M; ++j) {
    acc += std::norm(u.values[j]) * u.grid[j] * u.grid[j];
  }
  return kSphere * h * acc;
}

}  // namespace

double max_phase_step(double eps, double max_phase_slope, int ppw) {
  if (ppw < 1) throw ParameterError("points per wavelength must be positive");
  if (max_phase_slope <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::numbers::pi * eps / (ppw * max_phase_slope);
}

WaveField initial_wavefield(const InitialData& data, double eps, const RadialGrid& grid, int ppw) {
  require_eps(eps);
  require_wave_grid(grid);
  if (data.n() != 3) throw UnsupportedConfiguration("the Schrodinger solver is implemented for n = 3");
  const std::size_t M = grid.size();
  double slope = 0.0;
  std::vector<cd> u(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double r = grid[j];
    slope = std::max(slope, std::fabs(data.velocity_at(r)));
    u[j] = data.amplitude_at(r) * std::polar(1.0, data.phase_at(r) / eps);
  }
  const double limit = max_phase_step(eps, slope, ppw);
  if (grid.step() > limit) {
    const auto need = static_cast<std::size_t>(std::ceil(grid.r_max() / limit)) - 1;
    throw ResolutionError("phase under-resolved at eps = " + std::to_string(eps) + ": step " +
                          std::to_string(grid.step()) + " exceeds " + std::to_string(limit) +
                          "; use at least " + std::to_string(need) + " points on [0, " +
                          std::to_string(grid.r_max()) + "]");
  }
  return WaveField{eps, data.lambda(), 0.0, grid, std::move(u)};
}

// ---- splitting ----------------------------------------------------------

struct StrangStepper::Impl {
  Impl(const RadialGrid& g, double eps, double lambda, double dt)
      : grid(g), eps(eps), lambda(lambda), dst(g.size()), work(g.size()) {
    kinetic_factor = kinetic_multipliers(dt);
  }

  std::vector<cd> kinetic_multipliers(double tau) const {
    const std::size_t M = grid.size();
    const double L = grid.r_max();
    const double norm = 1.0 / (2.0 * static_cast<double>(M + 1));
    std::vector<cd> f(M);
    for (std::size_t m = 0; m < M; ++m) {
      const double k = static_cast<double>(m + 1) * std::numbers::pi / L;
      f[m] = norm * std::polar(1.0, -0.5 * eps * k * k * tau);
    }
    return f;
  }

  void kinetic(std::vector<cd>& u, const std::vector<cd>& factor) {
    const std::size_t M = grid.size();
    for (std::size_t j = 0; j < M; ++j) work[j] = grid[j] * u[j];
    dst.apply(std::span<cd>(work));
    for (std::size_t m = 0; m < M; ++m) work[m] *= factor[m];
    dst.apply(std::span<cd>(work));
    for (std::size_t j = 0; j < M; ++j) u[j] = work[j] / grid[j];
  }

  void potential(std::vector<cd>& u, const RealProfile& V, double tau) const {
    const double c = -lambda * tau / eps;
    for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, c * V[j]);
  }

  RadialGrid grid;
  double eps;
  double lambda;
  SineTransform dst;
  std::vector<cd> work;
  std::vector<cd> kinetic_factor;
  // V_P of the current |u|^2; the potential substep leaves |u| unchanged,
  // so the closing half step of one step serves the next one as well.
  std::optional<RealProfile> cached_potential;
};

StrangStepper::StrangStepper(const RadialGrid& grid, double eps, double lambda, double dt)
    : dt_(dt) {
  require_wave_grid(grid);
  require_eps(eps);
  if (!(dt >= 0.0)) throw ParameterError("time step must be nonnegative");
  impl_ = std::make_unique<Impl>(grid, eps, lambda, dt);
}

StrangStepper::~StrangStepper() = default;
StrangStepper::StrangStepper(StrangStepper&&) noexcept = default;
StrangStepper& StrangStepper::operator=(StrangStepper&&) noexcept = default;

void StrangStepper::step(WaveField& u) {
  if (!(u.grid == impl_->grid) || u.eps != impl_->eps || u.lambda != impl_->lambda) {
    throw ContractError("wave field does not match the stepper configuration");
  }
  if (dt_ == 0.0) return;
  const bool coupled = impl_->lambda != 0.0;
  if (coupled) {
    if (!impl_->cached_potential) impl_->cached_potential = wave_potential(u);
    impl_->potential(u.values, *impl_->cached_potential, 0.5 * dt_);
  }
  impl_->kinetic(u.values, impl_->kinetic_factor);
  if (coupled) {
    impl_->cached_potential = wave_potential(u);
    impl_->potential(u.values, *impl_->cached_potential, 0.5 * dt_);
  }
  u.t += dt_;
}

void StrangStepper::kinetic(WaveField& u, double tau) const {
  impl_->kinetic(u.values, impl_->kinetic_multipliers(tau));
  u.t += tau;
}

WaveField strang_step(const WaveField& u, double dt) {
  WaveField out = u;
  StrangStepper(u.grid, u.eps, u.lambda, dt).step(out);
  return out;
}

RealProfile wave_potential(const WaveField& u) {
  const auto rho = density_of(u);
  bool empty = true;
  for (double x : rho.values()) empty = empty && x == 0.0;
  if (empty) return RealProfile(u.grid, std::vector<double>(u.grid.size(), 0.0));
  return poisson_radial(rho, 3);
}

// ---- observables --------------------------------------------------------

double wave_mass(const WaveField& u) {
  const double h = u.grid.step();
  double acc = 0.0;
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    acc += std::norm(u.values[j]) * u.grid[j] * u.grid[j];
  }
  return kSphere * h * acc;
}

double wave_energy(const WaveField& u) {
  // |grad u|^2 r^2 integrates to |w'|^2 for w = r u; with w = sum c_m sin(k_m r)
  // that is (L/2) sum k_m^2 |c_m|^2, the quantity the kinetic flow conserves.
  const std::size_t M = u.values.size();
  const double h = u.grid.step();
  const double L = u.grid.r_max();
  std::vector<cd> w(M);
  for (std::size_t j = 0; j < M; ++j) w[j] = u.grid[j] * u.values[j];
  SineTransform(M).apply(std::span<cd>(w));
  double kin = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double k = static_cast<double>(m + 1) * std::numbers::pi / L;
    kin += k * k * std::norm(w[m] / static_cast<double>(M + 1));
  }
  kin *= kSphere * 0.5 * u.eps * u.eps * 0.5 * L;
  double pot = 0.0;
  if (u.lambda != 0.0) {
    const auto V = wave_potential(u);
    for (std::size_t j = 0; j < M; ++j) pot += V[j] * std::norm(u.values[j]) * u.grid[j] * u.grid[j];
    pot *= kSphere * 0.5 * u.lambda * h;
  }
  return kin + pot;
}

Observables madelung_observables(const WaveField& u) {
  const std::size_t M = u.values.size();
  std::vector<double> amp(M);
  std::vector<cd> w(M);
  double peak = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    amp[j] = std::abs(u.values[j]);
    peak = std::max(peak, amp[j]);
    w[j] = u.grid[j] * u.values[j];
  }
  // eps Im(conj(u) u_r) / |u|^2 = eps Im(conj(w) w_r) / |w|^2 since w / u is real.
  const auto dw = nm::derivative(u.grid, std::span<const cd>(w), 1, nm::Parity::Odd);
  std::vector<double> vel(M, 0.0);
  std::vector<bool> ok(M, false);
  for (std::size_t j = 0; j < M; ++j) {
    if (peak > 0.0 && amp[j] > 1e-8 * peak) {
      ok[j] = true;
      vel[j] = u.eps * std::imag(std::conj(w[j]) * dw[j]) / std::norm(w[j]);
    }
  }
  return Observables{u.t,
                     wave_mass(u),
                     wave_energy(u),
                     RealProfile(u.grid, std::move(amp)),
                     RealProfile(u.grid, std::move(vel)),
                     std::move(ok)};
}

// ---- driver -------------------------------------------------------------

RunResult run(WaveField u, double t_end, double dt, const RunOptions& options) {
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be nonnegative");
  if (!(dt > 0.0)) dt = std::min(1e-3, u.eps / 10.0);
  const std::size_t steps = t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  if (steps > 0) dt = t_end / static_cast<double>(steps);
  const double t0 = u.t;

  auto step_index = [&](double t) -> std::size_t {
    if (!(t >= 0.0) || t > t_end * (1.0 + 1e-12)) {
      throw ParameterError("requested time " + std::to_string(t) + " outside [0, t_end]");
    }
    return steps == 0 ? 0 : static_cast<std::size_t>(std::llround(t / dt));
  };
  std::vector<bool> sample(steps + 1, false), snap(steps + 1, false);
  sample.front() = sample.back() = true;
  for (double t : options.sample_times) sample[step_index(t)] = true;
  for (double t : options.snapshot_times) snap[step_index(t)] = true;

  RunResult res{dt, steps, {}, {}, {}, u};
  const double mass0 = wave_mass(u);
  auto record = [&](std::size_t k) {
    if (sample[k]) {
      const double bm = boundary_mass(u);
      res.series.push_back(SeriesSample{u.t, wave_mass(u), wave_energy(u), bm});
      if (mass0 > 0.0 && bm > options.boundary_threshold * mass0) {
        res.warnings.push_back(TruncationWarning{u.t, bm / mass0});
      }
    }
    if (snap[k]) res.snapshots.push_back(u);
  };

  StrangStepper stepper(u.grid, u.eps, u.lambda, dt);
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(u);
    u.t = t0 + static_cast<double>(k) * dt;
    record(k);
  }
  res.final = std::move(u);
  return res;
}

RunResult run(const InitialData& data, double eps, double t_end, double dt, const RadialGrid& grid,
              const RunOptions& options) {
  return run(initial_wavefield(data, eps, grid, options.ppw), t_end, dt, options);
}

}  // namespace semiwkb
