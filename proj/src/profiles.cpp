#include "semiwkb/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"

namespace semiwkb {

namespace {

double bump_half(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

std::size_t first_positive_node(const RadialGrid& grid) { return grid.has_origin() ? 1 : 0; }

RealProfile density_of(const ComplexProfile& A0) { return modulus_squared(A0); }

RealProfile density_of(const RealProfile& A0) {
  std::vector<double> v(A0.size());
  for (std::size_t i = 0; i < A0.size(); ++i) v[i] = A0[i] * A0[i];
  return RealProfile(A0.grid(), std::move(v), A0.interpolation_order());
}

PhaseVelocity compatible_from_density(const RealProfile& rho, double lambda, int n) {
  if (!(lambda < 0.0)) {
    throw UnsupportedConfiguration(
        "compatible phase requires lambda < 0; no non-caustic phase exists otherwise");
  }
  if (n < 3) throw UnsupportedConfiguration("compatible phase requires n >= 3");
  const RealProfile m = cumulative_mass(rho, n);
  const RadialGrid& grid = rho.grid();
  std::vector<double> v(grid.size(), 0.0);
  const double k = 2.0 * std::fabs(lambda) / (n - 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    if (r > 0.0) v[i] = std::sqrt(k * m[i] / std::pow(r, n - 2));
  }
  auto phi = numerics::cumulative_integral(grid, v);
  const int order = rho.interpolation_order();
  return {RealProfile(grid, std::move(phi), order), RealProfile(grid, std::move(v), order)};
}

RealProfile identity_residual(const RealProfile& rho, const RealProfile& v0, double lambda, int n) {
  if (n < 3) throw UnsupportedConfiguration("v0 identity is defined for n >= 3");
  if (!(rho.grid() == v0.grid())) throw ContractError("v0_identity_residual: grid mismatch");
  const RadialGrid& grid = v0.grid();
  const auto dv = numerics::derivative(grid, v0.values(), 1, numerics::Parity::Odd,
                                       numerics::Stencil::Adaptive);
  std::vector<double> res(grid.size(), 0.0);
  const double k = std::fabs(lambda) / (n - 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double v = v0[i];
    double source = 0.0;
    const double num = rho[i] * r * r;
    if (num != 0.0) {
      if (v == 0.0) {
        throw DivisionGuardError("v0 vanishes at r = " + std::to_string(r) +
                                 " where the density does not");
      }
      source = k * num / v;
    }
    res[i] = 0.5 * (n - 2) * v + r * dv[i] - source;
  }
  return RealProfile(grid, std::move(res), v0.interpolation_order());
}

}  // namespace

double smooth_cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = bump_half(2.0 - r);
  const double b = bump_half(r - 1.0);
  return a / (a + b);
}

RealProfile sample_amplitude(int kappa, double delta, int n, const RadialGrid& grid) {
  if (kappa < 1) throw ParameterError("sample_amplitude: kappa must be >= 1");
  if (!(delta > 0.0 && delta <= 0.25)) {
    throw ParameterError("sample_amplitude: delta must lie in (0, 1/4]");
  }
  if (n < 3) throw ParameterError("sample_amplitude: n must be >= 3");
  const double decay = -0.5 * n - delta;
  return RealProfile::sample(
      grid,
      [&](double r) {
        if (r == 0.0) return 0.0;
        const double psi = smooth_cutoff(r);
        double a = 0.0;
        if (psi > 0.0) a += std::pow(r, kappa) * psi;
        if (psi < 1.0) a += std::pow(r, decay) * (1.0 - psi);
        return a;
      },
      7);
}

ComplexProfile gaussian_amplitude(const RadialGrid& grid, double scale, double chirp) {
  const std::complex<double> c(-0.5, 0.5 * chirp);
  return ComplexProfile::sample(
      grid, [&](double r) { return scale * std::exp(c * (r * r)); }, 7);
}

RealProfile ball_indicator(const RadialGrid& grid) {
  return RealProfile::sample(grid, [](double r) { return r <= 1.0 ? 1.0 : 0.0; }, 3);
}

RealProfile cumulative_mass(const RealProfile& rho0, int n) {
  if (n < 1) throw ParameterError("dimension must be at least 1");
  const RadialGrid& grid = rho0.grid();
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (rho0[i] < 0.0) {
      throw DomainError("negative density sample at r = " + std::to_string(grid[i]));
    }
    f[i] = rho0[i] * std::pow(grid[i], n - 1);
  }
  auto m = numerics::cumulative_integral(grid, f);
  if (grid.has_origin() && n >= 2 && rho0[0] > 0.0 && grid.size() > 3) {
    // The power-law origin panel is only O(h^2) accurate relative to m0 when
    // rho0(0) > 0; redo the first two nodes by quadrature of the interpolant.
    auto inner = [&](double b) {
      return numerics::gauss_legendre(
          [&](double s) { return rho0(s) * std::pow(s, n - 1); }, 0.0, b, 2);
    };
    const double shift = inner(grid[2]) - m[2];
    m[1] = inner(grid[1]);
    for (std::size_t i = 2; i < m.size(); ++i) m[i] += shift;
  }
  // Simpson's negative half-panel weights can dent the running sum next to a
  // jump in the density; project back onto nondecreasing sequences.
  for (std::size_t i = 1; i < m.size(); ++i) m[i] = std::max(m[i], m[i - 1]);
  if (grid.has_origin()) m[0] = 0.0;
  return RealProfile(grid, std::move(m), rho0.interpolation_order());
}

PhaseVelocity compatible_phase(const ComplexProfile& A0, double lambda, int n) {
  return compatible_from_density(density_of(A0), lambda, n);
}

PhaseVelocity compatible_phase(const RealProfile& A0, double lambda, int n) {
  return compatible_from_density(density_of(A0), lambda, n);
}

RealProfile critical_threshold(const RealProfile& rho0, const RealProfile& v0, double lambda, int n) {
  if (n < 3) throw UnsupportedConfiguration("critical threshold is defined for n >= 3 only");
  if (!(rho0.grid() == v0.grid())) throw ContractError("critical_threshold: grid mismatch");
  const RealProfile m = cumulative_mass(rho0, n);
  const RadialGrid& grid = v0.grid();
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double v2 = v0[i] * v0[i];
    c[i] = r > 0.0 ? v2 + 2.0 * lambda * m[i] / ((n - 2) * std::pow(r, n - 2)) : v2;
  }
  return RealProfile(grid, std::move(c), v0.interpolation_order());
}

RealProfile v0_identity_residual(const ComplexProfile& A0, const RealProfile& v0, double lambda,
                                 int n) {
  return identity_residual(density_of(A0), v0, lambda, n);
}

RealProfile v0_identity_residual(const RealProfile& A0, const RealProfile& v0, double lambda,
                                 int n) {
  return identity_residual(density_of(A0), v0, lambda, n);
}

double TailModel::mass_between(double a, double b, int n) const {
  if (!active() || !(b > a)) return 0.0;
  const double e = n - exponent;
  const double hi = std::isinf(b) ? 0.0 : std::pow(b, e);
  return coefficient * (hi - std::pow(a, e)) / e;
}

TailModel fit_density_tail(const RealProfile& rho0, int n) {
  const RadialGrid& grid = rho0.grid();
  const std::size_t count = std::max<std::size_t>(8, grid.size() / 4);
  const std::size_t first = grid.size() - count;
  std::vector<double> x, y;
  for (std::size_t i = first; i < grid.size(); ++i) {
    if (!(rho0[i] > 0.0) || !(grid[i] > 0.0)) return {};
    x.push_back(std::log(grid[i]));
    y.push_back(std::log(rho0[i]));
  }
  if (x.back() - x.front() < 0.1) return {};
  const auto fit = numerics::fit_line(x, y);
  const double p = -fit.slope;
  if (!(p > n + 1e-3) || fit.rms > 1e-3) return {};
  // Anchor the model at the last node so the density is continuous there.
  return {rho0.data().back() * std::pow(grid.back(), p), p};
}

InitialData::InitialData(ComplexProfile amplitude, RealProfile phase, RealProfile velocity,
                         double lambda, int n, bool compatible, DataTags tags)
    : n_(n),
      lambda_(lambda),
      compatible_(compatible),
      tags_(std::move(tags)),
      amplitude_(std::move(amplitude)),
      phase_(std::move(phase)),
      velocity_(std::move(velocity)),
      velocity_slope_(velocity_),
      density_(modulus_squared(amplitude_)),
      mass_(cumulative_mass(density_, n)) {
  const RadialGrid& grid = amplitude_.grid();
  if (n_ >= 3) threshold_ = critical_threshold(density_, velocity_, lambda_, n_);
  tail_ = compatible_ ? fit_density_tail(density_, n_) : TailModel{};

  const std::size_t i1 = first_positive_node(grid);
  const double m1 = mass_[i1], m2 = mass_[i1 + 1];
  origin_exponent_ = (m1 > 0.0 && m2 > m1) ? std::log(m2 / m1) / std::log(grid[i1 + 1] / grid[i1])
                                           : static_cast<double>(n_);

  std::vector<double> slope(grid.size());
  if (compatible_) {
    const double k = std::fabs(lambda_) / (n_ - 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid[i], v = velocity_[i];
      if (r == 0.0 || v == 0.0) {
        slope[i] = 0.0;
      } else {
        slope[i] = (k * density_[i] * r * r / v - 0.5 * (n_ - 2) * v) / r;
      }
    }
    if (grid.has_origin() && density_[0] > 0.0) {
      slope[0] = std::sqrt(2.0 * std::fabs(lambda_) * density_[0] / (n_ * (n_ - 2)));
    } else if (grid.has_origin() && velocity_[1] > 0.0) {
      slope[0] = (4.0 * slope[1] - slope[2]) / 3.0;
    }
  } else {
    slope = numerics::derivative(grid, velocity_.values(), 1, numerics::Parity::Odd,
                                 numerics::Stencil::Adaptive);
  }
  velocity_slope_ = RealProfile(grid, std::move(slope), velocity_.interpolation_order());

  if (compatible_ && threshold_) {
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      scale = std::max(scale, velocity_[i] * velocity_[i]);
      worst = std::max(worst, std::fabs((*threshold_)[i]));
    }
    if (worst > 1e-8 * std::max(scale, 1e-300) && worst > 1e-300) {
      throw ContractError("compatible data violates C = 0 (max |C| = " + std::to_string(worst) + ")");
    }
  }
}

InitialData InitialData::compatible(ComplexProfile amplitude, double lambda, int n, DataTags tags) {
  auto pv = compatible_phase(amplitude, lambda, n);
  return InitialData(std::move(amplitude), std::move(pv.phase), std::move(pv.velocity), lambda, n,
                     true, std::move(tags));
}

InitialData InitialData::with_velocity(ComplexProfile amplitude, RealProfile velocity, double lambda,
                                       int n, DataTags tags) {
  if (!(amplitude.grid() == velocity.grid())) {
    throw ContractError("amplitude and velocity live on different grids");
  }
  if (n < 1) throw ParameterError("dimension must be at least 1");
  auto phi = numerics::cumulative_integral(velocity.grid(), velocity.values());
  RealProfile phase(velocity.grid(), std::move(phi), velocity.interpolation_order());
  return InitialData(std::move(amplitude), std::move(phase), std::move(velocity), lambda, n, false,
                     std::move(tags));
}

double InitialData::mass_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  if (R == 0.0) return 0.0;
  const RadialGrid& grid = mass_.grid();
  const std::size_t i1 = first_positive_node(grid);
  if (R < grid[i1]) {
    if (grid.has_origin() && n_ >= 2 && density_[0] > 0.0) {
      return numerics::gauss_legendre(
          [&](double s) { return density_(s) * std::pow(s, n_ - 1); }, 0.0, R, 1);
    }
    return mass_[i1] * std::pow(R / grid[i1], origin_exponent_);
  }
  if (R <= grid.back()) return std::max(0.0, mass_(R));
  return mass_.data().back() + tail_.mass_between(grid.back(), R, n_);
}

double InitialData::density_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  const RadialGrid& grid = density_.grid();
  if (R <= grid.back()) return std::max(0.0, density_(R));
  return tail_.active() ? tail_.coefficient * std::pow(R, -tail_.exponent) : 0.0;
}

double InitialData::velocity_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  if (compatible_) {
    if (R == 0.0) return 0.0;
    return std::sqrt(2.0 * std::fabs(lambda_) * mass_at(R) / ((n_ - 2) * std::pow(R, n_ - 2)));
  }
  if (R > velocity_.grid().back()) {
    throw DomainError("velocity requested beyond the data grid for non-compatible data");
  }
  return velocity_(R);
}

double InitialData::velocity_slope_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  if (!compatible_) {
    if (R > velocity_.grid().back()) {
      throw DomainError("velocity slope requested beyond the data grid");
    }
    return velocity_slope_(R);
  }
  const RadialGrid& grid = mass_.grid();
  const std::size_t i1 = first_positive_node(grid);
  const bool dense_core = grid.has_origin() && density_[0] > 0.0;
  if (R == 0.0 && dense_core) {
    return std::sqrt(2.0 * std::fabs(lambda_) * density_[0] / (n_ * (n_ - 2)));
  }
  if (R < grid[i1] && !dense_core) {
    // v ~ R^a with a = (p - n + 2)/2 under the local power law of m0.
    const double a = 0.5 * (origin_exponent_ - n_ + 2);
    if (R > 0.0) return a * velocity_at(R) / R;
    if (a > 1.01) return 0.0;
    if (a < 0.99) return std::numeric_limits<double>::infinity();
    // v'(0) by Richardson on v(r)/r, which is even in r.
    const double h = grid[i1];
    return (4.0 * velocity_at(h) / h - velocity_at(2.0 * h) / (2.0 * h)) / 3.0;
  }
  const double v = velocity_at(R);
  if (v == 0.0) return 0.0;
  const double k = std::fabs(lambda_) / (n_ - 2);
  return (k * density_at(R) * R * R / v - 0.5 * (n_ - 2) * v) / R;
}

double InitialData::phase_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  const RadialGrid& grid = phase_.grid();
  if (R <= grid.back()) return phase_(R);
  if (!compatible_) throw DomainError("phase requested beyond the data grid");
  const double a = grid.back();
  const int panels = std::max(8, static_cast<int>(std::ceil((R - a) / (0.05 * a + 1e-12))));
  return phase_.data().back() +
         numerics::gauss_legendre([&](double s) { return velocity_at(s); }, a, R,
                                  std::min(panels, 4096));
}

std::complex<double> InitialData::amplitude_at(double R) const {
  if (!(R >= 0.0)) throw DomainError("negative label");
  if (R <= amplitude_.grid().back()) return amplitude_(R);
  return {std::sqrt(density_at(R)), 0.0};
}

double InitialData::total_mass() const {
  return mass_.data().back() +
         tail_.mass_between(mass_.grid().back(), std::numeric_limits<double>::infinity(), n_);
}

double InitialData::truncated_mass_fraction() const {
  const double total = total_mass();
  if (total == 0.0) return 0.0;
  return (total - mass_.data().back()) / total;
}

}  // namespace semiwkb
