#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "semiwkb/euler_poisson.hpp"
#include "semiwkb/grid.hpp"
#include "semiwkb/profile.hpp"
#include "semiwkb/profiles.hpp"

namespace semiwkb {

// Boundary condition of -(r^{n-1} V')' = r^{n-1} rho.
enum class PoissonGauge {
  Automatic,        // DecayAtInfinity for n >= 3, ZeroAtOrigin otherwise
  DecayAtInfinity,  // V -> 0 as r -> inf; n >= 3 only
  ZeroAtOrigin,     // V(0) = 0, V' -> 0 as r -> inf
};

// Radial Poisson potential. With DecayAtInfinity the part beyond the last node
// is closed by m(r_max) r_max^{2-n}/(n-2) unless `boundary_value` supplies
// V(r_max) directly.
RealProfile poisson_radial(const RealProfile& rho, int n, PoissonGauge gauge = PoissonGauge::Automatic,
                           std::optional<double> boundary_value = std::nullopt);

struct WkbFields {
  double t = 0.0;
  ComplexProfile a0;
  RealProfile phi0;
  RealProfile potential;
  std::optional<ComplexProfile> a1;
  std::optional<RealProfile> phi1;
};

// Closed-form solution of the limit system along characteristics, for
// compatible data (lambda < 0, n >= 3) and for force-free data.
class LimitSolution {
 public:
  explicit LimitSolution(const InitialData& data);

  const InitialData& data() const { return *data_; }
  const CharacteristicMap& map() const { return map_; }

  // Eulerian (a0, phi0, V_P) at time t on the grid.
  WkbFields at(double t, const RadialGrid& grid) const;

  // phi0(t, 0).
  double phase_offset(double t) const;
  // Lagrangian values at label R.
  std::complex<double> amplitude(double t, double R) const;
  double phase(double t, double R) const;
  // Laplacian of phi0 at X(t, R).
  double phase_laplacian(double t, double R) const;
  // V_P(t, X(t, R)) from the label integral int_R^inf m0 X^{1-n} B dR'.
  double potential(double t, double R) const;

 private:
  double lift(double t, double R) const;

  const InitialData* data_;
  CharacteristicMap map_;
  // Per-label constants on the data grid.
  std::vector<double> offset_weight_;  // rho0 r^2 / v0
};

WkbFields leading_order(const InitialData& data, double t, const RadialGrid& grid);

struct LimitResiduals {
  double t = 0.0;  // midpoint time
  RealProfile transport;
  RealProfile hamilton_jacobi;
  RealProfile poisson;
};

// Discrete residuals of the radial limit system at the midpoint of two
// snapshots on the same grid: centred difference in t, 4th-order differences
// in r. Transport is reported as a modulus.
LimitResiduals limit_system_residual(const WkbFields& earlier, const WkbFields& later,
                                     const InitialData& data);

struct CorrectorOptions {
  double dt = 0.0;  // 0 selects min(1e-3, 0.2 / coupling frequency)
  std::vector<double> output_times;  // t_end is always included
};

struct CorrectorSample {
  double t = 0.0;
  ComplexProfile a1;
  RealProfile phi1;
};

// First corrector (a1, phi1) on [0, t_end], integrated along the
// characteristics of the limit flow on the data grid's labels and sampled on
// `grid`. A1 defaults to zero.
std::vector<CorrectorSample> first_corrector(const InitialData& data, double t_end,
                                             const RadialGrid& grid,
                                             const std::optional<ComplexProfile>& A1 = std::nullopt,
                                             const CorrectorOptions& options = {});

}  // namespace semiwkb
