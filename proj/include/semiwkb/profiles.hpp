#pragma once

#include <complex>
#include <optional>
#include <string>

#include "semiwkb/grid.hpp"
#include "semiwkb/profile.hpp"

namespace semiwkb {

// C^infinity cutoff: 1 on [0,1], 0 on [2,inf), exp(-1/x) transition in between.
double smooth_cutoff(double r);

// A0(r) = r^kappa psi(r) + r^{-n/2-delta} (1 - psi(r)).
RealProfile sample_amplitude(int kappa, double delta, int n, const RadialGrid& grid);

// scale * exp(-(1 - i chirp) r^2 / 2).
ComplexProfile gaussian_amplitude(const RadialGrid& grid, double scale = 1.0, double chirp = 0.0);

// Indicator of the closed unit ball sampled on the grid (value 1 at r = 1).
RealProfile ball_indicator(const RadialGrid& grid);

// m0(r) = int_0^r rho0(s) s^{n-1} ds.
RealProfile cumulative_mass(const RealProfile& rho0, int n);

struct PhaseVelocity {
  RealProfile phase;
  RealProfile velocity;
};

// v0 = sqrt(2|lambda| m0 / ((n-2) r^{n-2})), Phi0 = int_0^r v0 (constant fixed to 0).
PhaseVelocity compatible_phase(const ComplexProfile& A0, double lambda, int n);
PhaseVelocity compatible_phase(const RealProfile& A0, double lambda, int n);

// C(r) = v0^2 + 2 lambda m0 / ((n-2) r^{n-2}), limit v0(0)^2 at the origin.
RealProfile critical_threshold(const RealProfile& rho0, const RealProfile& v0, double lambda, int n);

// (n-2)/2 v0 + r v0' - |lambda|/(n-2) rho0 r^2 / v0; zero where v0 == 0 and rho0 == 0.
RealProfile v0_identity_residual(const ComplexProfile& A0, const RealProfile& v0, double lambda,
                                 int n);
RealProfile v0_identity_residual(const RealProfile& A0, const RealProfile& v0, double lambda, int n);

// rho0 ~ coefficient * r^{-exponent} beyond the grid.
struct TailModel {
  double coefficient = 0.0;
  double exponent = 0.0;
  bool active() const { return coefficient > 0.0; }
  // int_{a}^{b} c s^{-p} s^{n-1} ds, b may be infinite.
  double mass_between(double a, double b, int n) const;
};

// Power-law fit of rho0 over the last decade-ish of the grid; inactive when the
// profile is compactly supported or does not decay fast enough to be integrable.
TailModel fit_density_tail(const RealProfile& rho0, int n);

struct DataTags {
  std::optional<int> kappa;
  std::optional<double> delta;
  std::string family;
};

// Full initial-data setup. Label-level evaluators work for any R >= 0: below
// the first grid cell they use the local power law of m0, beyond r_max the
// density tail model (compatible data only).
class InitialData {
 public:
  static InitialData compatible(ComplexProfile amplitude, double lambda, int n, DataTags tags = {});
  static InitialData with_velocity(ComplexProfile amplitude, RealProfile velocity, double lambda,
                                   int n, DataTags tags = {});

  int n() const { return n_; }
  double lambda() const { return lambda_; }
  bool is_compatible() const { return compatible_; }
  const DataTags& tags() const { return tags_; }
  const RadialGrid& grid() const { return amplitude_.grid(); }

  const ComplexProfile& amplitude() const { return amplitude_; }
  const RealProfile& phase() const { return phase_; }
  const RealProfile& velocity() const { return velocity_; }
  const RealProfile& velocity_slope() const { return velocity_slope_; }
  const RealProfile& density() const { return density_; }
  const RealProfile& mass() const { return mass_; }
  // Defined for n >= 3 only.
  const std::optional<RealProfile>& threshold() const { return threshold_; }
  const TailModel& tail() const { return tail_; }

  double mass_at(double R) const;
  double density_at(double R) const;
  double velocity_at(double R) const;
  double velocity_slope_at(double R) const;
  double phase_at(double R) const;
  std::complex<double> amplitude_at(double R) const;

  // m0(inf) including the tail model.
  double total_mass() const;
  // Fraction of m0(inf) carried by the tail beyond r_max.
  double truncated_mass_fraction() const;
  bool density_vanishes() const { return mass_.data().back() == 0.0; }

 private:
  InitialData(ComplexProfile amplitude, RealProfile phase, RealProfile velocity, double lambda,
              int n, bool compatible, DataTags tags);

  int n_;
  double lambda_;
  bool compatible_;
  DataTags tags_;
  ComplexProfile amplitude_;
  RealProfile phase_;
  RealProfile velocity_;
  RealProfile velocity_slope_;
  RealProfile density_;
  RealProfile mass_;
  std::optional<RealProfile> threshold_;
  TailModel tail_;
  double origin_exponent_ = 0.0;
};

}  // namespace semiwkb
