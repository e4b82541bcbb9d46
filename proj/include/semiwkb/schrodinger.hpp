#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "semiwkb/grid.hpp"
#include "semiwkb/profile.hpp"
#include "semiwkb/profiles.hpp"

namespace semiwkb {

// Radial wave function in n = 3 on an interior grid r_j = j h, j = 1..M,
// with u = 0 imposed at r_max = (M + 1) h.
struct WaveField {
  double eps = 1.0;
  double lambda = 0.0;
  double t = 0.0;
  RadialGrid grid;
  std::vector<std::complex<double>> values;
};

// Largest step that puts `ppw` points on the shortest local wavelength
// 2 pi eps / max|Phi0'|.
double max_phase_step(double eps, double max_phase_slope, int ppw = 16);

// u = A0 exp(i Phi0 / eps) on `grid` (must come from RadialGrid::interior).
WaveField initial_wavefield(const InitialData& data, double eps, const RadialGrid& grid,
                            int ppw = 16);

// Strang splitting of i eps u_t = -(eps^2/2) Delta u + lambda V_P[|u|^2] u.
// Owns the sine transform and the cached kinetic multipliers.
class StrangStepper {
 public:
  StrangStepper(const RadialGrid& grid, double eps, double lambda, double dt);
  ~StrangStepper();
  StrangStepper(StrangStepper&&) noexcept;
  StrangStepper& operator=(StrangStepper&&) noexcept;

  double dt() const { return dt_; }
  void step(WaveField& u);
  // Exact free flow over `tau` (no potential).
  void kinetic(WaveField& u, double tau) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double dt_;
};

WaveField strang_step(const WaveField& u, double dt);

// V_P[|u|^2] on the wave grid, decaying at infinity.
RealProfile wave_potential(const WaveField& u);

double wave_mass(const WaveField& u);
double wave_energy(const WaveField& u);

struct Observables {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  RealProfile amplitude;
  // eps Im(conj(u) u_r) / |u|^2, set to 0 where `resolved` is false.
  RealProfile current_velocity;
  std::vector<bool> resolved;
};

Observables madelung_observables(const WaveField& u);

struct SeriesSample {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double boundary_mass = 0.0;  // mass in the outer tenth of the domain
};

struct TruncationWarning {
  double t = 0.0;
  double boundary_fraction = 0.0;
};

struct RunOptions {
  std::vector<double> sample_times;    // observables; 0 and t_end are always sampled
  std::vector<double> snapshot_times;  // full fields
  double boundary_threshold = 1e-6;
  int ppw = 16;
};

struct RunResult {
  double dt = 0.0;  // step actually used (t_end divided into whole steps)
  std::size_t steps = 0;
  std::vector<SeriesSample> series;
  std::vector<WaveField> snapshots;
  std::vector<TruncationWarning> warnings;
  WaveField final;
};

// Fixed-step march to t_end. The step is shrunk to divide t_end (and each
// sample time) into whole steps; dt <= 0 selects min(1e-3, eps/10).
RunResult run(const InitialData& data, double eps, double t_end, double dt, const RadialGrid& grid,
              const RunOptions& options = {});
RunResult run(WaveField u0, double t_end, double dt, const RunOptions& options = {});

}  // namespace semiwkb
