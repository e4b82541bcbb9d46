#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semiwkb/grid.hpp"
#include "semiwkb/profiles.hpp"

namespace semiwkb {

enum class Scenario { Classify, EvolveEp, WkbEval, SchrodingerRun, Converge, DecayStudy };

std::string to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

// Amplitude families: "sample" (r^kappa core, r^{-n/2-delta} tail),
// "gaussian", "ball", "smooth_ball".
struct DataConfig {
  std::string family = "gaussian";
  int n = 3;
  double lambda = -1.0;
  double scale = 1.0;
  double chirp = 0.0;  // A0 *= exp(i chirp r^2 / 2)
  int kappa = 7;
  double delta = 0.25;
  std::string phase = "compatible";  // or "zero"
  double velocity_scale = 1.0;
};

struct GridConfig {
  double r_max = 20.0;
  std::size_t points = 4097;
};

struct SweepConfig {
  std::vector<double> amplitude_scales{1.0};
  std::vector<double> velocity_scales{1.0};
};

struct DecayConfig {
  double t_min = 1.0;
  double t_max = 1e3;
  std::size_t per_decade = 4;
  double p = 8.0;
  double fit_from = 10.0;  // decay fits use samples with t >= fit_from
  double x_t_min = 1e2;  // range for the X(t, 1) fit
  double x_t_max = 1e4;
};

struct ExperimentConfig {
  std::optional<Scenario> scenario;
  DataConfig data;
  GridConfig grid;                         // data grid, uniform with origin
  std::optional<GridConfig> output_grid;   // Eulerian output, defaults to the data grid
  std::optional<GridConfig> wave_grid;     // Schrodinger interior grid
  std::vector<double> eps;                 // strictly decreasing, in (0, 1]
  double t_end = 0.5;
  double dt = 0.0;                         // 0: min(1e-3, eps/10)
  double dt_over_eps = 0.0;                // > 0: dt = dt_over_eps * eps, overrides dt
  std::vector<double> times;
  bool corrector = false;
  SweepConfig sweep;
  DecayConfig decay;
  std::string output_dir = "out";
  unsigned threads = 0;                    // 0: hardware concurrency
};

// Strict parsing: unknown keys, wrong types and invalid values raise
// ParameterError naming the offending key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Scenario-specific presence checks.
void validate_for(const ExperimentConfig& config, Scenario scenario);

// Canonical serialisation (sorted keys, every field explicit).
std::string canonical_json(const ExperimentConfig& config);
// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a(std::string_view bytes);

// Initial data described by the config; `amplitude_scale` and
// `velocity_scale` multiply A0 and v0 on top of the configured values.
InitialData build_data(const DataConfig& data, const GridConfig& grid, double amplitude_scale = 1.0,
                       double velocity_scale = 1.0);

RadialGrid make_uniform(const GridConfig& g);
RadialGrid make_interior(const GridConfig& g);

}  // namespace semiwkb
