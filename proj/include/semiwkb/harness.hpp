#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiwkb/config.hpp"
#include "semiwkb/euler_poisson.hpp"
#include "semiwkb/norms.hpp"

namespace semiwkb {

// Runs body(i) for i in [0, count) on up to `threads` workers (0: hardware
// concurrency). Results must be written by index; the first exception in
// index order is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct ConvergenceRow {
  double eps = 0.0;
  double err_modulus = 0.0;
  double err_full = 0.0;
  double runtime = 0.0;  // seconds, not part of the deterministic report
};

struct OrderFit {
  double order = 0.0;
  double slope_stderr = 0.0;
  double rms = 0.0;
  // Largest eps dropped by the pre-asymptotic guard.
  std::optional<double> excluded_eps;
};

// Least-squares slope of log err against log eps. The largest eps is dropped
// when its residual against the fit of the others exceeds 3x that fit's RMS
// (RMS floored at 0.02 in log units), provided three points remain.
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err);

struct GrowthSample {
  double t = 0.0;
  double err_full = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  OrderFit modulus;
  OrderFit full;
  double t_end = 0.0;
  double corrector_runtime = 0.0;
  // err_full in time at the smallest eps, at t_end k/4 for k = 1..4. The
  // quadratic coefficient of a least-squares fit of log err against t, scaled
  // by t_end^2, measures departure from (at most) linear log-error growth.
  double growth_eps = 0.0;
  std::vector<GrowthSample> growth;
  double log_growth_curvature = 0.0;
  bool log_growth_at_most_linear = false;
};

ConvergenceReport converge(const ExperimentConfig& config);

struct ClassifyRow {
  double amplitude_scale = 1.0;
  double velocity_scale = 1.0;
  // "sweep" rows rebuild the compatible velocity of alpha A0 and scale it by
  // beta; "scaling" rows use (alpha A0, |alpha| v0) with v0 from the base data.
  std::string kind = "sweep";
  Verdict verdict;
};

std::vector<ClassifyRow> classify_sweep(const ExperimentConfig& config);

struct DecaySeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> values;
  std::optional<DecayFit> fit;
  std::string fit_error;
  bool strictly_decreasing = false;
};

struct DecayReport {
  std::vector<DecaySeries> series;
  DecaySeries& at(const std::string& name);
  const DecaySeries& at(const std::string& name) const;
};

DecayReport decay_study(const ExperimentConfig& config);

// Runs `scenario` and writes its reports below `out_dir`. Returns the paths
// written.
std::vector<std::filesystem::path> run_scenario(const ExperimentConfig& config, Scenario scenario,
                                                const std::filesystem::path& out_dir,
                                                unsigned threads);

}  // namespace semiwkb
