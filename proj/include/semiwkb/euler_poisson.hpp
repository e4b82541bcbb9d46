#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semiwkb/grid.hpp"
#include "semiwkb/profile.hpp"
#include "semiwkb/profiles.hpp"

namespace semiwkb {

struct CharacteristicState {
  double R = 0.0;
  double t = 0.0;
  double X = 0.0;
  double Xdot = 0.0;
  double B = 1.0;
  double Bdot = 0.0;
};

enum class VerdictKind { Global, FiniteTimeBlowup, NecessaryConditionViolated, Undetermined };
enum class BlowupMechanism { PositionVanishes, DeformationVanishes };

std::string to_string(VerdictKind kind);
std::string to_string(BlowupMechanism mechanism);

struct Certificate {
  std::string condition;
  double r = 0.0;
  double value = 0.0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Undetermined;
  std::optional<double> t_c;
  std::optional<BlowupMechanism> mechanism;
  Certificate certificate;
};

struct ClassifyOptions {
  double tolerance = 1e-9;  // relative to the profile scale
  // Labels probed when estimating the earliest breakdown time.
  std::size_t probe_labels = 160;
  double horizon = 1e6;
  bool estimate_blowup_time = true;
};

Verdict classify(const InitialData& data, const ClassifyOptions& options = {});

enum class LargeTimeKind { Linear, Sublinear, Collapse };

struct LargeTimeClass {
  LargeTimeKind kind;
  double exponent;  // X ~ t^exponent (0 for Collapse)
  double slope;     // sqrt(C) for Linear
};

LargeTimeClass large_time_class(double C_at_R, double lambda, int n, double tol = 1e-12);

// Closed-form characteristic flow: the explicit solution for compatible data
// (lambda < 0, n >= 3) and free streaming when there is no force.
class CharacteristicMap {
 public:
  enum class Kind { Compatible, FreeStreaming };

  // Empty when the data admit neither closed form.
  static std::optional<CharacteristicMap> for_data(const InitialData& data);

  Kind kind() const { return kind_; }
  const InitialData& data() const { return *data_; }

  CharacteristicState at(double t, double R) const;
  // F and G of the explicit solution, B = (1+Ft)^{2/n-1}(1+Gt).
  double F(double R) const;
  double G(double R) const;

  // R with X(t, R) = r; [lo, hi] is an optional warm-start bracket.
  double invert(double t, double r, double lo = 0.0, double hi = -1.0) const;

 private:
  CharacteristicMap(const InitialData& data, Kind kind) : data_(&data), kind_(kind) {}
  const InitialData* data_;
  Kind kind_;
};

// Explicit solution; requires compatible data.
CharacteristicState explicit_characteristics(const InitialData& data, double t, double R);

struct BlowupEvent {
  double t_c;
  BlowupMechanism mechanism;
  // False when collapse was declared from the approach criterion rather than
  // bracketed and refined.
  bool refined;
};

struct CharacteristicTrajectory {
  double R = 0.0;
  std::vector<CharacteristicState> samples;
  std::optional<BlowupEvent> event;
  double t_reached = 0.0;
  std::size_t steps = 0;
};

// Adaptive Dormand-Prince integration of X'' = lambda m0(R)/X^{n-1} together
// with the variational equation for B. With `output_times` the samples are
// taken exactly there; otherwise every accepted step is recorded.
CharacteristicTrajectory integrate_characteristics(const InitialData& data, double R, double t_end,
                                                   double tol = 1e-10,
                                                   std::span<const double> output_times = {});

std::optional<BlowupEvent> blowup_time(const InitialData& data, double R, double t_max);

struct EulerianFields {
  double t = 0.0;
  RealProfile density;
  RealProfile velocity;
  std::vector<double> labels;
  // Output nodes whose label lies beyond the data grid.
  std::vector<bool> extrapolated;
};

EulerianFields eulerian_fields(const InitialData& data, double t, const RadialGrid& grid);

}  // namespace semiwkb
