#pragma once

#include <map>
#include <optional>
#include <span>

#include "semiwkb/profile.hpp"

namespace semiwkb {

// How a radial profile f(r) is lifted to R^n: the scalar f(|x|) or the
// vector field f(|x|) x/|x| (e.g. a velocity, the gradient of a phase).
enum class FieldKind { Scalar, Vector };

enum class SobolevMethod { Spectral, FiniteDifference };

struct NormReport {
  double t = 0.0;
  std::map<double, double> lp_norms;  // exponent -> value; infinity allowed
  double gradient_norm = 0.0;         // ||grad f||_{L^q}
  double hessian_norm = 0.0;          // ||grad^2 f||_{L^2}
  double h_s = 0.0;                   // ||grad^2 f||_{H^{s-2}}
  double y_norm = 0.0;                // ||f||_{L^p} + ||grad f||_{L^q} + ||grad^2 f||_{H^{s-2}}
  SobolevMethod method = SobolevMethod::FiniteDifference;
  // Share of the spectral H^{s-2} energy in the top tenth of the modes.
  std::optional<double> spectral_tail_fraction;
};

// ||f||_{L^p(R^n)} = (|S^{n-1}| int |f|^p r^{n-1} dr)^{1/p}, trapezoid nodes.
double lp_norm(const RealProfile& f, int n, double p);
double lp_norm(const ComplexProfile& f, int n, double p);

// Y^s_{p,q} diagnostics. Spectral H^{s-2} weights for scalar fields in n = 3
// on uniform grids whose r f vanishes at the outer node; finite differences
// of iterated radial Laplacians otherwise (non-integer s - 2 interpolated
// geometrically between neighbouring integers).
NormReport norm_diagnostics(const RealProfile& f, int n, double p, double q, double s,
                            FieldKind kind = FieldKind::Scalar, double t = 0.0);
NormReport norm_diagnostics(const ComplexProfile& f, int n, double p, double q, double s,
                            FieldKind kind = FieldKind::Scalar, double t = 0.0);

struct DecayFit {
  double exponent = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  std::size_t samples = 0;
};

// Least-squares slope of log value against log t over samples with
// t >= tail_start. Needs >= 8 such samples spanning >= 2 decades.
DecayFit decay_fit(std::span<const double> times, std::span<const double> values,
                   double tail_start = 0.0);

}  // namespace semiwkb
