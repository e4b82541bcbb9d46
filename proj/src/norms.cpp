#include "semiwkb/norms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/sine_transform.hpp"

namespace semiwkb {

namespace {

using cd = std::complex<double>;
namespace nm = numerics;

void check_exponent(double p, const char* name) {
  if (!(p >= 1.0)) throw ParameterError(std::string(name) + " must lie in [1, inf]");
}

double weighted_lp(const RadialGrid& grid, std::span<const double> mod, int n, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : mod) m = std::max(m, v);
    return m;
  }
  const auto w = nm::trapezoid_weights(grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    if (mod[i] != 0.0) acc += w[i] * std::pow(mod[i], p) * std::pow(grid[i], n - 1);
  }
  return std::pow(nm::sphere_area(n) * acc, 1.0 / p);
}

std::vector<double> moduli(std::span<const cd> f) {
  std::vector<double> m(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = std::abs(f[i]);
  return m;
}

nm::Parity parity_of(FieldKind kind) {
  return kind == FieldKind::Scalar ? nm::Parity::Even : nm::Parity::Odd;
}

// Radial Laplacian of the lifted field; keeps the parity of the input.
std::vector<cd> laplacian(const RadialGrid& grid, std::span<const cd> f, int n, FieldKind kind) {
  const auto par = parity_of(kind);
  const auto d1 = nm::derivative(grid, f, 1, par);
  const auto d2 = nm::derivative(grid, f, 2, par);
  std::vector<cd> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = grid[i];
    if (kind == FieldKind::Scalar) {
      out[i] = r == 0.0 ? static_cast<double>(n) * d2[i] : d2[i] + static_cast<double>(n - 1) * d1[i] / r;
    } else {
      out[i] = r == 0.0 ? cd(0.0, 0.0)
                        : d2[i] + static_cast<double>(n - 1) * (d1[i] / r - f[i] / (r * r));
    }
  }
  return out;
}

// |grad of the lifted field| pointwise.
std::vector<double> gradient_modulus(const RadialGrid& grid, std::span<const cd> f, int n,
                                     FieldKind kind) {
  const auto d1 = nm::derivative(grid, f, 1, parity_of(kind));
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double g2 = std::norm(d1[i]);
    if (kind == FieldKind::Vector) {
      const double r = grid[i];
      g2 += (n - 1) * (r == 0.0 ? std::norm(d1[i]) : std::norm(f[i] / r));
    }
    out[i] = std::sqrt(g2);
  }
  return out;
}

double binomial(int k, int j) {
  double b = 1.0;
  for (int i = 1; i <= j; ++i) b = b * (k - j + i) / i;
  return b;
}

// ||(-Delta)^{m/2} f||_{L^2} for m = 0..top.
std::vector<double> derivative_ladder(const RadialGrid& grid, std::span<const cd> f, int n,
                                      FieldKind kind, int top) {
  std::vector<double> out;
  std::vector<cd> cur(f.begin(), f.end());
  for (int m = 0; m <= top; m += 2) {
    out.push_back(weighted_lp(grid, moduli(cur), n, 2.0));
    if (m + 1 <= top) out.push_back(weighted_lp(grid, gradient_modulus(grid, cur, n, kind), n, 2.0));
    if (m + 2 <= top) cur = laplacian(grid, cur, n, kind);
  }
  out.resize(top + 1);
  return out;
}

double fd_sobolev(const std::vector<double>& ladder, int k) {
  double acc = 0.0;
  for (int j = 0; j <= k; ++j) acc += binomial(k, j) * ladder[2 + j] * ladder[2 + j];
  return std::sqrt(acc);
}

struct Spectral {
  double hessian;
  double h_sigma;
  double tail_fraction;
};

// w = r f expanded in sin(k_m r), k_m = m pi / L.
std::optional<Spectral> spectral_sobolev(const RadialGrid& grid, std::span<const cd> f, int n,
                                         FieldKind kind, double sigma) {
  if (n != 3 || kind != FieldKind::Scalar || grid.spacing() != Spacing::Uniform) return std::nullopt;
  const bool origin = grid.has_origin();
  const std::size_t first = origin ? 1 : 0;
  const std::size_t last = origin ? grid.size() - 1 : grid.size();  // exclusive
  const double h = grid.step();
  const double L = origin ? grid.back() : grid.back() + h;
  std::vector<cd> w;
  double wmax = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    w.push_back(grid[i] * f[i]);
    wmax = std::max(wmax, std::abs(w.back()));
  }
  const double edge = origin ? std::abs(grid.back() * f[grid.size() - 1]) : std::abs(w.back());
  if (wmax == 0.0) return Spectral{0.0, 0.0, 0.0};
  if (edge > 1e-8 * wmax) return std::nullopt;
  const std::size_t M = w.size();
  SineTransform dst(M);
  dst.apply(std::span<cd>(w));
  const double scale = 1.0 / (M + 1);
  const double measure = 4.0 * std::numbers::pi * 0.5 * L;
  double hess = 0.0, hs = 0.0, tail = 0.0;
  const std::size_t tail_from = M - M / 10;
  for (std::size_t m = 0; m < M; ++m) {
    const double k = (m + 1) * std::numbers::pi / L;
    const double c2 = std::norm(w[m] * scale);
    const double k4 = k * k * k * k;
    hess += c2 * k4;
    const double term = c2 * k4 * std::pow(1.0 + k * k, sigma);
    hs += term;
    if (m >= tail_from) tail += term;
  }
  return Spectral{std::sqrt(measure * hess), std::sqrt(measure * hs), hs > 0.0 ? tail / hs : 0.0};
}

NormReport diagnostics(const RadialGrid& grid, std::span<const cd> f, int n, double p, double q,
                       double s, FieldKind kind, double t) {
  check_exponent(p, "p");
  check_exponent(q, "q");
  if (!(s >= 2.0) || std::isinf(s)) throw ParameterError("smoothness s must be finite and >= 2");
  if (n < 1) throw ParameterError("dimension must be at least 1");
  const std::size_t need = 8 * (static_cast<std::size_t>(std::ceil(s)) + 1);
  if (grid.size() < need) {
    throw ResolutionError("norm_diagnostics: s = " + std::to_string(s) + " needs at least " +
                          std::to_string(need) + " grid points, got " + std::to_string(grid.size()));
  }
  NormReport rep;
  rep.t = t;
  const auto mod = moduli(f);
  for (double e : {2.0, p, std::numeric_limits<double>::infinity()}) {
    rep.lp_norms[e] = weighted_lp(grid, mod, n, e);
  }
  rep.gradient_norm = weighted_lp(grid, gradient_modulus(grid, f, n, kind), n, q);

  const double sigma = s - 2.0;
  if (auto sp = spectral_sobolev(grid, f, n, kind, sigma)) {
    rep.method = SobolevMethod::Spectral;
    rep.hessian_norm = sp->hessian;
    rep.h_s = sp->h_sigma;
    rep.spectral_tail_fraction = sp->tail_fraction;
  } else {
    rep.method = SobolevMethod::FiniteDifference;
    const int lo = static_cast<int>(std::floor(sigma));
    const int hi = static_cast<int>(std::ceil(sigma));
    const auto ladder = derivative_ladder(grid, f, n, kind, 2 + hi);
    rep.hessian_norm = ladder[2];
    const double a = fd_sobolev(ladder, lo);
    if (hi == lo) {
      rep.h_s = a;
    } else {
      const double b = fd_sobolev(ladder, hi);
      const double theta = sigma - lo;
      rep.h_s = a == 0.0 || b == 0.0 ? 0.0 : std::pow(a, 1.0 - theta) * std::pow(b, theta);
    }
  }
  rep.y_norm = rep.lp_norms.at(p) + rep.gradient_norm + rep.h_s;
  return rep;
}

}  // namespace

double lp_norm(const ComplexProfile& f, int n, double p) {
  check_exponent(p, "p");
  return weighted_lp(f.grid(), moduli(f.values()), n, p);
}

double lp_norm(const RealProfile& f, int n, double p) { return lp_norm(to_complex(f), n, p); }

NormReport norm_diagnostics(const ComplexProfile& f, int n, double p, double q, double s,
                            FieldKind kind, double t) {
  return diagnostics(f.grid(), f.values(), n, p, q, s, kind, t);
}

NormReport norm_diagnostics(const RealProfile& f, int n, double p, double q, double s,
                            FieldKind kind, double t) {
  return norm_diagnostics(to_complex(f), n, p, q, s, kind, t);
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> values,
                   double tail_start) {
  if (times.size() != values.size()) throw ContractError("decay_fit: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || times[i] < tail_start) continue;
    if (!(values[i] > 0.0)) {
      throw DomainError("decay_fit: non-positive value at t = " + std::to_string(times[i]));
    }
    x.push_back(std::log(times[i]));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 8) throw ParameterError("decay_fit: need at least 8 samples in the tail");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo < 2.0 * std::log(10.0) - 1e-12) {
    throw ParameterError("decay_fit: samples must span at least two decades in t");
  }
  const auto fit = nm::fit_line(x, y);
  return DecayFit{fit.slope, fit.slope_stderr, fit.intercept, fit.rms, x.size()};
}

}  // namespace semiwkb
