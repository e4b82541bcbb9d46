#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "semiwkb/grid.hpp"

namespace semiwkb::numerics {

// Surface area of the unit sphere S^{n-1}.
double sphere_area(int n);

// ---- finite differences -------------------------------------------------

// Behaviour of f under r -> -r, used to place ghost nodes at the origin.
enum class Parity { None, Even, Odd };
enum class Stencil { Centered, Adaptive };

// Fornberg weights for the m-th derivative at x0 on arbitrary nodes xs.
std::vector<double> fd_weights(double x0, std::span<const double> xs, int m);

// 4th-order derivative of order m in {1, 2} on the grid. Five-point stencils;
// with a parity the stencils near r = 0 use mirrored ghost values, otherwise
// they become one-sided. Adaptive picks, among the five-point windows that
// contain the node, the one with the smallest fourth difference, which keeps
// kinks from polluting their neighbours.
std::vector<double> derivative(const RadialGrid& grid, std::span<const double> f, int m,
                               Parity parity = Parity::None,
                               Stencil stencil = Stencil::Centered);
std::vector<std::complex<double>> derivative(const RadialGrid& grid,
                                             std::span<const std::complex<double>> f, int m,
                                             Parity parity = Parity::None);

// ---- quadrature ---------------------------------------------------------

enum class OriginModel {
  Polynomial,  // integrand sampled at r = 0 is used as is
  PowerLaw,    // first cell integrated with a c r^p model fitted to the first two nodes
};

// F(r_i) = int_0^{r_i} f(s) ds. Uniform grids: composite Simpson on panels
// anchored at the origin node (or the first node after a power-law first
// cell), with a cubic half-panel rule for the in-between nodes. Geometric and
// interior grids: trapezoid, first cell [0, r_0] from the power-law model.
std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f,
                                        OriginModel origin = OriginModel::PowerLaw);

double integral(const RadialGrid& grid, std::span<const double> f,
                OriginModel origin = OriginModel::PowerLaw);

// Nodal trapezoid weights. Interior grids treat the missing end points as
// zeros of the integrand (Dirichlet fields), so the weights are all h.
std::vector<double> trapezoid_weights(const RadialGrid& grid);

// int_0^{x} c s^p ds given f(x0)=c x0^p and f(x1)=c x1^p; falls back to the
// trapezoid when the samples do not fit an integrable power law.
double power_law_cell(double x0, double f0, double x1, double f1);

// ---- fitting ------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double rms = 0.0;
  std::vector<double> residuals;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Composite 8-point Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 8) {
  static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                  0.9602898564975363};
  static constexpr double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                  0.1012285362903763};
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (int k = 0; k < 4; ++k) acc += half * w[k] * (f(c - half * x[k]) + f(c + half * x[k]));
  }
  return acc;
}

// ---- root finding -------------------------------------------------------

// Brent's method on [a, b] with f(a) f(b) <= 0.
template <class F>
double brent(F&& f, double a, double b, double fa, double fb, double xtol, int max_iter = 200);

}  // namespace semiwkb::numerics

#include "semiwkb/detail/brent.hpp"
