#include "semiwkb/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semiwkb/error.hpp"

namespace semiwkb::numerics {

double sphere_area(int n) {
  if (n < 1) throw ParameterError("dimension must be at least 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

std::vector<double> fd_weights(double x0, std::span<const double> xs, int m) {
  const std::size_t np = xs.size();
  if (np == 0 || m < 0 || static_cast<std::size_t>(m) >= np) {
    throw ContractError("fd_weights: need more nodes than the derivative order");
  }
  const int mm = m;
  std::vector<double> c(np * (mm + 1), 0.0);
  auto at = [&](std::size_t i, int k) -> double& { return c[i * (mm + 1) + k]; };
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  at(0, 0) = 1.0;
  for (std::size_t i = 1; i < np; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), mm);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
        }
        at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
      at(j, 0) = c4 * at(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(np);
  for (std::size_t i = 0; i < np; ++i) w[i] = at(i, mm);
  return w;
}

namespace {

constexpr std::size_t kWidth = 5;

struct Extended {
  std::vector<double> x;
  std::vector<double> f;
  std::size_t ghosts = 0;
};

Extended extend(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  Extended e;
  const std::size_t n = grid.size();
  if (parity != Parity::None) {
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    const std::size_t first = grid.has_origin() ? 1 : 0;
    e.ghosts = 2;
    for (std::size_t k = first + e.ghosts; k-- > first;) {
      e.x.push_back(-grid[k]);
      e.f.push_back(sign * f[k]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    e.x.push_back(grid[i]);
    e.f.push_back(f[i]);
  }
  return e;
}

double fourth_difference(const Extended& e, std::size_t s) {
  // Divided difference f[x_s, ..., x_{s+4}].
  double acc = 0.0;
  for (std::size_t a = s; a < s + kWidth; ++a) {
    double den = 1.0;
    for (std::size_t b = s; b < s + kWidth; ++b) {
      if (b != a) den *= e.x[a] - e.x[b];
    }
    acc += e.f[a] / den;
  }
  return std::fabs(acc);
}

std::size_t window_start(const Extended& e, std::size_t idx, Stencil stencil) {
  const std::size_t ne = e.x.size();
  const std::size_t centred = std::min(idx >= 2 ? idx - 2 : 0, ne - kWidth);
  if (stencil == Stencil::Centered) return centred;
  const std::size_t lo = idx >= kWidth - 1 ? idx - (kWidth - 1) : 0;
  const std::size_t hi = std::min(idx, ne - kWidth);
  double best = fourth_difference(e, centred);
  const double centred_value = best;
  std::size_t best_s = centred;
  for (std::size_t s = lo; s <= hi; ++s) {
    const double v = fourth_difference(e, s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  // Stay centred in smooth regions; only switch when the centred window
  // straddles something much rougher than an available one-sided window.
  if (centred_value <= 10.0 * best + 1e-300) return centred;
  return best_s;
}

}  // namespace

std::vector<double> derivative(const RadialGrid& grid, std::span<const double> f, int m,
                               Parity parity, Stencil stencil) {
  if (f.size() != grid.size()) throw ContractError("derivative: length mismatch");
  if (m < 1 || m > 2) throw ParameterError("derivative: order must be 1 or 2");
  const Extended e = extend(grid, f, parity);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t idx = i + e.ghosts;
    const std::size_t s = window_start(e, idx, stencil);
    const auto w = fd_weights(e.x[idx], std::span<const double>(e.x).subspan(s, kWidth), m);
    double acc = 0.0;
    for (std::size_t k = 0; k < kWidth; ++k) acc += w[k] * e.f[s + k];
    out[i] = acc;
  }
  return out;
}

std::vector<std::complex<double>> derivative(const RadialGrid& grid,
                                             std::span<const std::complex<double>> f, int m,
                                             Parity parity) {
  std::vector<double> re(f.size()), im(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  const auto dre = derivative(grid, re, m, parity);
  const auto dim = derivative(grid, im, m, parity);
  std::vector<std::complex<double>> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = {dre[i], dim[i]};
  return out;
}

double power_law_cell(double x0, double f0, double x1, double f1) {
  if (f0 != 0.0 && f1 != 0.0 && (f0 > 0.0) == (f1 > 0.0)) {
    const double p = std::log(f1 / f0) / std::log(x1 / x0);
    if (p > -1.0 + 1e-6 && p < 64.0) return f0 * x0 / (p + 1.0);
  }
  return 0.5 * f0 * x0;
}

namespace {

bool power_law_applies(double f1, double f2) {
  if (f1 == 0.0 || f2 == 0.0 || (f1 > 0.0) != (f2 > 0.0)) return false;
  const double p = std::log2(f2 / f1);
  return p > -1.0 + 1e-6 && p < 64.0;
}

// Cumulative Simpson on uniform nodes x_j = j h, j = 0..N-1 (origin included).
std::vector<double> simpson_cumulative(std::span<const double> f, double h, bool power_law) {
  const std::size_t n = f.size();
  std::vector<double> F(n, 0.0);
  std::size_t start = 0;
  if (power_law && f[0] == 0.0 && power_law_applies(f[1], f[2])) {
    const double p = std::log2(f[2] / f[1]);
    F[1] = f[1] * h / (p + 1.0);
    F[2] = f[2] * 2.0 * h / (p + 1.0);
    start = 2;
  }
  for (std::size_t k = start; k + 2 < n; k += 2) {
    F[k + 2] = F[k] + h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  }
  // Nodes at odd offsets from the panel anchor: panel start + one cell with a cubic rule.
  for (std::size_t j = start + 1; j < n; j += 2) {
    const std::size_t k = j - 1;
    double cell;
    if (k >= 1 && k + 2 < n) {
      cell = h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]);
    } else if (k + 3 < n) {
      cell = h / 24.0 * (9.0 * f[k] + 19.0 * f[k + 1] - 5.0 * f[k + 2] + f[k + 3]);
    } else {
      cell = h / 24.0 * (f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1]);
    }
    F[j] = F[k] + cell;
  }
  return F;
}

}  // namespace

std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f,
                                        OriginModel origin) {
  const std::size_t n = grid.size();
  if (f.size() != n) throw ContractError("cumulative_integral: length mismatch");
  const bool power_law = origin == OriginModel::PowerLaw;
  if (grid.spacing() == Spacing::Uniform) {
    const double h = grid.step();
    if (grid.has_origin()) return simpson_cumulative(f, h, power_law);
    // Interior grid: prepend the origin as a virtual node.
    std::vector<double> g(n + 1);
    std::copy(f.begin(), f.end(), g.begin() + 1);
    if (power_law && power_law_applies(f[0], f[1])) {
      g[0] = 0.0;
    } else {
      g[0] = 3.0 * f[0] - 3.0 * f[1] + f[2];
    }
    auto G = simpson_cumulative(g, h, power_law);
    return std::vector<double>(G.begin() + 1, G.end());
  }
  std::vector<double> F(n);
  F[0] = power_law ? power_law_cell(grid[0], f[0], grid[1], f[1]) : 0.5 * f[0] * grid[0];
  for (std::size_t i = 1; i < n; ++i) {
    F[i] = F[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (f[i] + f[i - 1]);
  }
  return F;
}

double integral(const RadialGrid& grid, std::span<const double> f, OriginModel origin) {
  return cumulative_integral(grid, f, origin).back();
}

std::vector<double> trapezoid_weights(const RadialGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  if (grid.spacing() == Spacing::Uniform && !grid.has_origin()) {
    std::fill(w.begin(), w.end(), grid.step());
    return w;
  }
  // Implicit zero of the integrand at r = 0 when the grid starts above it.
  if (!grid.has_origin()) w[0] += 0.5 * grid[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = grid[i + 1] - grid[i];
    w[i] += 0.5 * d;
    w[i + 1] += 0.5 * d;
  }
  return w;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw ContractError("fit_line: need at least two paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += fit.residuals[i] * fit.residuals[i];
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  fit.slope_stderr = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace semiwkb::numerics
