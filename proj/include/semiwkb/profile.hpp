#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semiwkb/error.hpp"
#include "semiwkb/grid.hpp"

namespace semiwkb {

inline bool is_finite_value(double v) { return std::isfinite(v); }
inline bool is_finite_value(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// Samples of a radial function with Lagrange interpolation of a fixed order.
template <class T>
class RadialProfile {
 public:
  using value_type = T;

  RadialProfile(RadialGrid grid, std::vector<T> values, int interpolation_order = 3)
      : grid_(std::move(grid)), values_(std::move(values)), order_(interpolation_order) {
    if (values_.size() != grid_.size()) {
      throw ContractError("profile length " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
    }
    if (order_ < 1 || static_cast<std::size_t>(order_) >= grid_.size()) {
      throw ParameterError("interpolation order out of range");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!is_finite_value(values_[i])) {
        throw DomainError("non-finite profile sample at r = " + std::to_string(grid_[i]));
      }
    }
  }

  template <class F>
  static RadialProfile sample(const RadialGrid& grid, F&& f, int interpolation_order = 3) {
    std::vector<T> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = static_cast<T>(f(grid[i]));
    return RadialProfile(grid, std::move(v), interpolation_order);
  }

  const RadialGrid& grid() const { return grid_; }
  std::span<const T> values() const { return values_; }
  const std::vector<T>& data() const { return values_; }
  T operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  int interpolation_order() const { return order_; }

  // Interpolated value on [0, r_max]; points left of the first node are
  // extrapolated from the first stencil.
  T operator()(double r) const {
    if (!(r >= 0.0) || r > grid_.back() * (1.0 + 1e-12) + 1e-300) {
      throw DomainError("profile evaluated outside its grid at r = " + std::to_string(r));
    }
    const std::size_t n = grid_.size();
    const std::size_t width = static_cast<std::size_t>(order_) + 1;
    const std::size_t cell = grid_.locate(r);
    const std::size_t left = static_cast<std::size_t>((order_ - 1) / 2);
    std::size_t start = cell > left ? cell - left : 0;
    start = std::min(start, n - width);
    T acc{};
    for (std::size_t a = start; a < start + width; ++a) {
      if (grid_[a] == r) return values_[a];
      double w = 1.0;
      for (std::size_t b = start; b < start + width; ++b) {
        if (b != a) w *= (r - grid_[b]) / (grid_[a] - grid_[b]);
      }
      acc += w * values_[a];
    }
    return acc;
  }

  RadialProfile with_order(int order) const { return RadialProfile(grid_, values_, order); }

 private:
  RadialGrid grid_;
  std::vector<T> values_;
  int order_;
};

using RealProfile = RadialProfile<double>;
using ComplexProfile = RadialProfile<std::complex<double>>;

inline ComplexProfile to_complex(const RealProfile& p) {
  std::vector<std::complex<double>> v(p.values().begin(), p.values().end());
  return ComplexProfile(p.grid(), std::move(v), p.interpolation_order());
}

inline RealProfile modulus_squared(const ComplexProfile& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = std::norm(p[i]);
  return RealProfile(p.grid(), std::move(v), p.interpolation_order());
}

}  // namespace semiwkb
