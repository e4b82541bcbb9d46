#include "semiwkb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semiwkb/error.hpp"

namespace semiwkb {

namespace {

void check_points(std::size_t points) {
  if (points < RadialGrid::min_points) {
    throw ParameterError("radial grid needs at least 16 points, got " + std::to_string(points));
  }
}

void check_radius(double r_max) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw ParameterError("radial grid needs a positive finite r_max");
  }
}

}  // namespace

RadialGrid::RadialGrid(std::vector<double> nodes, double r_max, Spacing spacing, double step)
    : nodes_(std::move(nodes)), r_max_(r_max), spacing_(spacing), step_(step) {}

RadialGrid RadialGrid::uniform(double r_max, std::size_t points) {
  check_points(points);
  check_radius(r_max);
  const double h = r_max / static_cast<double>(points - 1);
  std::vector<double> r(points);
  for (std::size_t j = 0; j < points; ++j) r[j] = static_cast<double>(j) * h;
  r.back() = r_max;
  return RadialGrid(std::move(r), r_max, Spacing::Uniform, h);
}

RadialGrid RadialGrid::interior(double r_max, std::size_t points) {
  check_points(points);
  check_radius(r_max);
  const double h = r_max / static_cast<double>(points + 1);
  std::vector<double> r(points);
  for (std::size_t j = 0; j < points; ++j) r[j] = static_cast<double>(j + 1) * h;
  return RadialGrid(std::move(r), r_max, Spacing::Uniform, h);
}

RadialGrid RadialGrid::geometric(double r_min, double r_max, std::size_t points) {
  check_points(points);
  check_radius(r_max);
  if (!(r_min > 0.0) || !(r_min < r_max)) {
    throw ParameterError("geometric grid needs 0 < r_min < r_max");
  }
  const double q = std::pow(r_max / r_min, 1.0 / static_cast<double>(points - 1));
  std::vector<double> r(points);
  for (std::size_t j = 0; j < points; ++j) r[j] = r_min * std::pow(q, static_cast<double>(j));
  r.front() = r_min;
  r.back() = r_max;
  return RadialGrid(std::move(r), r_max, Spacing::Geometric, q);
}

std::size_t RadialGrid::locate(double r) const {
  const std::size_t last = nodes_.size() - 2;
  if (r <= nodes_.front()) return 0;
  if (r >= nodes_.back()) return last;
  std::size_t i;
  if (spacing_ == Spacing::Uniform) {
    i = static_cast<std::size_t>(std::floor((r - nodes_.front()) / step_));
  } else {
    i = static_cast<std::size_t>(std::floor(std::log(r / nodes_.front()) / std::log(step_)));
  }
  i = std::min(i, last);
  // Guard against rounding at cell boundaries.
  while (i > 0 && nodes_[i] > r) --i;
  while (i < last && nodes_[i + 1] <= r) ++i;
  return i;
}

}  // namespace semiwkb
