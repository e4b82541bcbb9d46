#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semiwkb {

enum class Spacing { Uniform, Geometric };

// Strictly increasing radial nodes on [0, r_max].
//
// uniform():  r_j = j h, j = 0..N-1, h = r_max/(N-1); origin and r_max are nodes.
// interior(): r_j = j h, j = 1..N,   h = r_max/(N+1); Dirichlet interior nodes.
// geometric(): r_j = r_min q^j, last node r_max.
class RadialGrid {
 public:
  static constexpr std::size_t min_points = 16;

  static RadialGrid uniform(double r_max, std::size_t points);
  static RadialGrid interior(double r_max, std::size_t points);
  static RadialGrid geometric(double r_min, double r_max, std::size_t points);

  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }

  double r_max() const { return r_max_; }
  Spacing spacing() const { return spacing_; }
  bool has_origin() const { return nodes_.front() == 0.0; }
  bool ends_at_r_max() const { return nodes_.back() == r_max_; }
  // Uniform spacing h; geometric ratio q.
  double step() const { return step_; }

  // Index i with nodes[i] <= r < nodes[i+1], clamped to [0, size-2].
  std::size_t locate(double r) const;

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.spacing_ == b.spacing_ && a.r_max_ == b.r_max_ && a.nodes_ == b.nodes_;
  }

 private:
  RadialGrid(std::vector<double> nodes, double r_max, Spacing spacing, double step);

  std::vector<double> nodes_;
  double r_max_;
  Spacing spacing_;
  double step_;
};

}  // namespace semiwkb
