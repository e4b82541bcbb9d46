#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "semiwkb/error.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/profiles.hpp"

using namespace semiwkb;
namespace nm = semiwkb::numerics;

namespace {

// Ball grids put r = 1 on an even node so Simpson panels end on the jump.
RadialGrid ball_grid() { return RadialGrid::uniform(4.0, 4097); }

std::size_t index_of(const RadialGrid& g, double r) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g[i] - r) < std::fabs(g[best] - r)) best = i;
  }
  return best;
}

double tail_slope(const RadialGrid& g, std::span<const double> f, double r_lo, double r_hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] >= r_lo && g[i] <= r_hi) {
      x.push_back(std::log(g[i]));
      y.push_back(std::log(std::fabs(f[i])));
    }
  }
  return nm::fit_line(x, y).slope;
}

}  // namespace

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(0.3) == 1.0);
  CHECK(smooth_cutoff(1.0) == 1.0);
  CHECK(smooth_cutoff(2.0) == 0.0);
  CHECK(smooth_cutoff(1.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    CHECK(smooth_cutoff(r) <= prev);
    prev = smooth_cutoff(r);
  }
}

TEST_CASE("sample_amplitude values") {
  const auto g = RadialGrid::uniform(4.0, 4097);
  const auto A = sample_amplitude(7, 0.25, 3, g);
  CHECK(A[0] == 0.0);
  CHECK(A[index_of(g, 0.5)] == doctest::Approx(0.0078125).epsilon(1e-14));
  const long double ref = std::pow(3.0L, -1.75L);
  CHECK(A[index_of(g, 3.0)] == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
  CHECK(static_cast<double>(ref) == doctest::Approx(0.14624).epsilon(1e-4));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(A[i] > 0.0);

  CHECK_THROWS_AS(sample_amplitude(0, 0.25, 3, g), ParameterError);
  CHECK_THROWS_AS(sample_amplitude(7, 0.3, 3, g), ParameterError);
  CHECK_THROWS_AS(sample_amplitude(7, 0.0, 3, g), ParameterError);
  CHECK_THROWS_AS(sample_amplitude(7, 0.25, 2, g), ParameterError);
}

TEST_CASE("sample family tail exponents") {
  const auto g = RadialGrid::geometric(1e-3, 1e6, 6001);
  for (int n : {3, 5}) {
    for (double delta : {0.1, 0.25}) {
      const auto A = sample_amplitude(4, delta, n, g);
      const double sa = tail_slope(g, A.values(), 1e4, 1e6);
      CHECK(sa >= -0.5 * n - delta - 0.05);
      CHECK(sa <= -0.5 * n - delta + 0.05);
      const auto pv = compatible_phase(A, -1.0, n);
      const double sv = tail_slope(g, pv.velocity.values(), 1e4, 1e6);
      CHECK(sv >= -0.5 * n + 1 - 0.05);
      CHECK(sv <= -0.5 * n + 1 + 0.05);
    }
  }
}

TEST_CASE("cumulative_mass examples") {
  const auto g = ball_grid();
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto mz = cumulative_mass(zero, 3);
  for (double m : mz.values()) CHECK(m == 0.0);

  const auto ball = ball_indicator(g);
  const auto m = cumulative_mass(ball, 3);
  CHECK(m[index_of(g, 1.0)] == doctest::Approx(1.0 / 3).epsilon(1e-13));
  // A density jump costs O(h) beyond it.
  CHECK(std::fabs(m[index_of(g, 2.0)] - 1.0 / 3) <= g.step());
  CHECK(m[0] == 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(m[i] >= m[i - 1]);

  auto bad = ball.data();
  bad[10] = -1e-3;
  CHECK_THROWS_AS(cumulative_mass(RealProfile(g, bad), 3), DomainError);
}

TEST_CASE("cumulative_mass against the closed form for a Gaussian") {
  const auto g = RadialGrid::uniform(8.0, 4097);
  const auto rho = RealProfile::sample(g, [](double r) { return std::exp(-r * r); });
  const auto m = cumulative_mass(rho, 3);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    const double r = g[i];
    const double exact = std::sqrt(std::numbers::pi) / 4 * std::erf(r) - 0.5 * r * std::exp(-r * r);
    CHECK(m[i] == doctest::Approx(exact).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("cumulative_mass is nondecreasing and flat outside the support") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = RadialGrid::uniform(5.0, 257);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> rho(g.size(), 0.0);
    const double support = 1.0 + 3.0 * u(rng);
    for (std::size_t i = 0; i < g.size(); ++i) rho[i] = g[i] < support ? u(rng) : 0.0;
    const auto m = cumulative_mass(RealProfile(g, rho), 1 + trial % 4);
    for (std::size_t i = 1; i < g.size(); ++i) {
      CHECK(m[i] >= m[i - 1]);
      if (g[i - 1] > support + 2 * g.step()) CHECK(m[i] == m[i - 1]);
    }
  }
}

TEST_CASE("compatible_phase examples") {
  const auto g = ball_grid();
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto z = compatible_phase(zero, -1.0, 3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(z.phase[i] == 0.0);
    CHECK(z.velocity[i] == 0.0);
  }

  const auto pv = compatible_phase(ball_indicator(g), -1.0, 3);
  CHECK(pv.velocity[0] == 0.0);
  CHECK(pv.velocity[index_of(g, 1.0)] == doctest::Approx(std::sqrt(2.0 / 3)).epsilon(1e-13));
  CHECK(pv.velocity[index_of(g, 0.5)] == doctest::Approx(0.5 * std::sqrt(2.0 / 3)).epsilon(1e-13));
  CHECK(pv.velocity[index_of(g, 2.0)] == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(2 * g.step()));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(pv.phase[i] >= pv.phase[i - 1]);
  // Phi0 = r^2 sqrt(2/3)/2 inside the ball.
  CHECK(pv.phase[index_of(g, 1.0)] == doctest::Approx(0.5 * std::sqrt(2.0 / 3)).epsilon(1e-12));

  CHECK_THROWS_AS(compatible_phase(ball_indicator(g), 0.0, 3), UnsupportedConfiguration);
  CHECK_THROWS_AS(compatible_phase(ball_indicator(g), 1.0, 3), UnsupportedConfiguration);
}

TEST_CASE("critical_threshold examples") {
  const auto g = ball_grid();
  const auto ball = ball_indicator(g);
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto C = critical_threshold(ball, zero, -1.0, 3);
  CHECK(C[index_of(g, 1.0)] == doctest::Approx(-2.0 / 3).epsilon(1e-13));

  const auto v = RealProfile::sample(g, [](double r) { return std::tanh(r); });
  const auto Cv = critical_threshold(zero, v, -1.0, 3);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(Cv[i] == doctest::Approx(v[i] * v[i]));

  CHECK_THROWS_AS(critical_threshold(ball, zero, -1.0, 2), UnsupportedConfiguration);
}

TEST_CASE("compatible phase has vanishing threshold on 2048+ point grids") {
  for (std::size_t pts : {2049, 4096}) {
    const auto g = RadialGrid::uniform(10.0, pts);
    for (int n : {3, 4, 6}) {
      const auto A = gaussian_amplitude(g, 1.3, 0.7);
      const auto pv = compatible_phase(A, -2.0, n);
      const auto C = critical_threshold(modulus_squared(A), pv.velocity, -2.0, n);
      double worst = 0.0;
      for (double c : C.values()) worst = std::max(worst, std::fabs(c));
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("v0_identity_residual examples") {
  // Symbolic compatible velocity of the ball, 4096 nodes, no node on the jump.
  const auto g = RadialGrid::uniform(10.0, 4096);
  const auto ball = RealProfile::sample(g, [](double r) { return r < 1.0 ? 1.0 : 0.0; });
  const auto v = RealProfile::sample(g, [](double r) {
    const double m = std::pow(std::min(r, 1.0), 3) / 3;
    return r > 0 ? std::sqrt(2 * m / r) : 0.0;
  });
  const auto res = v0_identity_residual(ball, v, -1.0, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] >= 0.1) worst = std::max(worst, std::fabs(res[i]));
  }
  CHECK(worst <= 1e-6);

  const auto g4 = RadialGrid::uniform(3.0, 64);
  const auto zero = RealProfile::sample(g4, [](double) { return 0.0; });
  const auto lin = RealProfile::sample(g4, [](double r) { return r; });
  const auto r2 = v0_identity_residual(zero, lin, -1.0, 4);
  for (std::size_t i = 0; i < g4.size(); ++i) CHECK(r2[i] == doctest::Approx(2.0 * g4[i]).epsilon(1e-12));
  const auto rz = v0_identity_residual(zero, zero, -1.0, 3);
  for (double x : rz.values()) CHECK(x == 0.0);

  const auto one = RealProfile::sample(g4, [](double) { return 1.0; });
  CHECK_THROWS_AS(v0_identity_residual(one, zero, -1.0, 3), DivisionGuardError);
}

TEST_CASE("v0 identity residual of computed compatible phases converges at fourth order") {
  std::vector<double> errs;
  for (std::size_t pts : {513, 1025, 2049}) {
    const auto g = RadialGrid::uniform(10.0, pts);
    const auto A = gaussian_amplitude(g);
    const auto pv = compatible_phase(A, -1.0, 3);
    const auto res = v0_identity_residual(A, pv.velocity, -1.0, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] >= 0.1 && g[i] <= 8.0) worst = std::max(worst, std::fabs(res[i]));
    }
    errs.push_back(worst);
  }
  CHECK(std::log2(errs[0] / errs[1]) > 3.5);
  CHECK(std::log2(errs[1] / errs[2]) > 3.5);
  CHECK(errs[2] < 1e-8);
}

TEST_CASE("InitialData invariants") {
  const auto g = RadialGrid::uniform(40.0, 8192);
  const auto data = InitialData::compatible(to_complex(sample_amplitude(7, 0.25, 3, g)), -1.0, 3,
                                            {7, 0.25, "sample"});
  const auto m = data.mass().values();
  CHECK(m[0] == 0.0);
  for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i] >= m[i - 1]);
  double worst = 0.0;
  for (double c : data.threshold()->values()) worst = std::max(worst, std::fabs(c));
  CHECK(worst <= 1e-8);
  CHECK(data.tail().active());
  CHECK(data.tail().exponent == doctest::Approx(3.5).epsilon(1e-6));
  CHECK(data.truncated_mass_fraction() > 1e-4);
  CHECK(data.mass_at(60.0) > data.mass_at(40.0));
  // Label evaluators agree with the nodal profiles.
  CHECK(data.velocity_at(g[1000]) == doctest::Approx(data.velocity()[1000]).epsilon(1e-13));
  CHECK(data.velocity_slope_at(g[1000]) ==
        doctest::Approx(data.velocity_slope()[1000]).epsilon(1e-10));

  const auto gg = RadialGrid::uniform(10.0, 2049);
  const auto gauss = InitialData::compatible(gaussian_amplitude(gg), -1.0, 3);
  CHECK_FALSE(gauss.tail().active());
  CHECK(gauss.total_mass() == doctest::Approx(std::sqrt(std::numbers::pi) / 4).epsilon(1e-10));
  // v0'(0) = sqrt(2 |lambda| rho0(0) / (n (n-2))).
  CHECK(gauss.velocity_slope_at(0.0) == doctest::Approx(std::sqrt(2.0 / 3)).epsilon(1e-7));
  CHECK(gauss.velocity_slope_at(1e-6) == doctest::Approx(std::sqrt(2.0 / 3)).epsilon(1e-6));
}
