#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "semiwkb/error.hpp"
#include "semiwkb/euler_poisson.hpp"
#include "semiwkb/numerics.hpp"
#include "semiwkb/wkb.hpp"

using namespace semiwkb;
using cd = std::complex<double>;

namespace {

InitialData gaussian(int n = 3, double r_max = 20.0, std::size_t pts = 8193, double chirp = 0.0) {
  const auto g = RadialGrid::uniform(r_max, pts);
  return InitialData::compatible(gaussian_amplitude(g, 1.0, chirp), -1.0, n);
}

std::size_t index_of(const RadialGrid& g, double r) {
  return static_cast<std::size_t>(std::lround(r / g.step()));
}

double max_on(const RealProfile& p, double lo, double hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p.grid()[i];
    if (r >= lo && r <= hi) m = std::max(m, std::fabs(p[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("poisson_radial examples") {
  const auto g = RadialGrid::uniform(4.0, 4097);
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto vz = poisson_radial(zero, 3);
  for (double v : vz.values()) CHECK(v == 0.0);

  // The jump of the indicator limits nodal accuracy to O(h).
  const double h = g.step();
  const auto V = poisson_radial(ball_indicator(g), 3);
  CHECK(std::fabs(V[index_of(g, 1.0)] - 1.0 / 3) <= h);
  CHECK(std::fabs(V[0] - 0.5) <= h);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g[i];
    const double exact = r <= 1.0 ? 0.5 - r * r / 6 : 1.0 / (3 * r);
    worst = std::max(worst, std::fabs(V[i] - exact));
  }
  CHECK(worst <= h);
  const auto g2 = RadialGrid::uniform(4.0, 8193);
  const auto V2 = poisson_radial(ball_indicator(g2), 3);
  CHECK(std::fabs(V2[0] - 0.5) <= 0.6 * std::fabs(V[0] - 0.5));

  // Smooth density: V = sqrt(pi)/4 erf(r)/r for rho = exp(-r^2).
  const auto gs = RadialGrid::uniform(8.0, 2049);
  const auto Vs = poisson_radial(RealProfile::sample(gs, [](double r) { return std::exp(-r * r); }), 3);
  for (std::size_t i = 0; i < gs.size(); i += 16) {
    const double r = gs[i];
    const double exact = r == 0.0 ? 0.5 : std::sqrt(std::numbers::pi) / 4 * std::erf(r) / r;
    CHECK(Vs[i] == doctest::Approx(exact).epsilon(1e-9));
  }
  CHECK_THROWS_AS(poisson_radial(zero, 2, PoissonGauge::DecayAtInfinity), ContractError);

  // n = 1, V(0) = 0 and -(V')' = rho: V = -r^2/2 inside the slab.
  const auto V1 = poisson_radial(ball_indicator(g), 1);
  CHECK(V1[0] == 0.0);
  CHECK(V1[index_of(g, 0.5)] == doctest::Approx(-0.125).epsilon(1e-10));
}

TEST_CASE("poisson residual of smooth densities") {
  for (int n : {3, 4, 5}) {
    const auto g = RadialGrid::uniform(12.0, 4097);
    const auto rho = RealProfile::sample(g, [](double r) { return std::exp(-r * r); });
    const auto V = poisson_radial(rho, n);
    const auto d1 = numerics::derivative(g, V.values(), 1, numerics::Parity::Even);
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) q[i] = std::pow(g[i], n - 1) * d1[i];
    const auto dq = numerics::derivative(
        g, q, 1, (n - 1) % 2 == 0 ? numerics::Parity::Odd : numerics::Parity::Even);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double src = std::pow(g[i], n - 1) * rho[i];
      scale = std::max(scale, src);
      worst = std::max(worst, std::fabs(-dq[i] - src));
    }
    CHECK(worst <= 1e-6 * scale);
  }
}

TEST_CASE("leading_order at t = 0 reproduces the data") {
  const auto data = gaussian(3, 10.0, 2049);
  const auto f = leading_order(data, 0.0, data.grid());
  const auto V = poisson_radial(data.density(), 3);
  for (std::size_t i = 0; i < data.grid().size(); ++i) {
    CHECK(std::abs(f.a0[i] - data.amplitude()[i]) <= 1e-14);
    CHECK(f.phi0[i] == doctest::Approx(data.phase()[i]).epsilon(1e-13).scale(1e-13));
    CHECK(f.potential[i] == doctest::Approx(V[i]).epsilon(1e-9));
  }
  CHECK(LimitSolution(data).phase_offset(0.0) == 0.0);
  CHECK_THROWS_AS(leading_order(data, -1.0, data.grid()), ParameterError);
}

TEST_CASE("leading_order conserves the L2 norm") {
  const auto data = gaussian();
  const auto out = RadialGrid::uniform(60.0, 12001);
  auto l2 = [&](const ComplexProfile& a) {
    std::vector<double> f(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) f[i] = std::norm(a[i]) * out[i] * out[i];
    return numerics::integral(out, f);
  };
  const double m0 = data.total_mass();
  for (double t : {0.5, 2.0, 5.0}) {
    CHECK(l2(leading_order(data, t, out).a0) == doctest::Approx(m0).epsilon(1e-8));
  }
}

TEST_CASE("limit system residuals on compatible Gaussian data") {
  const auto data = gaussian();
  const auto out = RadialGrid::uniform(10.0, 8192);
  const LimitSolution sol(data);
  for (double t : {0.5, 1.0}) {
    const double dt = 1e-4;
    const auto res = limit_system_residual(sol.at(t - dt / 2, out), sol.at(t + dt / 2, out), data);
    CHECK(res.t == doctest::Approx(t));
    CHECK(max_on(res.transport, 0.2, 10.0) <= 1e-5);
    CHECK(max_on(res.hamilton_jacobi, 0.2, 10.0) <= 1e-5);
    CHECK(max_on(res.poisson, 0.2, 10.0) <= 1e-5);
  }

  // Detector sensitivity: a 1% phase error is visible.
  auto a = sol.at(1.0 - 5e-5, out);
  auto b = sol.at(1.0 + 5e-5, out);
  std::vector<double> pa(a.phi0.data()), pb(b.phi0.data());
  for (auto& x : pa) x *= 1.01;
  for (auto& x : pb) x *= 1.01;
  a.phi0 = RealProfile(out, pa);
  b.phi0 = RealProfile(out, pb);
  CHECK(max_on(limit_system_residual(a, b, data).hamilton_jacobi, 0.2, 10.0) > 1e-3);

  CHECK_THROWS_AS(limit_system_residual(b, a, data), ParameterError);
  const auto other = sol.at(1.0, RadialGrid::uniform(10.0, 4096));
  CHECK_THROWS_AS(limit_system_residual(a, other, data), ContractError);
}

TEST_CASE("stationary vacuum has vanishing residuals") {
  const auto g = RadialGrid::uniform(5.0, 257);
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto data = InitialData::with_velocity(to_complex(zero), zero, -1.0, 3);
  const LimitSolution sol(data);
  const auto res = limit_system_residual(sol.at(0.0, g), sol.at(1.0, g), data);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(res.transport[i] == 0.0);
    CHECK(res.hamilton_jacobi[i] == 0.0);
    CHECK(res.poisson[i] == 0.0);
  }
}

TEST_CASE("leading_order agrees with the Euler-Poisson fields") {
  const auto data = gaussian();
  const auto out = RadialGrid::uniform(15.0, 6001);
  for (double t : {0.7, 3.0}) {
    const auto w = leading_order(data, t, out);
    const auto e = eulerian_fields(data, t, out);
    const auto dphi = numerics::derivative(out, w.phi0.values(), 1, numerics::Parity::Even);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(std::fabs(std::norm(w.a0[i]) - e.density[i]) <= 1e-8);
      CHECK(std::fabs(dphi[i] - e.velocity[i]) <= 1e-8);
    }
  }
}

TEST_CASE("phase offset g(t) matches time integration of the potential at the origin") {
  for (int n : {3, 4, 5}) {
    const auto data = gaussian(n, 20.0, 4097);
    const LimitSolution sol(data);
    for (double t : {0.5, 2.0}) {
      // d/dt phi0(t, 0) = |lambda| V_P(t, 0) because v(t, 0) = 0.
      const double direct = std::fabs(data.lambda()) *
                            numerics::gauss_legendre([&](double s) { return sol.potential(s, 0.0); },
                                                     0.0, t, 4);
      CHECK(sol.phase_offset(t) == doctest::Approx(direct).epsilon(1e-6));
    }
  }
}

TEST_CASE("Lagrangian phase matches the grid evaluation") {
  const auto data = gaussian(3, 20.0, 4097);
  const LimitSolution sol(data);
  const auto out = RadialGrid::uniform(10.0, 101);
  const auto f = sol.at(2.0, out);
  for (std::size_t i = 0; i < out.size(); i += 10) {
    const double R = sol.map().invert(2.0, out[i]);
    CHECK(sol.phase(2.0, R) == doctest::Approx(f.phi0[i]).epsilon(1e-9));
    CHECK(std::abs(sol.amplitude(2.0, R) - f.a0[i]) <= 1e-12);
  }
}

TEST_CASE("first corrector: vacuum and free Gaussian") {
  const auto g = RadialGrid::uniform(8.0, 513);
  const auto zero = RealProfile::sample(g, [](double) { return 0.0; });
  const auto vac = InitialData::with_velocity(to_complex(zero), zero, -1.0, 3);
  const auto s0 = first_corrector(vac, 1.0, g);
  REQUIRE(s0.size() == 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s0[0].a1[i] == cd(0.0, 0.0));
    CHECK(s0[0].phi1[i] == 0.0);
  }

  // lambda = 0, v0 = 0: a0 = A0 for all t, so a1 = (i t / 2) Delta A0 exactly.
  const auto gg = RadialGrid::uniform(10.0, 1025);
  const auto still = RealProfile::sample(gg, [](double) { return 0.0; });
  const auto free = InitialData::with_velocity(gaussian_amplitude(gg), still, 0.0, 3);
  CorrectorOptions opt;
  opt.output_times = {0.01};
  const auto s = first_corrector(free, 0.1, gg, std::nullopt, opt);
  REQUIRE(s.size() == 2);
  for (const auto& smp : s) {
    double worst_re = 0.0;
    for (std::size_t i = 0; i < gg.size(); ++i) {
      const double r = gg[i];
      const double lap = (r * r - 3) * std::exp(-r * r / 2) / 2;  // Delta e^{-r^2/2} / 2
      CHECK(std::abs(smp.a1[i] - cd(0.0, smp.t * lap)) <= 1e-8);
      worst_re = std::max(worst_re, std::fabs(smp.a1[i].real()));
      CHECK(smp.phi1[i] == 0.0);
    }
    CHECK(worst_re <= 1e-10);
  }
}

TEST_CASE("first corrector: small-time Taylor oracle and real amplitude property") {
  // Compatible data with real A0: the only imaginary source is (i/2) Delta a0.
  const auto data = gaussian(3, 10.0, 2049);
  const double t = 1e-3;
  const auto s = first_corrector(data, t, data.grid());
  const auto lap = numerics::derivative(data.grid(), data.amplitude().values(), 2,
                                        numerics::Parity::Even);
  const auto d1 = numerics::derivative(data.grid(), data.amplitude().values(), 1,
                                       numerics::Parity::Even);
  for (std::size_t i = 1; i < data.grid().size(); i += 50) {
    const double r = data.grid()[i];
    const cd L = lap[i] + 2.0 * d1[i] / r;
    CHECK(std::abs(s.back().a1[i] - cd(0.0, 0.5) * t * L) <= 5e-3 * t * (1.0 + std::abs(L)));
  }
  double worst_phi = 0.0;
  for (double p : s.back().phi1.values()) worst_phi = std::max(worst_phi, std::fabs(p));
  CHECK(worst_phi <= 1e-12);
}

TEST_CASE("first corrector: phase coupling against the small-time Taylor oracle") {
  // Chirped Gaussian A0 = exp(-(1 - i chi) r^2 / 2): a1 = (i t / 2) Lap A0 + O(t^2), hence
  // 2 Re(a0 conj a1) = t Im(A0 conj Lap A0) = t chi e^{-r^2} (2 r^2 - 3) and
  // phi1 = -lambda (t^2 / 2) V[chi e^{-r^2} (2 r^2 - 3)] + O(t^3).
  const double chi = 0.8, t = 1e-2;
  const auto data = gaussian(3, 10.0, 2049, chi);
  CorrectorOptions opt;
  opt.dt = 1e-4;
  const auto s = first_corrector(data, t, data.grid(), std::nullopt, opt).back();
  const auto src = RealProfile::sample(
      data.grid(), [&](double r) { return chi * std::exp(-r * r) * (2 * r * r - 3); }, 7);
  const auto V = poisson_radial(src, 3);
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < data.grid().size(); ++i) {
    const double oracle = 0.5 * t * t * V[i];  // lambda = -1
    scale = std::max(scale, std::fabs(oracle));
    worst = std::max(worst, std::fabs(s.phi1[i] - oracle));
  }
  REQUIRE(scale > 0.0);
  MESSAGE("phi1 Taylor mismatch " << worst / scale);
  CHECK(worst <= 3e-2 * scale);
}

TEST_CASE("first corrector: spatial self-convergence on smooth ball-like data") {
  // Smooth compactly supported amplitude with a chirp so that phi1 is nontrivial.
  auto run = [](std::size_t pts) {
    const auto g = RadialGrid::uniform(8.0, pts);
    const auto A = ComplexProfile::sample(
        g, [](double r) { return std::polar(smooth_cutoff(r), 0.5 * r * r); }, 7);
    const auto data = InitialData::compatible(A, -1.0, 3);
    const auto coarse = RadialGrid::uniform(8.0, 129);
    CorrectorOptions opt;
    opt.dt = 2e-3;
    return first_corrector(data, 0.5, coarse, std::nullopt, opt).back();
  };
  const auto a = run(257), b = run(513), c = run(1025);
  double e1 = 0.0, e2 = 0.0, p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < a.a1.size(); ++i) {
    e1 = std::max(e1, std::abs(a.a1[i] - b.a1[i]));
    e2 = std::max(e2, std::abs(b.a1[i] - c.a1[i]));
    p1 = std::max(p1, std::fabs(a.phi1[i] - b.phi1[i]));
    p2 = std::max(p2, std::fabs(b.phi1[i] - c.phi1[i]));
  }
  MESSAGE("a1 diffs " << e1 << " " << e2 << ", phi1 diffs " << p1 << " " << p2);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(p1 / p2) >= 1.8);
}

TEST_CASE("first corrector rejects an unstable step") {
  const auto data = gaussian(3, 10.0, 513);
  CorrectorOptions opt;
  opt.dt = 5.0;
  CHECK_THROWS_AS(first_corrector(data, 10.0, data.grid(), std::nullopt, opt), CflViolation);
}
