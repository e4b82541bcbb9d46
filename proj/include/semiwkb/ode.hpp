#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace semiwkb::ode {

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  // 0: automatic
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
};

template <std::size_t N>
using State = std::array<double, N>;

// One accepted step, with cubic Hermite dense output.
template <std::size_t N>
struct Step {
  double t0, t1;
  State<N> y0, y1, f0, f1;

  State<N> at(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    return y;
  }
};

enum class Outcome { Reached, Stopped, StepUnderflow, Rejected, MaxSteps };

template <std::size_t N>
struct Result {
  Outcome outcome = Outcome::Reached;
  double t = 0.0;
  State<N> y{};
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Dormand-Prince 5(4) with PI step-size control.
template <std::size_t N, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), ctl_(control) {}

  // Fifth-order solution after one step of size h (no error control).
  State<N> single_step(double t, const State<N>& y, const State<N>& f0, double h) const {
    State<N> y5, err;
    State<N> f1;
    attempt(t, y, f0, h, y5, err, f1);
    return y5;
  }

  State<N> rhs(double t, const State<N>& y) const { return rhs_(t, y); }

  // Integrates from (t0, y0) to t_end. Steps never cross the sorted stop times
  // and land on them exactly. `admissible(y)` rejects states outside the
  // domain; `observe(step)` is called after each accepted step and returns
  // false to stop.
  template <class Admissible, class Observer>
  Result<N> solve(double t0, State<N> y0, double t_end, std::span<const double> stops,
                  Admissible&& admissible, Observer&& observe) const {
    Result<N> res;
    double t = t0;
    State<N> y = y0;
    State<N> f = rhs_(t, y);
    double h = ctl_.h_init > 0.0 ? ctl_.h_init : initial_step(t, y, f, t_end);
    double err_prev = 1e-4;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
    while (t < t_end) {
      if (res.accepted + res.rejected >= ctl_.max_steps) {
        res.outcome = Outcome::MaxSteps;
        break;
      }
      const double target = next_stop < stops.size() ? std::min(stops[next_stop], t_end) : t_end;
      bool clipped = false;
      double hh = std::min(h, ctl_.h_max);
      if (t + hh >= target) {
        hh = target - t;
        clipped = true;
      }
      if (hh < ctl_.h_min && !clipped) {
        res.outcome = Outcome::StepUnderflow;
        break;
      }
      State<N> y5, err, f1;
      attempt(t, y, f, hh, y5, err, f1);
      double en = error_norm(y, y5, err);
      const bool ok = admissible(y5) && std::isfinite(en);
      if (!ok) en = std::numeric_limits<double>::infinity();
      if (en <= 1.0) {
        Step<N> step{t, clipped ? target : t + hh, y, y5, f, f1};
        t = step.t1;
        y = y5;
        f = f1;
        ++res.accepted;
        if (clipped && next_stop < stops.size() && t >= stops[next_stop]) ++next_stop;
        const double fac = std::min(
            5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.17) *
                                   std::pow(err_prev, 0.04)));
        err_prev = std::max(en, 1e-4);
        if (!clipped) h = hh * fac;
        else h = std::max(h, hh * fac);
        if (!observe(step)) {
          res.outcome = Outcome::Stopped;
          break;
        }
      } else {
        ++res.rejected;
        const double fac = std::isfinite(en) ? std::max(0.1, 0.9 * std::pow(en, -0.2)) : 0.25;
        h = hh * fac;
        if (h < ctl_.h_min) {
          res.outcome = ok ? Outcome::StepUnderflow : Outcome::Rejected;
          break;
        }
      }
    }
    res.t = t;
    res.y = y;
    return res;
  }

 private:
  double error_norm(const State<N>& y0, const State<N>& y5, const State<N>& err) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::max(std::fabs(y0[i]), std::fabs(y5[i]));
      const double e = err[i] / sc;
      acc += e * e;
    }
    return std::sqrt(acc / N);
  }

  double initial_step(double t, const State<N>& y, const State<N>& f, double t_end) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::fabs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (f[i] / sc) * (f[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min({h, std::fabs(t_end - t), ctl_.h_max});
  }

  void attempt(double t, const State<N>& y, const State<N>& k1, double h, State<N>& y5,
               State<N>& err, State<N>& k7) const {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    State<N> tmp;
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
      return tmp;
    };
    const State<N> k2 = rhs_(t + c2 * h, stage([&](std::size_t i) { return a21 * k1[i]; }));
    const State<N> k3 =
        rhs_(t + c3 * h, stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }));
    const State<N> k4 = rhs_(t + c4 * h, stage([&](std::size_t i) {
                               return a41 * k1[i] + a42 * k2[i] + a43 * k3[i];
                             }));
    const State<N> k5 = rhs_(t + c5 * h, stage([&](std::size_t i) {
                               return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
                             }));
    const State<N> k6 = rhs_(t + h, stage([&](std::size_t i) {
                               return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                      a65 * k5[i];
                             }));
    for (std::size_t i = 0; i < N; ++i) {
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    k7 = rhs_(t + h, y5);
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
  }

  Rhs rhs_;
  StepControl ctl_;
};

}  // namespace semiwkb::ode
