#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace semiwkb {

// Unnormalised DST-I of length M: y_k = 2 sum_j x_j sin(pi (j+1)(k+1)/(M+1)).
// Applying it twice multiplies by 2(M+1). Backed by FFTW; plans are created
// under a global lock and executed on caller-owned arrays, so one instance
// may be shared across threads.
class SineTransform {
 public:
  explicit SineTransform(std::size_t length);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  SineTransform(SineTransform&&) noexcept;
  SineTransform& operator=(SineTransform&&) noexcept;

  std::size_t size() const { return length_; }
  // In place; the span length must equal size().
  void apply(std::span<double> data) const;
  // Real and imaginary parts transformed independently, in place.
  void apply(std::span<std::complex<double>> data) const;

 private:
  struct Plans;
  std::size_t length_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace semiwkb
