#include "semiwkb/sine_transform.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "semiwkb/error.hpp"

namespace semiwkb {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SineTransform::Plans {
  fftw_plan real = nullptr;
  fftw_plan complex = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (real) fftw_destroy_plan(real);
    if (complex) fftw_destroy_plan(complex);
  }
};

SineTransform::SineTransform(std::size_t length) : length_(length), plans_(std::make_unique<Plans>()) {
  if (length < 2) throw ParameterError("sine transform needs at least two samples");
  const int n = static_cast<int>(length);
  std::vector<double> scratch(2 * length);
  const fftw_r2r_kind kind = FFTW_RODFT00;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->real = fftw_plan_r2r_1d(n, scratch.data(), scratch.data(), kind,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->complex = fftw_plan_many_r2r(1, &n, 2, scratch.data(), nullptr, 2, 1, scratch.data(),
                                       nullptr, 2, 1, &kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans_->real || !plans_->complex) throw Error("FFTW failed to create a DST-I plan");
}

SineTransform::~SineTransform() = default;
SineTransform::SineTransform(SineTransform&&) noexcept = default;
SineTransform& SineTransform::operator=(SineTransform&&) noexcept = default;

void SineTransform::apply(std::span<double> data) const {
  if (data.size() != length_) throw ContractError("sine transform length mismatch");
  fftw_execute_r2r(plans_->real, data.data(), data.data());
}

void SineTransform::apply(std::span<std::complex<double>> data) const {
  if (data.size() != length_) throw ContractError("sine transform length mismatch");
  auto* p = reinterpret_cast<double*>(data.data());
  fftw_execute_r2r(plans_->complex, p, p);
}

}  // namespace semiwkb
