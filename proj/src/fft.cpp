#include "wdmdiff/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace wdmdiff {

namespace {
// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft2D::Impl {
  fftw_complex* buf_in = nullptr;
  fftw_complex* buf_out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Fft2D::Fft2D(int side) : side_(side), impl_(new Impl) {
  const size_t n = static_cast<size_t>(side) * side;
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->buf_in = fftw_alloc_complex(n);
  impl_->buf_out = fftw_alloc_complex(n);
  // FFTW_ESTIMATE keeps planning deterministic and cheap.
  impl_->fwd = fftw_plan_dft_2d(side, side, impl_->buf_in, impl_->buf_out,
                                FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_2d(side, side, impl_->buf_in, impl_->buf_out,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->buf_in);
  fftw_free(impl_->buf_out);
}

// std::complex<double> is layout-compatible with fftw_complex (double[2]).

void Fft2D::forward(const std::complex<double>* in, std::complex<double>* out) {
  const size_t n = static_cast<size_t>(side_) * side_;
  std::memcpy(impl_->buf_in, reinterpret_cast<const double*>(in), n * sizeof(fftw_complex));
  fftw_execute(impl_->fwd);
  std::memcpy(reinterpret_cast<double*>(out), impl_->buf_out, n * sizeof(fftw_complex));
}

void Fft2D::inverse(const std::complex<double>* in, std::complex<double>* out) {
  const size_t n = static_cast<size_t>(side_) * side_;
  std::memcpy(impl_->buf_in, reinterpret_cast<const double*>(in), n * sizeof(fftw_complex));
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = std::complex<double>(impl_->buf_out[i][0] * scale, impl_->buf_out[i][1] * scale);
  }
}

Fft2D& thread_fft(int side) {
  thread_local std::map<int, std::unique_ptr<Fft2D>> cache;
  auto it = cache.find(side);
  if (it == cache.end()) it = cache.emplace(side, std::make_unique<Fft2D>(side)).first;
  return *it->second;
}

}  // namespace wdmdiff
