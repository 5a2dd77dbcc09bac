#pragma once

#include <complex>
#include <memory>

namespace wdmdiff {

/// Fixed-size square 2D FFT. Owns aligned FFTW buffers; each instance is
/// exclusive to one thread (plan execution copies through the owned buffers).
class Fft2D {
 public:
  explicit Fft2D(int side);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int side() const { return side_; }

  // Unnormalized forward DFT.
  void forward(const std::complex<double>* in, std::complex<double>* out);
  // Inverse DFT including the 1/(side*side) normalization.
  void inverse(const std::complex<double>* in, std::complex<double>* out);

 private:
  struct Impl;
  int side_;
  std::unique_ptr<Impl> impl_;
};

// Per-thread cache of transforms keyed by side.
Fft2D& thread_fft(int side);

}  // namespace wdmdiff
