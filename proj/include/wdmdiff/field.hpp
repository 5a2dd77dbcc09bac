#pragma once

#include <complex>
#include <span>
#include <vector>

#include "wdmdiff/errors.hpp"
#include "wdmdiff/matrix.hpp"

namespace wdmdiff {

// All lengths are expressed in units of the reference wavelength.
constexpr double kSimulationPitch = 0.5;  // sampling period of simulation grids
constexpr double kFovPixelPitch = 2.0;    // FOV pixel pitch
constexpr int kFovBin = 4;                // simulation samples per FOV pixel edge

/// 2D complex scalar field sampled on a square-pitch grid (row-major).
class ComplexGrid {
 public:
  ComplexGrid() = default;
  ComplexGrid(int height, int width, double pitch = kSimulationPitch);

  int height() const { return height_; }
  int width() const { return width_; }
  int size() const { return height_ * width_; }
  double pitch() const { return pitch_; }

  Complex& at(int r, int c) { return data_[static_cast<size_t>(r) * width_ + c]; }
  const Complex& at(int r, int c) const { return data_[static_cast<size_t>(r) * width_ + c]; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  double energy() const;
  bool all_finite() const;

 private:
  int height_ = 0;
  int width_ = 0;
  double pitch_ = kSimulationPitch;
  std::vector<Complex> data_;
};

/// Square FOV patch stored as its column-major vectorization,
/// pixel pitch 2x the reference wavelength.
struct FovField {
  int side = 0;
  std::vector<Complex> values;  // length side*side, values[r + side*c]

  FovField() = default;
  FovField(int s, std::vector<Complex> v) : side(s), values(std::move(v)) {}

  static FovField zero(int side);
  static FovField basis(int side, int n);  // standard-basis field e_n
  static FovField from_pixels(const CMatrix& pixels);  // requires square
  CMatrix to_pixels() const;

  int pixel_count() const { return side * side; }
  double energy() const { return energy_of(values); }
  bool all_finite() const;
};

// Piecewise-constant encoding of the FOV onto a simulation grid: each pixel is
// replicated over a 4x4 sample block, the whole block patch centered on the
// grid, zeros elsewhere. grid_side must be even and >= 4*side.
ComplexGrid embed_fov(const FovField& f, int grid_side);

// Inverse direction: each output pixel is the complex mean of its 4x4 block.
FovField bin_fov(const ComplexGrid& g, int side);

// Offset of the centered FOV block on a grid of the given side.
int fov_block_offset(int grid_side, int side);

}  // namespace wdmdiff
