#include "wdmdiff/field.hpp"

#include <cmath>

namespace wdmdiff {

std::vector<Complex> CMatrix::matvec(std::span<const Complex> x) const {
  std::vector<Complex> y(rows, Complex{0.0, 0.0});
  for (int r = 0; r < rows; ++r) {
    Complex acc{0.0, 0.0};
    for (int c = 0; c < cols; ++c) acc += at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

double CMatrix::frobenius_sq() const { return energy_of(a); }

std::vector<Complex> vectorize(const CMatrix& m) {
  std::vector<Complex> v(static_cast<size_t>(m.rows) * m.cols);
  for (int c = 0; c < m.cols; ++c)
    for (int r = 0; r < m.rows; ++r) v[r + static_cast<size_t>(m.rows) * c] = m.at(r, c);
  return v;
}

CMatrix devectorize(std::span<const Complex> v, int rows, int cols) {
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m.at(r, c) = v[r + static_cast<size_t>(rows) * c];
  return m;
}

Complex cdot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex acc{0.0, 0.0};
  for (size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double energy_of(std::span<const Complex> v) {
  double acc = 0.0;
  for (const Complex& z : v) acc += std::norm(z);
  return acc;
}

ComplexGrid::ComplexGrid(int height, int width, double pitch)
    : height_(height), width_(width), pitch_(pitch),
      data_(static_cast<size_t>(height) * width, Complex{0.0, 0.0}) {
  if (height < 1 || width < 1) throw ConfigError("ComplexGrid: dimensions must be >= 1");
  if (!(pitch > 0.0)) throw ConfigError("ComplexGrid: pitch must be positive");
}

double ComplexGrid::energy() const { return energy_of(data_); }

bool ComplexGrid::all_finite() const {
  for (const Complex& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

FovField FovField::zero(int side) {
  return FovField(side, std::vector<Complex>(static_cast<size_t>(side) * side));
}

FovField FovField::basis(int side, int n) {
  FovField f = zero(side);
  f.values.at(n) = Complex{1.0, 0.0};
  return f;
}

FovField FovField::from_pixels(const CMatrix& pixels) {
  if (pixels.rows != pixels.cols) throw ConfigError("FovField: pixel array must be square");
  return FovField(pixels.rows, vectorize(pixels));
}

CMatrix FovField::to_pixels() const { return devectorize(values, side, side); }

bool FovField::all_finite() const {
  for (const Complex& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

int fov_block_offset(int grid_side, int side) {
  // Centered; any leftover sample goes to the bottom/right.
  return (grid_side - kFovBin * side) / 2;
}

ComplexGrid embed_fov(const FovField& f, int grid_side) {
  const int extent = kFovBin * f.side;
  if (grid_side < extent)
    throw ConfigError("embed_fov: grid side " + std::to_string(grid_side) +
                      " too small for FOV extent " + std::to_string(extent));
  if (grid_side % 2 != 0) throw ConfigError("embed_fov: grid side must be even");

  ComplexGrid g(grid_side, grid_side, kSimulationPitch);
  const int off = fov_block_offset(grid_side, f.side);
  for (int pc = 0; pc < f.side; ++pc) {
    for (int pr = 0; pr < f.side; ++pr) {
      const Complex v = f.values[pr + static_cast<size_t>(f.side) * pc];
      for (int dr = 0; dr < kFovBin; ++dr)
        for (int dc = 0; dc < kFovBin; ++dc)
          g.at(off + kFovBin * pr + dr, off + kFovBin * pc + dc) = v;
    }
  }
  return g;
}

FovField bin_fov(const ComplexGrid& g, int side) {
  const int extent = kFovBin * side;
  if (g.height() != g.width()) throw ConfigError("bin_fov: grid must be square");
  if (g.height() < extent)
    throw ConfigError("bin_fov: FOV extent " + std::to_string(extent) +
                      " out of bounds for grid side " + std::to_string(g.height()));

  FovField f = FovField::zero(side);
  const int off = fov_block_offset(g.height(), side);
  for (int pc = 0; pc < side; ++pc) {
    for (int pr = 0; pr < side; ++pr) {
      // Pairwise block reduction; summing equal values stays exact, so
      // bin_fov(embed_fov(f)) == f bit for bit.
      Complex rowsum[kFovBin];
      for (int dr = 0; dr < kFovBin; ++dr) {
        const int r = off + kFovBin * pr + dr;
        const int c = off + kFovBin * pc;
        rowsum[dr] = (g.at(r, c) + g.at(r, c + 1)) + (g.at(r, c + 2) + g.at(r, c + 3));
      }
      const Complex total = (rowsum[0] + rowsum[1]) + (rowsum[2] + rowsum[3]);
      f.values[pr + static_cast<size_t>(side) * pc] = total * 0.0625;
    }
  }
  return f;
}

}  // namespace wdmdiff
