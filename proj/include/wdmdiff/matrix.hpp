#pragma once

#include <complex>
#include <span>
#include <vector>

namespace wdmdiff {

using Complex = std::complex<double>;

// Dense complex matrix, row-major storage. Sized for the small target
// transforms handled here (tens of rows/columns), not for large linear algebra.
struct CMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Complex> a;

  CMatrix() = default;
  CMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  Complex& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const Complex& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  std::vector<Complex> matvec(std::span<const Complex> x) const;
  double frobenius_sq() const;
};

// Column-major flattening: v[r + rows*c] = m(r, c).
std::vector<Complex> vectorize(const CMatrix& m);
CMatrix devectorize(std::span<const Complex> v, int rows, int cols);

// Sum of conj(a[n]) * b[n].
Complex cdot(std::span<const Complex> a, std::span<const Complex> b);
double energy_of(std::span<const Complex> v);

}  // namespace wdmdiff
