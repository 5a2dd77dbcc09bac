#pragma once

#include <memory>
#include <vector>

#include "wdmdiff/field.hpp"

namespace wdmdiff {

/// Precomputed band-limited angular-spectrum transfer function for free-space
/// propagation between parallel planes. Immutable and shareable across threads.
struct PropagationPlan {
  int grid_side = 0;
  int padded_side = 0;
  double pitch = kSimulationPitch;
  double distance = 0.0;    // may be negative (used by adjoint checks)
  double wavelength = 0.0;
  std::vector<Complex> transfer;  // padded_side^2, DC-first frequency layout
};

// Retained frequency support is fx^2 + fy^2 <= min(1/wavelength^2, fnyq^2)
// with fnyq = 1/(2*pitch); evanescent and beyond-Nyquist modes are zeroed.
// |transfer| == 1 on the retained support.
PropagationPlan make_plan(int grid_side, double pitch, double distance,
                          double wavelength, int pad_factor = 2);

// Process-wide cache of immutable plans; plans depend only on the geometry
// and wavelength, so repeated model snapshots share them.
std::shared_ptr<const PropagationPlan> cached_plan(int grid_side, double pitch,
                                                   double distance, double wavelength,
                                                   int pad_factor = 2);

// Zero-pad (factor >= 2), transform, multiply, transform back, crop. The
// padding suppresses circular wrap-around of the field across the window.
ComplexGrid propagate(const PropagationPlan& plan, const ComplexGrid& field);
ComplexGrid propagate(const ComplexGrid& field, double distance, double wavelength);

// Exact adjoint of propagate under the standard inner product: the same
// pad/transform/crop pipeline with the conjugated transfer function.
ComplexGrid adjoint_propagate(const PropagationPlan& plan, const ComplexGrid& field);
ComplexGrid adjoint_propagate(const ComplexGrid& field, double distance, double wavelength);

// Transfer function applied on the grid as-is (periodic, no padding). The
// plane-wave eigenfunction identities hold exactly on this path; used by
// diagnostics and band-limiting (distance 0 projects onto the retained modes).
ComplexGrid apply_transfer_periodic(const ComplexGrid& field, double distance,
                                    double wavelength);

// Literal secondary-wave summation reference: every target sample receives
// sum over source samples of
//   E_src * (d/r^2) * (1/(2*pi*r) + 1/(j*wavelength)) * exp(j*2*pi*r/wavelength) * pitch^2.
// O(M^2); grids capped at 4096 samples. Requires distance > 0.
ComplexGrid direct_rs_reference(const ComplexGrid& field, double distance,
                                double wavelength);

}  // namespace wdmdiff
