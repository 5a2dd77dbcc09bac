#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "wdmdiff/field.hpp"
#include "wdmdiff/material.hpp"
#include "wdmdiff/propagation.hpp"

namespace wdmdiff {

// Continuous thickness encoding (no quantization).
constexpr int kContinuousDepth = 0;

struct StackGeometry {
  int layer_count = 8;            // K
  int layer_side = 0;             // neurons per layer edge, neuron pitch 0.5
  int fov_side = 8;               // FOV pixels per edge
  double lambda_m_meters = 8e-4;  // documentation only; simulation runs in wavelength units
  std::vector<double> channels;   // wavelengths in reference-wavelength units

  int channel_count() const { return static_cast<int>(channels.size()); }
  long total_neurons() const {
    return static_cast<long>(layer_count) * layer_side * layer_side;
  }
  double layer_extent() const { return layer_side * kSimulationPitch; }  // D_Layer
  double interplane_distance() const { return 0.5 * layer_extent(); }    // d
  int fov_pixel_count() const { return fov_side * fov_side; }

  // Simulation window per plane: the layer grid, enlarged (even-sized) when
  // the centered FOV patch would not fit. Samples outside the layer aperture
  // are opaque.
  int grid_side() const;
  int layer_offset() const;  // top-left offset of the layer aperture on the grid

  // Channels equally spaced between 0.9125 and 1.0875 reference-wavelength
  // units; a single channel sits at 1.
  static std::vector<double> default_ladder(int n_w);
  // Neurons-per-edge for a requested total neuron budget.
  static int side_for_neuron_budget(long n_total, int layer_count);

  void validate() const;  // throws ConfigError
  bool operator==(const StackGeometry&) const = default;
};

struct DiffractiveModel {
  StackGeometry geometry;
  Material material = Material::dispersion_free();
  std::vector<std::vector<double>> latents;  // K arrays of layer_side^2, row-major
  double h_base = 0.25;  // substrate thickness, wavelength units
  double h_max = 1.25;   // learnable thickness bound
  int bit_depth = kContinuousDepth;
  uint64_t init_seed = 0;
  int epoch = -1;  // training epoch the latents correspond to; -1 = untrained
};

// h_learnable = (h_max/2) * (sin(h_v) + 1), in [0, h_max].
double latent_thickness(double h_v, double h_max);
double latent_thickness_grad(double h_v, double h_max);

// Nearest of the 2^q levels k*h_max/(2^q - 1); ties round toward the higher level.
double quantize_thickness(double h_learnable, double h_max, int bit_depth);

// t = exp(-2*pi*kappa*h/wavelength) * exp(j*(n - 1)*2*pi*h/wavelength).
Complex transmission(double h, double wavelength, const IndexSample& index);
// dt/dh = t * transmission_log_grad.
Complex transmission_log_grad(double wavelength, const IndexSample& index);

// Latents drawn from a standard normal, one substream per layer.
DiffractiveModel build_model(const StackGeometry& geometry, const Material& material,
                             uint64_t seed, int bit_depth = kContinuousDepth);

// Effective (possibly quantized) thickness map of one layer, h_base included.
std::vector<double> layer_thickness(const DiffractiveModel& model, int layer);

/// Immutable forward/backward engine over a model snapshot. Construction
/// resolves thicknesses, per-channel transmissions and propagation plans;
/// afterwards all evaluation methods are const and thread-safe.
class StackEvaluator {
 public:
  explicit StackEvaluator(const DiffractiveModel& model);

  const DiffractiveModel& model() const { return model_; }
  int channel_count() const { return model_.geometry.channel_count(); }

  FovField forward(const FovField& input, int channel) const;
  // Same channel targets evaluated at a shifted illumination wavelength.
  FovField forward_at(const FovField& input, int channel, double wavelength) const;

  // Fields arriving at each layer (pre-modulation), kept for the backward pass.
  struct Tape {
    std::vector<ComplexGrid> arrive;  // size K
    ComplexGrid final_grid;
    FovField output;
  };
  FovField forward_tape(const FovField& input, int channel, Tape& tape) const;

  // Accumulate dLoss/d(thickness) for every layer neuron given
  // obar[n] = dLoss/d(conj(output[n])). grads: K arrays of layer_side^2.
  void backward(const Tape& tape, int channel, std::span<const Complex> obar,
                std::vector<std::vector<double>>& grads) const;

  long forward_count() const { return forward_count_.load(); }

 private:
  struct ChannelTables {
    double wavelength = 0.0;
    IndexSample index;
    std::vector<std::vector<Complex>> layer_t;  // K grids of grid_side^2 (opaque outside aperture)
    std::shared_ptr<const PropagationPlan> plan;
  };
  const ChannelTables& tables_for(int channel, double wavelength) const;
  ChannelTables make_tables(double wavelength) const;
  FovField run(const ChannelTables& t, const FovField& input, Tape* tape) const;

  DiffractiveModel model_;
  std::vector<double> thickness_;          // flattened K x layer_side^2 effective thickness
  std::vector<ChannelTables> channels_;    // per configured channel
  mutable std::map<uint64_t, std::unique_ptr<ChannelTables>> override_cache_;
  mutable std::mutex override_mutex_;
  mutable std::atomic<long> forward_count_{0};
};

// Checkpoint container: textual header followed by K raw little-endian
// float64 latent arrays in row-major layer order. Bit-exact round trip.
void save_checkpoint(const std::string& path, const DiffractiveModel& model);
DiffractiveModel load_checkpoint(const std::string& path);

}  // namespace wdmdiff
