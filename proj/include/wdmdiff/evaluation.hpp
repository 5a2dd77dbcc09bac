#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wdmdiff/stack.hpp"
#include "wdmdiff/taskgen.hpp"

namespace wdmdiff {

// The all-optical matrix realized by the stack at one channel, recovered by
// standard-basis probing (exact for a linear system; N_i forward passes).
// An illumination wavelength override shifts the channel off its trained
// wavelength (jitter studies).
CMatrix extract_transform(const StackEvaluator& eval, int channel,
                          std::optional<double> wavelength = std::nullopt);

// (1/(N_i*N_o)) * sum |a[n] - m*a'[n]|^2 over the column-major vectorizations,
// with m = sum(a[n]*conj(a'[n])) / sum |a'[n]|^2 (m = 0 when A' == 0).
double mse_transformation(const CMatrix& a, const CMatrix& a_prime);

// |a^H a_hat'| / (||a|| * ||a_hat'||) with a_hat' = m*a'; scale-invariant,
// in [0, 1]. Throws on an all-zero argument.
double cosine_similarity(const CMatrix& a, const CMatrix& a_prime);

struct OutputStats {
  double mean = 0.0;
  double stddev = 0.0;  // across the split (error-bar statistic)
  std::vector<double> per_sample;
};

OutputStats mse_output(const StackEvaluator& eval, const Dataset& data, Split split,
                       int channel, std::optional<double> wavelength = std::nullopt);

double diffraction_efficiency(const StackEvaluator& eval, const Dataset& data, Split split,
                              int channel, std::optional<double> wavelength = std::nullopt);

struct ChannelMetrics {
  int channel = 0;            // 1-based in reports
  double wavelength = 0.0;    // channel wavelength (trained)
  double delta_lambda = 0.0;  // illumination offset applied during evaluation
  int bit_depth = kContinuousDepth;
  double mse_transformation = 0.0;
  double cos_sim = 0.0;
  double mse_output = 0.0;
  double mse_output_std = 0.0;
  double eta = 0.0;
};

// Full per-channel record on the given split at an optional wavelength offset.
ChannelMetrics evaluate_channel(const StackEvaluator& eval, const TransformSet& transforms,
                                const Dataset& data, Split split, int channel,
                                double delta_lambda = 0.0);

std::vector<ChannelMetrics> evaluate_all_channels(const StackEvaluator& eval,
                                                  const TransformSet& transforms,
                                                  const Dataset& data, Split split);

// Every metric for channel `channel` with its illumination wavelength shifted
// by each offset (reference-wavelength units); targets stay the channel's own.
std::vector<ChannelMetrics> sweep_jitter(const StackEvaluator& eval,
                                         const TransformSet& transforms, const Dataset& data,
                                         Split split, int channel,
                                         std::span<const double> offsets);

// Metrics of post-hoc quantized copies of the model, one record per channel
// per requested depth.
std::vector<ChannelMetrics> sweep_bitdepth(const DiffractiveModel& model,
                                           const TransformSet& transforms,
                                           const Dataset& data, Split split,
                                           std::span<const int> depths);

struct RunInfo {
  std::string run_id;
  int n_w = 0;
  long n = 0;  // total neurons
  int k = 0;
};

void write_metrics_csv(const std::string& path, const RunInfo& info,
                       std::span<const ChannelMetrics> rows);

}  // namespace wdmdiff
