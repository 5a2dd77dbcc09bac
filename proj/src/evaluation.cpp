#include "wdmdiff/evaluation.hpp"

#include <cmath>
#include <fstream>

#include "wdmdiff/training.hpp"
#include "wdmdiff/util.hpp"

namespace wdmdiff {

CMatrix extract_transform(const StackEvaluator& eval, int channel,
                          std::optional<double> wavelength) {
  const int side = eval.model().geometry.fov_side;
  const int n = side * side;
  CMatrix a(n, n);
  std::vector<std::vector<Complex>> columns(n);
  parallel_for(n, [&](long col) {
    const FovField probe = FovField::basis(side, static_cast<int>(col));
    const FovField out = wavelength ? eval.forward_at(probe, channel, *wavelength)
                                    : eval.forward(probe, channel);
    columns[col] = out.values;
  });
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) a.at(r, c) = columns[c][r];
  return a;
}

namespace {

// m of the scale-matching step, shared by both matrix metrics.
Complex scale_match(std::span<const Complex> a, std::span<const Complex> ap) {
  const double ap_energy = energy_of(ap);
  if (!(ap_energy > 0.0)) return Complex{0.0, 0.0};
  Complex s{0.0, 0.0};
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(ap[i]);
  return s / ap_energy;
}

}  // namespace

double mse_transformation(const CMatrix& a, const CMatrix& a_prime) {
  if (a.rows != a_prime.rows || a.cols != a_prime.cols)
    throw ConfigError("mse_transformation: shape mismatch");
  const std::vector<Complex> va = vectorize(a);
  const std::vector<Complex> vp = vectorize(a_prime);
  const Complex m = scale_match(va, vp);
  double acc = 0.0;
  for (size_t i = 0; i < va.size(); ++i) acc += std::norm(va[i] - m * vp[i]);
  return acc / static_cast<double>(va.size());
}

double cosine_similarity(const CMatrix& a, const CMatrix& a_prime) {
  if (a.rows != a_prime.rows || a.cols != a_prime.cols)
    throw ConfigError("cosine_similarity: shape mismatch");
  const std::vector<Complex> va = vectorize(a);
  const std::vector<Complex> vp = vectorize(a_prime);
  const double ea = energy_of(va);
  const double ep = energy_of(vp);
  if (!(ea > 0.0) || !(ep > 0.0))
    throw NumericError("cosine_similarity: undefined for an all-zero matrix");
  // Scale matching leaves the cosine unchanged, so evaluate it directly.
  return std::abs(cdot(va, vp)) / std::sqrt(ea * ep);
}

OutputStats mse_output(const StackEvaluator& eval, const Dataset& data, Split split,
                       int channel, std::optional<double> wavelength) {
  const long count = data.counts().of(split);
  if (count < 1) throw ConfigError("mse_output: empty split");
  const auto& pairs = data.split(channel, split);

  OutputStats stats;
  stats.per_sample.resize(count);
  parallel_for(count, [&](long s) {
    const auto& pair = pairs[s];
    FovField input(eval.model().geometry.fov_side, pair.input);
    const FovField out = wavelength ? eval.forward_at(input, channel, *wavelength)
                                    : eval.forward(input, channel);
    stats.per_sample[s] = channel_loss(pair.target, out.values);
  });
  double acc = 0.0;
  for (double v : stats.per_sample) acc += v;
  stats.mean = acc / static_cast<double>(count);
  double var = 0.0;
  for (double v : stats.per_sample) var += (v - stats.mean) * (v - stats.mean);
  stats.stddev = std::sqrt(var / static_cast<double>(count));
  return stats;
}

double diffraction_efficiency(const StackEvaluator& eval, const Dataset& data, Split split,
                              int channel, std::optional<double> wavelength) {
  const long count = data.counts().of(split);
  if (count < 1) throw ConfigError("diffraction_efficiency: empty split");
  const auto& pairs = data.split(channel, split);

  std::vector<double> out_e(count), in_e(count);
  parallel_for(count, [&](long s) {
    const auto& pair = pairs[s];
    FovField input(eval.model().geometry.fov_side, pair.input);
    const FovField out = wavelength ? eval.forward_at(input, channel, *wavelength)
                                    : eval.forward(input, channel);
    out_e[s] = out.energy();
    in_e[s] = energy_of(pair.input);
  });
  return efficiency_terms(out_e, in_e, 0.0).eta;
}

ChannelMetrics evaluate_channel(const StackEvaluator& eval, const TransformSet& transforms,
                                const Dataset& data, Split split, int channel,
                                double delta_lambda) {
  const double base = eval.model().geometry.channels.at(channel);
  const double lambda = base + delta_lambda;
  if (!(lambda > 0.0)) throw ConfigError("evaluate_channel: shifted wavelength must be positive");
  const std::optional<double> override_lambda =
      (delta_lambda == 0.0) ? std::nullopt : std::optional<double>(lambda);

  ChannelMetrics m;
  m.channel = channel + 1;
  m.wavelength = base;
  m.delta_lambda = delta_lambda;
  m.bit_depth = eval.model().bit_depth;

  const CMatrix a_prime = extract_transform(eval, channel, override_lambda);
  const CMatrix& a = transforms.matrices.at(channel);
  m.mse_transformation = mse_transformation(a, a_prime);
  m.cos_sim = cosine_similarity(a, a_prime);

  // Consistency of the two matrix metrics: with the least-squares scale match,
  // 1 - mse*(N_i*N_o)/||a||^2 equals cos^2 <= cos.
  const double floor = 1.0 - m.mse_transformation *
                                 static_cast<double>(a.rows) * a.cols / a.frobenius_sq();
  if (m.cos_sim < floor - 1e-9)
    throw NumericError("metric consistency violated: cos_sim below its algebraic floor");

  const OutputStats out = mse_output(eval, data, split, channel, override_lambda);
  m.mse_output = out.mean;
  m.mse_output_std = out.stddev;
  m.eta = diffraction_efficiency(eval, data, split, channel, override_lambda);
  return m;
}

std::vector<ChannelMetrics> evaluate_all_channels(const StackEvaluator& eval,
                                                  const TransformSet& transforms,
                                                  const Dataset& data, Split split) {
  std::vector<ChannelMetrics> rows;
  for (int w = 0; w < eval.channel_count(); ++w)
    rows.push_back(evaluate_channel(eval, transforms, data, split, w));
  return rows;
}

std::vector<ChannelMetrics> sweep_jitter(const StackEvaluator& eval,
                                         const TransformSet& transforms, const Dataset& data,
                                         Split split, int channel,
                                         std::span<const double> offsets) {
  std::vector<ChannelMetrics> rows;
  for (double d : offsets)
    rows.push_back(evaluate_channel(eval, transforms, data, split, channel, d));
  return rows;
}

std::vector<ChannelMetrics> sweep_bitdepth(const DiffractiveModel& model,
                                           const TransformSet& transforms,
                                           const Dataset& data, Split split,
                                           std::span<const int> depths) {
  std::vector<ChannelMetrics> rows;
  for (int q : depths) {
    if (q != kContinuousDepth && (q < 1 || q > 32))
      throw ConfigError("sweep_bitdepth: bit depth must be 1..32 or continuous");
    DiffractiveModel quantized = model;
    quantized.bit_depth = q;
    StackEvaluator eval(quantized);
    for (int w = 0; w < eval.channel_count(); ++w)
      rows.push_back(evaluate_channel(eval, transforms, data, split, w));
  }
  return rows;
}

void write_metrics_csv(const std::string& path, const RunInfo& info,
                       std::span<const ChannelMetrics> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics: " + path);
  out << "run_id,N_w,N,K,channel,lambda_over_lambda_m,bit_depth,"
         "delta_lambda_over_lambda_m,mse_transformation,cos_sim,mse_output,eta\n";
  for (const ChannelMetrics& m : rows) {
    out << info.run_id << ',' << info.n_w << ',' << info.n << ',' << info.k << ','
        << m.channel << ',' << fmt_double(m.wavelength) << ',' << m.bit_depth << ','
        << fmt_double(m.delta_lambda) << ',' << fmt_double(m.mse_transformation) << ','
        << fmt_double(m.cos_sim) << ',' << fmt_double(m.mse_output) << ','
        << fmt_double(m.eta) << '\n';
  }
  if (!out) throw IoError("short write to metrics: " + path);
}

}  // namespace wdmdiff
