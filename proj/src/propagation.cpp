#include "wdmdiff/propagation.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "wdmdiff/fft.hpp"

namespace wdmdiff {

namespace {

constexpr double kPi = std::numbers::pi;

void check_field(const ComplexGrid& field, double wavelength) {
  if (field.height() != field.width()) throw ConfigError("propagate: grid must be square");
  if (!(wavelength > 0.0)) throw ConfigError("propagate: wavelength must be positive");
  if (!field.all_finite()) throw NumericError("propagate: non-finite input field");
}

// Apply the (optionally conjugated) transfer function on the padded grid.
void apply_plan(const PropagationPlan& plan, const ComplexGrid& in, ComplexGrid& out,
                bool conjugate) {
  const int g = plan.grid_side;
  const int p = plan.padded_side;
  const size_t np = static_cast<size_t>(p) * p;
  Fft2D& fft = thread_fft(p);

  std::vector<Complex> padded(np, Complex{0.0, 0.0});
  const int off = (p - g) / 2;
  for (int r = 0; r < g; ++r)
    for (int c = 0; c < g; ++c)
      padded[static_cast<size_t>(r + off) * p + (c + off)] = in.at(r, c);

  std::vector<Complex> spec(np);
  fft.forward(padded.data(), spec.data());
  if (conjugate) {
    for (size_t i = 0; i < np; ++i) spec[i] *= std::conj(plan.transfer[i]);
  } else {
    for (size_t i = 0; i < np; ++i) spec[i] *= plan.transfer[i];
  }
  fft.inverse(spec.data(), padded.data());

  for (int r = 0; r < g; ++r)
    for (int c = 0; c < g; ++c)
      out.at(r, c) = padded[static_cast<size_t>(r + off) * p + (c + off)];
}

}  // namespace

PropagationPlan make_plan(int grid_side, double pitch, double distance,
                          double wavelength, int pad_factor) {
  if (grid_side < 1) throw ConfigError("make_plan: grid side must be >= 1");
  if (!(pitch > 0.0)) throw ConfigError("make_plan: pitch must be positive");
  if (!(wavelength > 0.0)) throw ConfigError("make_plan: wavelength must be positive");
  if (pad_factor < 1) throw ConfigError("make_plan: pad factor must be >= 1");

  PropagationPlan plan;
  plan.grid_side = grid_side;
  plan.padded_side = grid_side * pad_factor;
  plan.pitch = pitch;
  plan.distance = distance;
  plan.wavelength = wavelength;

  const int p = plan.padded_side;
  const double df = 1.0 / (p * pitch);
  const double fnyq = 1.0 / (2.0 * pitch);
  const double inv_lambda_sq = 1.0 / (wavelength * wavelength);
  const double fsq_max = std::min(inv_lambda_sq, fnyq * fnyq);

  plan.transfer.assign(static_cast<size_t>(p) * p, Complex{0.0, 0.0});
  for (int r = 0; r < p; ++r) {
    const double fy = df * (r < (p + 1) / 2 ? r : r - p);
    for (int c = 0; c < p; ++c) {
      const double fx = df * (c < (p + 1) / 2 ? c : c - p);
      const double fsq = fx * fx + fy * fy;
      if (fsq > fsq_max) continue;
      const double fz = std::sqrt(std::max(inv_lambda_sq - fsq, 0.0));
      const double phase = 2.0 * kPi * distance * fz;
      plan.transfer[static_cast<size_t>(r) * p + c] = Complex{std::cos(phase), std::sin(phase)};
    }
  }
  return plan;
}

std::shared_ptr<const PropagationPlan> cached_plan(int grid_side, double pitch,
                                                   double distance, double wavelength,
                                                   int pad_factor) {
  using Key = std::array<uint64_t, 5>;
  static std::map<Key, std::shared_ptr<const PropagationPlan>> cache;
  static std::mutex mutex;
  const Key key{static_cast<uint64_t>(grid_side), std::bit_cast<uint64_t>(pitch),
                std::bit_cast<uint64_t>(distance), std::bit_cast<uint64_t>(wavelength),
                static_cast<uint64_t>(pad_factor)};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_shared<const PropagationPlan>(make_plan(
                                grid_side, pitch, distance, wavelength, pad_factor)))
             .first;
  }
  return it->second;
}

ComplexGrid propagate(const PropagationPlan& plan, const ComplexGrid& field) {
  check_field(field, plan.wavelength);
  if (field.height() != plan.grid_side) throw ConfigError("propagate: field/plan size mismatch");
  ComplexGrid out(plan.grid_side, plan.grid_side, field.pitch());
  apply_plan(plan, field, out, false);
  return out;
}

ComplexGrid propagate(const ComplexGrid& field, double distance, double wavelength) {
  check_field(field, wavelength);
  return propagate(make_plan(field.height(), field.pitch(), distance, wavelength), field);
}

ComplexGrid adjoint_propagate(const PropagationPlan& plan, const ComplexGrid& field) {
  check_field(field, plan.wavelength);
  if (field.height() != plan.grid_side) throw ConfigError("propagate: field/plan size mismatch");
  ComplexGrid out(plan.grid_side, plan.grid_side, field.pitch());
  apply_plan(plan, field, out, true);
  return out;
}

ComplexGrid adjoint_propagate(const ComplexGrid& field, double distance, double wavelength) {
  check_field(field, wavelength);
  return adjoint_propagate(make_plan(field.height(), field.pitch(), distance, wavelength), field);
}

ComplexGrid apply_transfer_periodic(const ComplexGrid& field, double distance,
                                    double wavelength) {
  check_field(field, wavelength);
  const PropagationPlan plan =
      make_plan(field.height(), field.pitch(), distance, wavelength, 1);
  ComplexGrid out(plan.grid_side, plan.grid_side, field.pitch());
  apply_plan(plan, field, out, false);
  return out;
}

ComplexGrid direct_rs_reference(const ComplexGrid& field, double distance,
                                double wavelength) {
  check_field(field, wavelength);
  if (!(distance > 0.0)) throw ConfigError("direct_rs_reference: distance must be positive");
  if (field.size() > 4096) throw ConfigError("direct_rs_reference: grid too large (> 4096 samples)");

  const int g = field.height();
  const double pitch = field.pitch();
  const double area = pitch * pitch;
  ComplexGrid out(g, g, pitch);

  for (int tr = 0; tr < g; ++tr) {
    for (int tc = 0; tc < g; ++tc) {
      Complex acc{0.0, 0.0};
      for (int sr = 0; sr < g; ++sr) {
        for (int sc = 0; sc < g; ++sc) {
          const Complex src = field.at(sr, sc);
          if (src == Complex{0.0, 0.0}) continue;
          const double dx = (tc - sc) * pitch;
          const double dy = (tr - sr) * pitch;
          const double r = std::sqrt(dx * dx + dy * dy + distance * distance);
          // (d/r^2) * (1/(2*pi*r) + 1/(j*lambda)) * exp(j*2*pi*r/lambda) * pitch^2
          const Complex coeff =
              Complex{1.0 / (2.0 * kPi * r), -1.0 / wavelength} * (distance / (r * r)) * area;
          const double phase = 2.0 * kPi * r / wavelength;
          acc += src * coeff * Complex{std::cos(phase), std::sin(phase)};
        }
      }
      out.at(tr, tc) = acc;
    }
  }
  return out;
}

}  // namespace wdmdiff
