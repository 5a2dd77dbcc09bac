#include "wdmdiff/stack.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wdmdiff/rng.hpp"
#include "wdmdiff/util.hpp"

namespace wdmdiff {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLadderLow = 0.9125;
constexpr double kLadderHigh = 1.0875;
}  // namespace

int StackGeometry::grid_side() const {
  int g = std::max(layer_side, kFovBin * fov_side);
  if (g % 2 != 0) ++g;
  return g;
}

int StackGeometry::layer_offset() const { return (grid_side() - layer_side) / 2; }

std::vector<double> StackGeometry::default_ladder(int n_w) {
  if (n_w < 1) throw ConfigError("channel count must be >= 1");
  if (n_w == 1) return {1.0};
  std::vector<double> ladder(n_w);
  const double step = (kLadderHigh - kLadderLow) / (n_w - 1);
  for (int w = 0; w < n_w; ++w) ladder[w] = kLadderLow + step * w;
  return ladder;
}

int StackGeometry::side_for_neuron_budget(long n_total, int layer_count) {
  if (n_total < 1 || layer_count < 1) throw ConfigError("neuron budget and layer count must be >= 1");
  const double per_layer = static_cast<double>(n_total) / layer_count;
  const int side = static_cast<int>(std::llround(std::sqrt(per_layer)));
  return std::max(side, 1);
}

void StackGeometry::validate() const {
  if (layer_count < 1) throw ConfigError("geometry: layer count must be >= 1");
  if (layer_side < 1) throw ConfigError("geometry: layer side must be >= 1");
  if (fov_side < 1) throw ConfigError("geometry: FOV side must be >= 1");
  if (!(lambda_m_meters > 0.0)) throw ConfigError("geometry: reference wavelength must be positive");
  if (channels.empty()) throw ConfigError("geometry: channel set is empty");
  for (double w : channels)
    if (!(w > 0.0)) throw ConfigError("geometry: channel wavelengths must be positive");
}

double latent_thickness(double h_v, double h_max) {
  return 0.5 * h_max * (std::sin(h_v) + 1.0);
}

double latent_thickness_grad(double h_v, double h_max) {
  return 0.5 * h_max * std::cos(h_v);
}

double quantize_thickness(double h_learnable, double h_max, int bit_depth) {
  if (bit_depth == kContinuousDepth) return h_learnable;
  if (bit_depth < 1 || bit_depth > 32)
    throw ConfigError("bit depth must be 1..32 or continuous");
  const double levels = std::pow(2.0, bit_depth) - 1.0;
  const double step = h_max / levels;
  double idx = std::floor(h_learnable / step + 0.5);  // ties round up
  if (idx < 0.0) idx = 0.0;
  if (idx > levels) idx = levels;
  return idx * step;
}

Complex transmission(double h, double wavelength, const IndexSample& index) {
  const double arg = 2.0 * kPi * h / wavelength;
  return std::exp(Complex{-index.kappa * arg, (index.n - 1.0) * arg});
}

Complex transmission_log_grad(double wavelength, const IndexSample& index) {
  const double arg = 2.0 * kPi / wavelength;
  return Complex{-index.kappa * arg, (index.n - 1.0) * arg};
}

DiffractiveModel build_model(const StackGeometry& geometry, const Material& material,
                             uint64_t seed, int bit_depth) {
  geometry.validate();
  if (bit_depth != kContinuousDepth && (bit_depth < 1 || bit_depth > 32))
    throw ConfigError("bit depth must be 1..32 or continuous");
  // Material must cover the whole channel set.
  for (double w : geometry.channels) material.complex_index(w);

  DiffractiveModel model;
  model.geometry = geometry;
  model.material = material;
  model.bit_depth = bit_depth;
  model.init_seed = seed;
  const size_t neurons = static_cast<size_t>(geometry.layer_side) * geometry.layer_side;
  model.latents.resize(geometry.layer_count);
  for (int k = 0; k < geometry.layer_count; ++k) {
    Pcg32 gen = substream(seed, {kStreamLatent, static_cast<uint64_t>(k)});
    model.latents[k].resize(neurons);
    for (size_t i = 0; i < neurons; ++i) model.latents[k][i] = gen.next_normal();
  }
  return model;
}

std::vector<double> layer_thickness(const DiffractiveModel& model, int layer) {
  const auto& lat = model.latents.at(layer);
  std::vector<double> h(lat.size());
  for (size_t i = 0; i < lat.size(); ++i) {
    const double learn = latent_thickness(lat[i], model.h_max);
    h[i] = quantize_thickness(learn, model.h_max, model.bit_depth) + model.h_base;
  }
  return h;
}

StackEvaluator::StackEvaluator(const DiffractiveModel& model) : model_(model) {
  model_.geometry.validate();
  if (static_cast<int>(model_.latents.size()) != model_.geometry.layer_count)
    throw ConfigError("model: latent layer count does not match geometry");
  const size_t neurons =
      static_cast<size_t>(model_.geometry.layer_side) * model_.geometry.layer_side;
  for (const auto& layer : model_.latents)
    if (layer.size() != neurons) throw ConfigError("model: latent layer size mismatch");

  thickness_.reserve(neurons * model_.geometry.layer_count);
  for (int k = 0; k < model_.geometry.layer_count; ++k) {
    auto h = layer_thickness(model_, k);
    thickness_.insert(thickness_.end(), h.begin(), h.end());
  }
  channels_.reserve(model_.geometry.channels.size());
  for (double w : model_.geometry.channels) channels_.push_back(make_tables(w));
}

StackEvaluator::ChannelTables StackEvaluator::make_tables(double wavelength) const {
  const StackGeometry& geo = model_.geometry;
  ChannelTables t;
  t.wavelength = wavelength;
  t.index = model_.material.complex_index(wavelength);
  const int g = geo.grid_side();
  const int off = geo.layer_offset();
  const int side = geo.layer_side;
  t.layer_t.resize(geo.layer_count);
  for (int k = 0; k < geo.layer_count; ++k) {
    auto& grid = t.layer_t[k];
    grid.assign(static_cast<size_t>(g) * g, Complex{0.0, 0.0});
    const double* h = thickness_.data() + static_cast<size_t>(k) * side * side;
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        grid[static_cast<size_t>(r + off) * g + (c + off)] =
            transmission(h[static_cast<size_t>(r) * side + c], wavelength, t.index);
  }
  t.plan = cached_plan(g, kSimulationPitch, geo.interplane_distance(), wavelength);
  return t;
}

const StackEvaluator::ChannelTables& StackEvaluator::tables_for(int channel,
                                                                double wavelength) const {
  if (channel < 0 || channel >= channel_count())
    throw ConfigError("channel index out of range: " + std::to_string(channel));
  const ChannelTables& base = channels_[channel];
  if (wavelength == base.wavelength) return base;
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  const uint64_t key = std::bit_cast<uint64_t>(wavelength);
  std::lock_guard<std::mutex> lock(override_mutex_);
  auto it = override_cache_.find(key);
  if (it == override_cache_.end()) {
    it = override_cache_.emplace(key, std::make_unique<ChannelTables>(make_tables(wavelength)))
             .first;
  }
  return *it->second;
}

FovField StackEvaluator::run(const ChannelTables& t, const FovField& input, Tape* tape) const {
  const StackGeometry& geo = model_.geometry;
  if (input.side != geo.fov_side) throw ConfigError("forward: input FOV side mismatch");
  if (!input.all_finite()) throw NumericError("forward: non-finite input");
  forward_count_.fetch_add(1, std::memory_order_relaxed);

  const int g = geo.grid_side();
  if (tape) tape->arrive.resize(geo.layer_count);

  ComplexGrid cur = embed_fov(input, g);
  cur = propagate(*t.plan, cur);
  for (int k = 0; k < geo.layer_count; ++k) {
    if (tape) tape->arrive[k] = cur;
    auto data = cur.data();
    const auto& mask = t.layer_t[k];
    for (size_t i = 0; i < data.size(); ++i) data[i] *= mask[i];
    cur = propagate(*t.plan, cur);
  }
  if (tape) tape->final_grid = cur;
  FovField out = bin_fov(cur, geo.fov_side);
  if (tape) tape->output = out;
  return out;
}

FovField StackEvaluator::forward(const FovField& input, int channel) const {
  if (channel < 0 || channel >= channel_count())
    throw ConfigError("channel index out of range: " + std::to_string(channel));
  return run(channels_[channel], input, nullptr);
}

FovField StackEvaluator::forward_at(const FovField& input, int channel,
                                    double wavelength) const {
  return run(tables_for(channel, wavelength), input, nullptr);
}

FovField StackEvaluator::forward_tape(const FovField& input, int channel, Tape& tape) const {
  if (channel < 0 || channel >= channel_count())
    throw ConfigError("channel index out of range: " + std::to_string(channel));
  return run(channels_[channel], input, &tape);
}

void StackEvaluator::backward(const Tape& tape, int channel, std::span<const Complex> obar,
                              std::vector<std::vector<double>>& grads) const {
  const StackGeometry& geo = model_.geometry;
  const ChannelTables& t = channels_.at(channel);
  const int g = geo.grid_side();
  const int off = geo.layer_offset();
  const int side = geo.layer_side;

  // Adjoint of the output binning: replicate and scale by 1/16.
  FovField obar_f(geo.fov_side, std::vector<Complex>(obar.begin(), obar.end()));
  ComplexGrid abar = embed_fov(obar_f, g);
  for (Complex& z : abar.data()) z *= 0.0625;

  const Complex cgrad = transmission_log_grad(t.wavelength, t.index);
  for (int k = geo.layer_count - 1; k >= 0; --k) {
    abar = adjoint_propagate(*t.plan, abar);  // cotangent at the modulated field
    const auto& mask = t.layer_t[k];
    const ComplexGrid& arrive = tape.arrive.at(k);
    auto& gk = grads.at(k);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const size_t gi = static_cast<size_t>(r + off) * g + (c + off);
        const Complex dmod = arrive.data()[gi] * mask[gi] * cgrad;  // d(m_k)/dh at this neuron
        gk[static_cast<size_t>(r) * side + c] +=
            2.0 * (abar.data()[gi] * std::conj(dmod)).real();
      }
    }
    if (k > 0) {
      auto data = abar.data();
      for (size_t i = 0; i < data.size(); ++i) data[i] *= std::conj(mask[i]);
    }
  }
}

namespace {

void write_exact(std::ostream& out, const void* p, size_t bytes) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

std::string material_line(const Material& m) {
  if (m.is_constant()) {
    const IndexSample s = m.complex_index(1.0);
    return "constant " + fmt_double(s.n) + " " + fmt_double(s.kappa);
  }
  return "table " + m.name();
}

Material material_from_line(const std::string& line) {
  std::istringstream in(line);
  std::string kind;
  in >> kind;
  if (kind == "constant") {
    std::string n, k;
    in >> n >> k;
    const double nv = parse_double(n);
    const double kv = parse_double(k);
    if (nv == 1.72 && kv == 0.0) return Material::dispersion_free();
    return Material::constant(nv, kv);
  }
  if (kind == "table") {
    std::string path;
    std::getline(in, path);
    if (!path.empty() && path.front() == ' ') path.erase(path.begin());
    return Material::from_table_file(path);
  }
  throw IoError("checkpoint: unknown material kind '" + kind + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const DiffractiveModel& model) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  const StackGeometry& geo = model.geometry;
  out << "WDMDIFF-CHECKPOINT v1\n";
  out << "layer_count " << geo.layer_count << "\n";
  out << "layer_side " << geo.layer_side << "\n";
  out << "fov_side " << geo.fov_side << "\n";
  out << "lambda_m_meters " << fmt_double(geo.lambda_m_meters) << "\n";
  out << "channels " << geo.channel_count();
  for (double w : geo.channels) out << " " << fmt_double(w);
  out << "\n";
  out << "material " << material_line(model.material) << "\n";
  out << "h_base " << fmt_double(model.h_base) << "\n";
  out << "h_max " << fmt_double(model.h_max) << "\n";
  out << "bit_depth " << model.bit_depth << "\n";
  out << "init_seed " << model.init_seed << "\n";
  out << "epoch " << model.epoch << "\n";
  out << "END\n";
  for (const auto& layer : model.latents)
    write_exact(out, layer.data(), layer.size() * sizeof(double));
  if (!out) throw IoError("short write to checkpoint: " + path);
}

DiffractiveModel load_checkpoint(const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint reader assumes a little-endian host");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "WDMDIFF-CHECKPOINT v1")
    throw IoError("not a checkpoint file: " + path);

  DiffractiveModel model;
  StackGeometry& geo = model.geometry;
  bool have_material = false;
  while (std::getline(in, line) && line != "END") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "layer_count") ls >> geo.layer_count;
    else if (key == "layer_side") ls >> geo.layer_side;
    else if (key == "fov_side") ls >> geo.fov_side;
    else if (key == "lambda_m_meters") {
      std::string v;
      ls >> v;
      geo.lambda_m_meters = parse_double(v);
    } else if (key == "channels") {
      int count = 0;
      ls >> count;
      geo.channels.resize(count);
      for (int i = 0; i < count; ++i) {
        std::string v;
        ls >> v;
        geo.channels[i] = parse_double(v);
      }
    } else if (key == "material") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
      model.material = material_from_line(rest);
      have_material = true;
    } else if (key == "h_base") {
      std::string v;
      ls >> v;
      model.h_base = parse_double(v);
    } else if (key == "h_max") {
      std::string v;
      ls >> v;
      model.h_max = parse_double(v);
    } else if (key == "bit_depth") ls >> model.bit_depth;
    else if (key == "init_seed") {
      std::string v;
      ls >> v;
      model.init_seed = parse_u64(v);
    } else if (key == "epoch") ls >> model.epoch;
    else throw IoError("checkpoint: unknown header key '" + key + "'");
    if (ls.fail()) throw IoError("checkpoint: malformed header line '" + line + "'");
  }
  if (line != "END") throw IoError("checkpoint: missing END marker");
  if (!have_material) throw IoError("checkpoint: missing material");
  geo.validate();

  const size_t neurons = static_cast<size_t>(geo.layer_side) * geo.layer_side;
  model.latents.assign(geo.layer_count, std::vector<double>(neurons));
  for (auto& layer : model.latents) {
    in.read(reinterpret_cast<char*>(layer.data()),
            static_cast<std::streamsize>(neurons * sizeof(double)));
    if (static_cast<size_t>(in.gcount()) != neurons * sizeof(double))
      throw IoError("checkpoint: truncated latent payload");
  }
  return model;
}

}  // namespace wdmdiff
