#include "wdmdiff/taskgen.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wdmdiff/errors.hpp"
#include "wdmdiff/rng.hpp"
#include "wdmdiff/util.hpp"

namespace wdmdiff {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex draw_entry(Pcg32& gen) {
  const double amp = gen.next_unit();
  const double phase = kTwoPi * gen.next_unit();
  return Complex{amp * std::cos(phase), amp * std::sin(phase)};
}
}  // namespace

TransformSet gen_transforms(int n_w, int n_i, int n_o, uint64_t master_seed) {
  if (n_w < 1) throw ConfigError("gen_transforms: channel count must be >= 1");
  if (n_i < 1 || n_o < 1) throw ConfigError("gen_transforms: matrix dimensions must be >= 1");
  TransformSet t;
  t.n_i = n_i;
  t.n_o = n_o;
  t.master_seed = master_seed;
  t.matrices.reserve(n_w);
  t.seeds.reserve(n_w);
  for (int w = 0; w < n_w; ++w) {
    t.seeds.push_back(derive_seed(master_seed, {kStreamTransform, static_cast<uint64_t>(w)}));
    Pcg32 gen = substream(master_seed, {kStreamTransform, static_cast<uint64_t>(w)});
    CMatrix m(n_o, n_i);
    for (int c = 0; c < n_i; ++c)
      for (int r = 0; r < n_o; ++r) m.at(r, c) = draw_entry(gen);
    t.matrices.push_back(std::move(m));
  }
  return t;
}

double max_pairwise_cosine(const TransformSet& t) {
  double worst = 0.0;
  for (int u = 0; u < t.channel_count(); ++u) {
    for (int v = u + 1; v < t.channel_count(); ++v) {
      const auto& a = t.matrices[u].a;
      const auto& b = t.matrices[v].a;
      const double cs = std::abs(cdot(a, b)) / std::sqrt(energy_of(a) * energy_of(b));
      worst = std::max(worst, cs);
    }
  }
  return worst;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

long SplitCounts::of(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return 0;
}

std::vector<SamplePair> gen_split(const CMatrix& transform, int channel, Split s,
                                  long count, uint64_t master_seed) {
  if (count < 0) throw ConfigError("gen_split: negative sample count");
  Pcg32 gen = substream(master_seed, {kStreamDataset, static_cast<uint64_t>(channel),
                                      static_cast<uint64_t>(s)});
  std::vector<SamplePair> out;
  out.reserve(count);
  for (long i = 0; i < count; ++i) {
    SamplePair p;
    p.input.resize(transform.cols);
    for (int n = 0; n < transform.cols; ++n) p.input[n] = draw_entry(gen);
    p.target = transform.matvec(p.input);
    out.push_back(std::move(p));
  }
  return out;
}

Dataset::Dataset(const TransformSet& transforms, SplitCounts counts, uint64_t master_seed)
    : transforms_(transforms), counts_(counts), master_seed_(master_seed),
      cache_(static_cast<size_t>(transforms.channel_count()) * 3) {
  if (counts.train < 1 || counts.val < 1 || counts.test < 1)
    throw ConfigError("dataset: split sizes must be >= 1");
}

const std::vector<SamplePair>& Dataset::split(int channel, Split s) const {
  if (channel < 0 || channel >= channel_count())
    throw ConfigError("dataset: channel index out of range");
  const size_t slot = static_cast<size_t>(channel) * 3 + static_cast<size_t>(s);
  std::lock_guard<std::mutex> lock(mutex_);
  if (!cache_[slot]) {
    cache_[slot] = std::make_unique<std::vector<SamplePair>>(
        gen_split(transforms_.matrices[channel], channel, s, counts_.of(s), master_seed_));
  }
  return *cache_[slot];
}

namespace {

void write_raw(std::ostream& out, const std::vector<Complex>& v) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(Complex)));
}

void read_raw(std::istream& in, std::vector<Complex>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(Complex)));
  if (static_cast<size_t>(in.gcount()) != v.size() * sizeof(Complex))
    throw IoError("dataset cache: truncated payload");
}

}  // namespace

void write_dataset_cache(const std::string& path, const Dataset& dataset, int channel,
                         Split s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset cache: " + path);
  const auto& pairs = dataset.split(channel, s);
  const uint64_t seed = derive_seed(dataset.master_seed(),
                                    {kStreamDataset, static_cast<uint64_t>(channel),
                                     static_cast<uint64_t>(s)});
  out << "WDMDIFF-DATASET v1\n";
  out << "channel " << channel << "\n";
  out << "split " << split_name(s) << "\n";
  out << "seed " << seed << "\n";
  out << "n_i " << dataset.transforms().n_i << "\n";
  out << "n_o " << dataset.transforms().n_o << "\n";
  out << "count " << pairs.size() << "\n";
  out << "END\n";
  for (const auto& p : pairs) {
    write_raw(out, p.input);
    write_raw(out, p.target);
  }
  if (!out) throw IoError("short write to dataset cache: " + path);
}

std::vector<SamplePair> read_dataset_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset cache: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "WDMDIFF-DATASET v1")
    throw IoError("not a dataset cache file: " + path);
  long n_i = 0, n_o = 0, count = 0;
  while (std::getline(in, line) && line != "END") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "n_i") ls >> n_i;
    else if (key == "n_o") ls >> n_o;
    else if (key == "count") ls >> count;
    else if (key == "channel" || key == "split" || key == "seed") continue;
    else throw IoError("dataset cache: unknown header key '" + key + "'");
  }
  if (line != "END") throw IoError("dataset cache: missing END marker");
  if (n_i < 1 || n_o < 1 || count < 0) throw IoError("dataset cache: bad header");
  std::vector<SamplePair> pairs(count);
  for (auto& p : pairs) {
    p.input.resize(n_i);
    p.target.resize(n_o);
    read_raw(in, p.input);
    read_raw(in, p.target);
  }
  return pairs;
}

void write_transform_file(const std::string& path, const TransformSet& t, int channel) {
  if (channel < 0 || channel >= t.channel_count())
    throw ConfigError("transform file: channel index out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write transform file: " + path);
  out << "WDMDIFF-TRANSFORM v1\n";
  out << "channel " << channel << "\n";
  out << "seed " << t.seeds[channel] << "\n";
  out << "rows " << t.n_o << "\n";
  out << "cols " << t.n_i << "\n";
  out << "END\n";
  write_raw(out, t.matrices[channel].a);
  if (!out) throw IoError("short write to transform file: " + path);
}

CMatrix read_transform_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transform file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "WDMDIFF-TRANSFORM v1")
    throw IoError("not a transform file: " + path);
  int rows = 0, cols = 0;
  while (std::getline(in, line) && line != "END") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "rows") ls >> rows;
    else if (key == "cols") ls >> cols;
    else if (key == "channel" || key == "seed") continue;
    else throw IoError("transform file: unknown header key '" + key + "'");
  }
  if (line != "END") throw IoError("transform file: missing END marker");
  if (rows < 1 || cols < 1) throw IoError("transform file: bad dimensions");
  CMatrix m(rows, cols);
  read_raw(in, m.a);
  return m;
}

}  // namespace wdmdiff
