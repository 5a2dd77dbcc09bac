#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "wdmdiff/matrix.hpp"

namespace wdmdiff {

/// Target transformation matrices, one per wavelength channel. Entries are
/// amp * exp(j*phase) with amp ~ U[0,1) and phase ~ U[0,2*pi), drawn in
/// column-major entry order from a per-channel substream.
struct TransformSet {
  int n_i = 0;
  int n_o = 0;
  uint64_t master_seed = 0;
  std::vector<CMatrix> matrices;       // n_w matrices, each n_o x n_i
  std::vector<uint64_t> seeds;         // per-matrix substream seeds

  int channel_count() const { return static_cast<int>(matrices.size()); }
};

TransformSet gen_transforms(int n_w, int n_i, int n_o, uint64_t master_seed);

// Largest |CosSim| over all channel pairs (the generated transforms are
// expected to be nearly mutually orthogonal).
double max_pairwise_cosine(const TransformSet& t);

struct SamplePair {
  std::vector<Complex> input;   // length n_i
  std::vector<Complex> target;  // length n_o, exactly A * input
};

enum class Split { train = 0, val = 1, test = 2 };
const char* split_name(Split s);

struct SplitCounts {
  long train = 55000;
  long val = 5000;
  long test = 10000;
  long of(Split s) const;
};

/// Seeded input/target pairs per (channel, split). Splits materialize lazily
/// on first access from independent per-(channel, split) substreams, so
/// regenerating one channel never touches the others.
class Dataset {
 public:
  Dataset(const TransformSet& transforms, SplitCounts counts, uint64_t master_seed);

  int channel_count() const { return static_cast<int>(transforms_.matrices.size()); }
  const SplitCounts& counts() const { return counts_; }
  uint64_t master_seed() const { return master_seed_; }
  const TransformSet& transforms() const { return transforms_; }

  const std::vector<SamplePair>& split(int channel, Split s) const;

 private:
  TransformSet transforms_;
  SplitCounts counts_;
  uint64_t master_seed_;
  mutable std::vector<std::unique_ptr<std::vector<SamplePair>>> cache_;  // [channel*3 + split]
  mutable std::mutex mutex_;
};

// Generate one (channel, split) worth of pairs without a Dataset object.
std::vector<SamplePair> gen_split(const CMatrix& transform, int channel, Split s,
                                  long count, uint64_t master_seed);

// Optional on-disk cache, one file per (channel, split): textual header
// (seed, shape, count) followed by raw little-endian float64 re/im pairs,
// input vector then target vector per sample.
void write_dataset_cache(const std::string& path, const Dataset& dataset, int channel,
                         Split s);
std::vector<SamplePair> read_dataset_cache(const std::string& path);

// Transform matrix container (textual header + raw row-major complex payload).
void write_transform_file(const std::string& path, const TransformSet& t, int channel);
CMatrix read_transform_file(const std::string& path);

}  // namespace wdmdiff
