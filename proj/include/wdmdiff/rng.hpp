#pragma once

#include <cstdint>
#include <initializer_list>

namespace wdmdiff {

// All randomness in the project flows through the generators below so that a
// (seed, parameters) pair reproduces the same bytes on every run. The
// algorithms are pinned:
//
//  * pcg32: PCG XSH-RR 64/32 (state s <- s*6364136223846793005 + inc,
//    output rotr32((s ^ (s >> 18)) >> 27, s >> 59)), seeded exactly like the
//    reference pcg32_srandom.
//  * mix64: the SplitMix64 finalizer, used to derive substream seeds
//    hierarchically from a master seed and a path of integer labels.
//  * doubles in [0,1) take the top 53 bits of two 32-bit draws (high first).
//  * normals use the Box-Muller cosine branch on two consecutive uniforms.

uint64_t mix64(uint64_t x);

// Hierarchical substream derivation: fold each path label into the hash.
// Distinct paths give independent substreams.
uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path);

// Substream labels (first path element).
enum : uint64_t {
  kStreamTransform = 1,  // {kStreamTransform, channel}
  kStreamDataset = 2,    // {kStreamDataset, channel, split}
  kStreamLatent = 3,     // {kStreamLatent, layer}
  kStreamModel = 4,      // default model-init seed derived from the master seed
};

class Pcg32 {
 public:
  Pcg32(uint64_t seed, uint64_t stream);

  uint32_t next_u32();
  uint64_t next_u64();
  double next_unit();    // [0, 1), 53-bit resolution
  double next_normal(); // standard normal

 private:
  uint64_t state_;
  uint64_t inc_;
};

// Convenience: generator for a derived substream.
Pcg32 substream(uint64_t master, std::initializer_list<uint64_t> path);

}  // namespace wdmdiff
