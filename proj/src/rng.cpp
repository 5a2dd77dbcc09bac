#include "wdmdiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace wdmdiff {

uint64_t mix64(uint64_t x) {
  uint64_t z = x + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t h = mix64(master);
  for (uint64_t w : path) h = mix64(h + w);
  return h;
}

static uint32_t rotr32(uint32_t x, unsigned r) { return (x >> r) | (x << ((32u - r) & 31u)); }

Pcg32::Pcg32(uint64_t seed, uint64_t stream) : state_(0), inc_((stream << 1u) | 1u) {
  next_u32();
  state_ += seed;
  next_u32();
}

uint32_t Pcg32::next_u32() {
  const uint64_t old = state_;
  state_ = old * 6364136223846793005ull + inc_;
  const uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
  const unsigned rot = static_cast<unsigned>(old >> 59u);
  return rotr32(xorshifted, rot);
}

uint64_t Pcg32::next_u64() {
  const uint64_t hi = next_u32();
  const uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Pcg32::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Pcg32::next_normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Pcg32 substream(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t h = mix64(master);
  for (uint64_t w : path) h = mix64(h + w);
  const uint64_t seed = h;
  const uint64_t stream = mix64(h + 0x5851F42D4C957F2Dull);
  return Pcg32(seed, stream);
}

}  // namespace wdmdiff
