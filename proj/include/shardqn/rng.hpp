#pragma once

#include <cmath>
#include <cstdint>

namespace shardqn {

// Counter-based splittable generator (splitmix64). Each (seed, stream)
// pair yields an independent, reproducible sequence, so every shard and
// every purpose (arrivals, service, routing) can draw from its own stream
// without coordination.
class RngStream {
 public:
  RngStream() : state_(mix(0x9e3779b97f4a7c15ull)) {}

  RngStream(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
    state_ = mix(state_ ^ 0xbf58476d1ce4e5b9ull);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_exponential(double rate) {
    return -std::log1p(-next_uniform()) / rate;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // 64-bit multiply-shift; bias is ~n/2^64, irrelevant at these scales.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace shardqn
