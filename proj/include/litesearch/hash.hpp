#pragma once

#include <cstdint>
#include <string_view>

namespace litesearch {

// All stochastic behavior in the library is derived from counter-based
// hashing rather than stateful RNGs, so runs replay bit-identically and
// results are independent of worker scheduling.

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr uint64_t mix(uint64_t a, uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

constexpr uint64_t mix(uint64_t a, uint64_t b, uint64_t c) {
  return mix(mix(a, b), c);
}

constexpr uint64_t mix(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return mix(mix(a, b, c), d);
}

constexpr uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Uniform double in [0, 1) from a 64-bit hash.
constexpr double u01(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stream tags keep independent random purposes from colliding on the
// same (seed, counter) pair.
enum Stream : uint64_t {
  kStreamQuestion = 0x51,
  kStreamTask = 0x54,
  kStreamVote = 0x56,
  kStreamExpand = 0x45,
  kStreamDfs = 0x44,
  kStreamBfs = 0x42,
  kStreamDifficulty = 0x46,
  kStreamCalibration = 0x43,
  kStreamValueNoise = 0x4E,
};

}  // namespace litesearch
