#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "convodiv/errors.hpp"

// Deterministic randomness utilities. Every stochastic computation in the
// library draws from an std::mt19937_64 derived from a root seed plus a
// cell key (individual id, stage index, ...), so results are independent of
// worker count and scheduling. std::*_distribution adapters are avoided on
// purpose: their algorithms are implementation-defined, while mt19937_64
// output is pinned by the standard.

namespace convodiv::rng {

inline std::uint64_t hash_bytes(std::string_view s) {
  // FNV-1a 64.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key_of(std::uint64_t v) { return v; }
inline std::uint64_t key_of(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
inline std::uint64_t key_of(std::string_view s) { return hash_bytes(s); }
inline std::uint64_t key_of(const std::string& s) { return hash_bytes(s); }
inline std::uint64_t key_of(const char* s) { return hash_bytes(s); }

template <class... Parts>
std::uint64_t substream_seed(std::uint64_t root, const Parts&... parts) {
  std::uint64_t s = mix(0x243f6a8885a308d3ULL, root);
  ((s = mix(s, key_of(parts))), ...);
  return s;
}

template <class... Parts>
std::mt19937_64 substream(std::uint64_t root, const Parts&... parts) {
  return std::mt19937_64(substream_seed(root, parts...));
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  if (n == 0) throw ParameterError("uniform_below: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& gen, double p) { return uniform01(gen) < p; }

// Knuth's product method; fine for the small means used here (<= ~60).
inline int poisson(std::mt19937_64& gen, double mean) {
  if (mean < 0) throw ParameterError("poisson: mean must be non-negative");
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(gen);
  } while (p > limit);
  return k - 1;
}

template <class T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

// k distinct indices drawn uniformly from [0, n), in draw order.
inline std::vector<std::size_t> sample_indices(std::mt19937_64& gen, std::size_t n, std::size_t k) {
  if (k > n) throw InsufficientDataError("sample_indices: k exceeds population size");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace convodiv::rng
