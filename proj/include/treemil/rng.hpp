#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "treemil/errors.hpp"

namespace treemil {

// Deterministic RNG wrapper. All randomness in the project flows through this
// class so that runs are reproducible bit-for-bit from a single seed. The
// uniform mapping is done by hand instead of std::uniform_real_distribution to
// keep draws identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed != 0 ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // xorshift64* — small, fast, and good enough for initialization/sampling.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    if (n == 0) throw ContractError("Rng::index: n must be positive");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Draw from a categorical distribution. Probabilities must sum to ~1.
  std::size_t categorical(std::span<const double> probs) {
    if (probs.empty()) throw ContractError("Rng::categorical: empty distribution");
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return probs.size() - 1;
  }

  // Fisher-Yates, backed by this generator for cross-platform determinism.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Derive an independent stream seed from (seed, tag, a, b). Used to give
  // each classifier / epoch / purpose its own reproducible stream.
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                              std::uint64_t b = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
      h *= 0xbf58476d1ce4e5b9ULL;
      h ^= h >> 32;
    };
    for (char c : tag) mix(static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    mix(a + 1);
    mix(b + 1);
    return h != 0 ? h : 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace treemil
