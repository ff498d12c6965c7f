#pragma once

#include <array>
#include <string>
#include <vector>

#include "treemil/errors.hpp"

namespace treemil {

// Claim veracity classes, in the fixed tie-break order N < T < F < U.
enum class Veracity : int { N = 0, T = 1, F = 2, U = 3 };

// Post stance classes, in the fixed tie-break order S < D < Q < C.
enum class Stance : int { S = 0, D = 1, Q = 2, C = 3 };

constexpr std::size_t kNumStances = 4;
constexpr std::array<Stance, kNumStances> kAllStances = {Stance::S, Stance::D, Stance::Q,
                                                         Stance::C};

inline char veracity_char(Veracity v) { return "NTFU"[static_cast<int>(v)]; }
inline char stance_char(Stance s) { return "SDQC"[static_cast<int>(s)]; }

Veracity parse_veracity(const std::string& s);
Stance parse_stance(const std::string& s);

// The veracity label set of a corpus: NTFU (16 classifiers) or TFU (12).
struct VeracitySet {
  std::vector<Veracity> classes;

  static VeracitySet ntfu() {
    return {{Veracity::N, Veracity::T, Veracity::F, Veracity::U}};
  }
  static VeracitySet tfu() { return {{Veracity::T, Veracity::F, Veracity::U}}; }
  static VeracitySet parse(const std::string& name);

  std::size_t size() const { return classes.size(); }
  bool contains(Veracity v) const;
  // Position of v within the set; ContractError if absent.
  std::size_t index_of(Veracity v) const;
  std::string name() const;
};

}  // namespace treemil
