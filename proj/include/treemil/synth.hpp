#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "treemil/dataset.hpp"
#include "treemil/labels.hpp"

namespace treemil {

// Planted-correlation synthetic data: veracity decides the root stance
// distribution and the parent->child stance transitions; stance decides the
// token lexicon. Trees are random recursive trees (each new node attaches
// uniformly to an earlier one).
struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t claims_per_class = 100;
  VeracitySet classes = VeracitySet::ntfu();
  std::size_t tree_size_min = 5;
  std::size_t tree_size_max = 15;
  std::size_t post_len_min = 3;
  std::size_t post_len_max = 8;
  double noise_rate = 0.1;
  // Indexed by veracity enum value; rows/columns follow the S,D,Q,C order.
  std::array<std::array<double, kNumStances>, 4> root_stance{};
  std::array<std::array<std::array<double, kNumStances>, kNumStances>, 4> transition{};
  // One token list per stance; disjoint by default.
  std::array<std::vector<std::string>, kNumStances> lexicons;

  void validate() const;

  static SynthConfig defaults();
  static SynthConfig from_json(const std::string& text);
  std::string to_json() const;
};

// Deterministic given cfg.seed. Every node (root included) carries its
// planted gold stance; claims carry their gold veracity.
std::vector<PropagationTree> generate_synthetic(const SynthConfig& cfg);

}  // namespace treemil
