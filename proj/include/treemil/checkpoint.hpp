#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "treemil/autodiff.hpp"
#include "treemil/tensor.hpp"

namespace treemil {

// std::map keeps parameter names in lexicographic order, which fixes the
// serialization order of the checkpoint file.
using ParamMap = std::map<std::string, Tensor>;

// Free-form metadata stored next to the parameters (direction, dims, vocab).
using MetaMap = std::map<std::string, std::string>;

struct Checkpoint {
  MetaMap meta;
  ParamMap params;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Named handles to the trainable nodes of a model component. Insertion order
// drives the optimizer slot layout; names drive (de)serialization.
class ParamRegistry {
 public:
  void add(std::string name, NodePtr p);
  void extend(const ParamRegistry& other);

  const std::vector<std::pair<std::string, NodePtr>>& items() const { return items_; }
  std::vector<NodePtr> nodes() const;

  ParamMap snapshot() const;
  // Restores values by name; throws ContractError on missing name or shape
  // mismatch. Extra names in the map are ignored.
  void restore(const ParamMap& values);

 private:
  std::vector<std::pair<std::string, NodePtr>> items_;
};

}  // namespace treemil
