#pragma once

#include <span>
#include <string>
#include <vector>

#include "treemil/autodiff.hpp"
#include "treemil/dataset.hpp"
#include "treemil/encoder.hpp"

namespace treemil {

enum class Direction { TD, BU };

Direction parse_direction(const std::string& s);
const char* direction_name(Direction d);

// Two-way stance head: softmax(W_o h + W_c h_claim + b_o); the target-class
// probability is component 0.
struct StanceHead {
  NodePtr Wo, Wc;  // [2 x H]
  NodePtr bo;      // [2]

  static StanceHead init(std::size_t hidden, Rng& rng);
  void register_into(ParamRegistry& reg, const std::string& prefix) const;
};

NodePtr stance_prob(const NodePtr& ctx, const NodePtr& h_claim, const StanceHead& head);

// One attention distribution recorded during a forward pass, for the
// normalization checks and the case-study dumps.
struct AttnRecord {
  enum class Kind { Subtree, Path, Leaf, Bank };
  Kind kind;
  int anchor = -1;           // subtree root or path leaf; -1 otherwise
  std::vector<int> members;  // node indices (classifier indices for Bank)
  std::vector<double> weights;
};

// Bottom-up contexts: children are sum-pooled into the neighbor state of a
// GRU-style transition cell; leaves see a zero context. node_inputs[j] is the
// encoded text of node j (claim encoder for node 0, post encoder otherwise).
std::vector<NodePtr> bu_contexts(const PropagationTree& tree,
                                 std::span<const NodePtr> node_inputs, const GruParams& cell);

// Top-down contexts: the parent's context is the neighbor state; the root
// sees a zero context.
std::vector<NodePtr> td_contexts(const PropagationTree& tree,
                                 std::span<const NodePtr> node_inputs, const GruParams& cell);

struct BuResult {
  std::vector<NodePtr> raw_stance;  // p_j for every node
  std::vector<NodePtr> agg_stance;  // aggregated subtree stance per node
  NodePtr claim_prob;               // aggregated value at the root
  std::vector<AttnRecord> attention;
};

// Recursive subtree attention: at each internal node i the attention set is
// {i} with its raw stance plus its children with their aggregated stances;
// leaves pass their raw stance through.
BuResult bu_aggregate(const PropagationTree& tree, std::span<const NodePtr> contexts,
                      const NodePtr& h_claim, const StanceHead& head);

// Attention over the root->leaf path (root included); aggregates the raw
// per-node stance probabilities along the path.
NodePtr td_path_stance(const PropagationTree& tree, int leaf,
                       std::span<const NodePtr> contexts, std::span<const NodePtr> raw_stance,
                       const NodePtr& h_claim, AttnRecord* record);

struct TdResult {
  std::vector<NodePtr> raw_stance;   // p_j for every node
  std::vector<int> leaves;
  std::vector<NodePtr> path_stance;  // s_l aligned with leaves
  NodePtr claim_prob;                // leaf-attention aggregate
  std::vector<AttnRecord> attention;
};

TdResult td_aggregate(const PropagationTree& tree, std::span<const NodePtr> contexts,
                      const NodePtr& h_claim, const StanceHead& head);

}  // namespace treemil
