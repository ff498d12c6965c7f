#include "treemil/treemodel.hpp"

#include "treemil/errors.hpp"

namespace treemil {

Direction parse_direction(const std::string& s) {
  if (s == "td" || s == "TD") return Direction::TD;
  if (s == "bu" || s == "BU") return Direction::BU;
  throw ConfigError("unknown direction: '" + s + "' (expected td or bu)");
}

const char* direction_name(Direction d) { return d == Direction::TD ? "td" : "bu"; }

StanceHead StanceHead::init(std::size_t hidden, Rng& rng) {
  StanceHead h;
  h.Wo = parameter(Tensor::uniform(Shape{2, hidden}, rng, -0.1, 0.1));
  h.Wc = parameter(Tensor::uniform(Shape{2, hidden}, rng, -0.1, 0.1));
  h.bo = parameter(Tensor::uniform(Shape{2}, rng, -0.1, 0.1));
  return h;
}

void StanceHead::register_into(ParamRegistry& reg, const std::string& prefix) const {
  reg.add(prefix + ".Wo", Wo);
  reg.add(prefix + ".Wc", Wc);
  reg.add(prefix + ".bo", bo);
}

NodePtr stance_prob(const NodePtr& ctx, const NodePtr& h_claim, const StanceHead& head) {
  NodePtr logits = add(add(matmul(head.Wo, ctx), matmul(head.Wc, h_claim)), head.bo);
  return pick(softmax(logits), 0);
}

std::vector<NodePtr> bu_contexts(const PropagationTree& tree,
                                 std::span<const NodePtr> node_inputs, const GruParams& cell) {
  const auto children = tree.children();
  const std::size_t n = tree.size();
  std::vector<NodePtr> ctx(n);
  // Parents always precede children in index order, so descending order is a
  // valid post-order schedule.
  for (std::size_t i = n; i-- > 0;) {
    NodePtr pooled;
    if (children[i].empty()) {
      pooled = constant(Tensor(Shape{cell.hidden()}));
    } else {
      pooled = ctx[children[i][0]];
      for (std::size_t c = 1; c < children[i].size(); ++c) {
        pooled = add(pooled, ctx[children[i][c]]);
      }
    }
    ctx[i] = gru_cell(node_inputs[i], pooled, cell);
  }
  return ctx;
}

std::vector<NodePtr> td_contexts(const PropagationTree& tree,
                                 std::span<const NodePtr> node_inputs, const GruParams& cell) {
  const std::size_t n = tree.size();
  std::vector<NodePtr> ctx(n);
  for (std::size_t i = 0; i < n; ++i) {
    NodePtr parent_ctx = tree.nodes[i].parent ? ctx[*tree.nodes[i].parent]
                                              : constant(Tensor(Shape{cell.hidden()}));
    ctx[i] = gru_cell(node_inputs[i], parent_ctx, cell);
  }
  return ctx;
}

namespace {

// softmax over dot(ctx[member], h_claim); returns alpha plus the record.
NodePtr attention_weights(std::span<const int> members, std::span<const NodePtr> contexts,
                          const NodePtr& h_claim, AttnRecord::Kind kind, int anchor,
                          AttnRecord* record) {
  std::vector<NodePtr> logits;
  logits.reserve(members.size());
  for (int m : members) logits.push_back(dot(contexts[m], h_claim));
  NodePtr alpha = softmax(concat(logits));
  if (record) {
    record->kind = kind;
    record->anchor = anchor;
    record->members.assign(members.begin(), members.end());
    record->weights.assign(alpha->value.values().begin(), alpha->value.values().end());
  }
  return alpha;
}

}  // namespace

BuResult bu_aggregate(const PropagationTree& tree, std::span<const NodePtr> contexts,
                      const NodePtr& h_claim, const StanceHead& head) {
  const auto children = tree.children();
  const std::size_t n = tree.size();
  BuResult res;
  res.raw_stance.resize(n);
  res.agg_stance.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    res.raw_stance[j] = stance_prob(contexts[j], h_claim, head);
  }
  for (std::size_t i = n; i-- > 0;) {
    if (children[i].empty()) {
      res.agg_stance[i] = res.raw_stance[i];
      continue;
    }
    std::vector<int> members{static_cast<int>(i)};
    members.insert(members.end(), children[i].begin(), children[i].end());
    res.attention.emplace_back();
    NodePtr alpha = attention_weights(members, contexts, h_claim, AttnRecord::Kind::Subtree,
                                      static_cast<int>(i), &res.attention.back());
    std::vector<NodePtr> stances;
    stances.reserve(members.size());
    stances.push_back(res.raw_stance[i]);  // the node itself enters with its raw stance
    for (int c : children[i]) stances.push_back(res.agg_stance[c]);
    res.agg_stance[i] = dot(alpha, concat(stances));
  }
  res.claim_prob = res.agg_stance[0];
  return res;
}

NodePtr td_path_stance(const PropagationTree& tree, int leaf,
                       std::span<const NodePtr> contexts, std::span<const NodePtr> raw_stance,
                       const NodePtr& h_claim, AttnRecord* record) {
  const std::vector<int> path = tree.path_from_root(leaf);
  NodePtr alpha =
      attention_weights(path, contexts, h_claim, AttnRecord::Kind::Path, leaf, record);
  std::vector<NodePtr> stances;
  stances.reserve(path.size());
  for (int j : path) stances.push_back(raw_stance[j]);
  return dot(alpha, concat(stances));
}

TdResult td_aggregate(const PropagationTree& tree, std::span<const NodePtr> contexts,
                      const NodePtr& h_claim, const StanceHead& head) {
  TdResult res;
  const std::size_t n = tree.size();
  res.raw_stance.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    res.raw_stance[j] = stance_prob(contexts[j], h_claim, head);
  }
  res.leaves = tree.leaves();
  res.path_stance.reserve(res.leaves.size());
  for (int l : res.leaves) {
    res.attention.emplace_back();
    res.path_stance.push_back(td_path_stance(tree, l, contexts, res.raw_stance, h_claim,
                                             &res.attention.back()));
  }
  res.attention.emplace_back();
  NodePtr alpha = attention_weights(res.leaves, contexts, h_claim, AttnRecord::Kind::Leaf, -1,
                                    &res.attention.back());
  res.claim_prob = dot(alpha, concat(res.path_stance));
  return res;
}

}  // namespace treemil
