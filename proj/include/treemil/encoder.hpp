#pragma once

#include <string>
#include <vector>

#include "treemil/autodiff.hpp"
#include "treemil/checkpoint.hpp"
#include "treemil/rng.hpp"

namespace treemil {

// Gate parameters for one GRU: update (z), reset (r) and candidate (h)
// weights over the input [in x H] and hidden state [H x H], plus biases.
struct GruParams {
  NodePtr Wz, Wr, Wh;  // [in x H]
  NodePtr Uz, Ur, Uh;  // [H x H]
  NodePtr bz, br, bh;  // [H]

  static GruParams init(std::size_t in_dim, std::size_t hidden, Rng& rng);
  void register_into(ParamRegistry& reg, const std::string& prefix) const;
  std::size_t hidden() const { return bz->value.size(); }
};

struct GruStep {
  NodePtr z, r, candidate, h;
};

// One GRU transition: h' = (1-z) .* h_prev + z .* tanh(x W_h + (r .* h_prev) U_h + b_h).
GruStep gru_cell_detail(const NodePtr& x, const NodePtr& h_prev, const GruParams& p);
NodePtr gru_cell(const NodePtr& x, const NodePtr& h_prev, const GruParams& p);

// Left-to-right GRU over embedded tokens from a zero initial state; the final
// hidden state is the sequence representation.
NodePtr encode_sequence(const std::vector<int>& tokens, const NodePtr& embedding,
                        const GruParams& p);

}  // namespace treemil
