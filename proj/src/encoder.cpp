#include "treemil/encoder.hpp"

#include "treemil/errors.hpp"

namespace treemil {

GruParams GruParams::init(std::size_t in_dim, std::size_t hidden, Rng& rng) {
  auto w = [&] { return parameter(Tensor::uniform(Shape{in_dim, hidden}, rng, -0.1, 0.1)); };
  auto u = [&] { return parameter(Tensor::uniform(Shape{hidden, hidden}, rng, -0.1, 0.1)); };
  auto b = [&] { return parameter(Tensor::uniform(Shape{hidden}, rng, -0.1, 0.1)); };
  GruParams p;
  p.Wz = w();
  p.Wr = w();
  p.Wh = w();
  p.Uz = u();
  p.Ur = u();
  p.Uh = u();
  p.bz = b();
  p.br = b();
  p.bh = b();
  return p;
}

void GruParams::register_into(ParamRegistry& reg, const std::string& prefix) const {
  reg.add(prefix + ".Wz", Wz);
  reg.add(prefix + ".Wr", Wr);
  reg.add(prefix + ".Wh", Wh);
  reg.add(prefix + ".Uz", Uz);
  reg.add(prefix + ".Ur", Ur);
  reg.add(prefix + ".Uh", Uh);
  reg.add(prefix + ".bz", bz);
  reg.add(prefix + ".br", br);
  reg.add(prefix + ".bh", bh);
}

GruStep gru_cell_detail(const NodePtr& x, const NodePtr& h_prev, const GruParams& p) {
  GruStep s;
  s.z = sigmoid(add(add(matmul(x, p.Wz), matmul(h_prev, p.Uz)), p.bz));
  s.r = sigmoid(add(add(matmul(x, p.Wr), matmul(h_prev, p.Ur)), p.br));
  s.candidate = tanh_op(add(add(matmul(x, p.Wh), matmul(mul(s.r, h_prev), p.Uh)), p.bh));
  NodePtr ones = constant(Tensor(h_prev->value.shape(), 1.0));
  s.h = add(mul(sub(ones, s.z), h_prev), mul(s.z, s.candidate));
  return s;
}

NodePtr gru_cell(const NodePtr& x, const NodePtr& h_prev, const GruParams& p) {
  return gru_cell_detail(x, h_prev, p).h;
}

NodePtr encode_sequence(const std::vector<int>& tokens, const NodePtr& embedding,
                        const GruParams& p) {
  if (tokens.empty()) {
    throw ContractError("encode_sequence: empty token sequence (expected at least [EMPTY])");
  }
  NodePtr h = constant(Tensor(Shape{p.hidden()}));
  for (int t : tokens) {
    NodePtr x = embed_row(embedding, static_cast<std::size_t>(t));
    h = gru_cell(x, h, p);
  }
  return h;
}

}  // namespace treemil
