#include "treemil/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "treemil/errors.hpp"

namespace treemil {

namespace {

thread_local int no_grad_depth = 0;

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw NumericalError(std::string(op) + " produced a non-finite value");
  }
}

// Builds an op node. Parent edges and the backward rule are only kept when
// some parent participates in gradient computation and grad mode is on.
NodePtr make_op(const char* op, Tensor value, std::initializer_list<NodePtr> parents,
                std::function<void(Node&)> backprop) {
  check_finite(value, op);
  auto n = std::make_shared<Node>();
  n->op = op;
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  n->requires_grad = needs;
  if (needs) {
    n->parents.assign(parents);
    n->backprop = std::move(backprop);
    n->grad = Tensor::zeros_like(value);
  }
  n->value = std::move(value);
  return n;
}

void require_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (!a->value.same_shape(b->value)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a->value.shape_string() +
                         " vs " + b->value.shape_string());
  }
}

}  // namespace

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }

bool grad_enabled() { return no_grad_depth == 0; }

NodePtr constant(Tensor v) {
  check_finite(v, "constant");
  auto n = std::make_shared<Node>();
  n->op = "constant";
  n->value = std::move(v);
  return n;
}

NodePtr constant_scalar(double v) { return constant(Tensor::scalar(v)); }

NodePtr parameter(Tensor v) {
  check_finite(v, "parameter");
  auto n = std::make_shared<Node>();
  n->op = "parameter";
  n->requires_grad = true;
  n->grad = Tensor::zeros_like(v);
  n->value = std::move(v);
  return n;
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  const auto bad = [&] {
    return DimensionError("matmul: incompatible shapes " + av.shape_string() + " and " +
                          bv.shape_string());
  };

  if (av.rank() == 2 && bv.rank() == 2) {
    if (av.dim(1) != bv.dim(0)) throw bad();
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    Tensor out(Shape{m, n});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = av.at(i, p);
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * bv.at(p, j);
      }
    }
    return make_op("matmul", std::move(out), {a, b}, [m, k, n](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const double g = self.grad.at(i, j);
            for (std::size_t p = 0; p < k; ++p) pa.grad.at(i, p) += g * pb.value.at(p, j);
          }
      }
      if (pb.requires_grad) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double av_ip = pa.value.at(i, p);
            for (std::size_t j = 0; j < n; ++j) pb.grad.at(p, j) += av_ip * self.grad.at(i, j);
          }
      }
    });
  }

  if (av.rank() == 1 && bv.rank() == 2) {
    // Row vector times matrix: x[k] * W[k x n] -> [n].
    if (av.dim(0) != bv.dim(0)) throw bad();
    const std::size_t k = av.dim(0), n = bv.dim(1);
    Tensor out(Shape{n});
    for (std::size_t p = 0; p < k; ++p) {
      const double xp = av[p];
      for (std::size_t j = 0; j < n; ++j) out[j] += xp * bv.at(p, j);
    }
    return make_op("matmul", std::move(out), {a, b}, [k, n](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      if (pa.requires_grad) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += self.grad[j] * pb.value.at(p, j);
          pa.grad[p] += acc;
        }
      }
      if (pb.requires_grad) {
        for (std::size_t p = 0; p < k; ++p) {
          const double xp = pa.value[p];
          for (std::size_t j = 0; j < n; ++j) pb.grad.at(p, j) += xp * self.grad[j];
        }
      }
    });
  }

  if (av.rank() == 2 && bv.rank() == 1) {
    // Matrix times column vector: W[m x k] * h[k] -> [m].
    if (av.dim(1) != bv.dim(0)) throw bad();
    const std::size_t m = av.dim(0), k = av.dim(1);
    Tensor out(Shape{m});
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += av.at(i, p) * bv[p];
      out[i] = acc;
    }
    return make_op("matmul", std::move(out), {a, b}, [m, k](Node& self) {
      Node& pa = *self.parents[0];
      Node& pb = *self.parents[1];
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < m; ++i) {
          const double g = self.grad[i];
          for (std::size_t p = 0; p < k; ++p) pa.grad.at(i, p) += g * pb.value[p];
        }
      }
      if (pb.requires_grad) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += pa.value.at(i, p) * self.grad[i];
          pb.grad[p] += acc;
        }
      }
    });
  }

  throw bad();
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "add");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_op("add", std::move(out), {a, b}, [](Node& self) {
    for (int s = 0; s < 2; ++s) {
      Node& p = *self.parents[s];
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += self.grad[i];
    }
  });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return make_op("sub", std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += self.grad[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] -= self.grad[i];
  });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_op("mul", std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
  });
}

NodePtr sigmoid(const NodePtr& x) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = out[i];
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return make_op("sigmoid", std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double y = self.value[i];
      p.grad[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

NodePtr tanh_op(const NodePtr& x) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return make_op("tanh", std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double y = self.value[i];
      p.grad[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

NodePtr log_op(const NodePtr& x) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] <= 0.0) {
      throw DomainError("log: argument " + std::to_string(out[i]) + " is not positive");
    }
    out[i] = std::log(out[i]);
  }
  return make_op("log", std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += self.grad[i] / p.value[i];
  });
}

NodePtr scale(const NodePtr& x, double c) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return make_op("scale", std::move(out), {x}, [c](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += c * self.grad[i];
  });
}

NodePtr concat(std::span<const NodePtr> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p->value.rank() != 1) {
      throw DimensionError("concat: expected rank-1 input, got " + p->value.shape_string());
    }
    total += p->value.size();
  }
  Tensor out(Shape{total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->value.values().begin(), p->value.values().end(), out.data() + off);
    off += p->value.size();
  }
  auto n = std::make_shared<Node>();
  n->op = "concat";
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parts) needs = needs || p->requires_grad;
  }
  check_finite(out, "concat");
  n->requires_grad = needs;
  if (needs) {
    n->parents.assign(parts.begin(), parts.end());
    n->grad = Tensor::zeros_like(out);
    n->backprop = [](Node& self) {
      std::size_t off2 = 0;
      for (auto& pp : self.parents) {
        if (pp->requires_grad) {
          for (std::size_t i = 0; i < pp->grad.size(); ++i) pp->grad[i] += self.grad[off2 + i];
        }
        off2 += pp->value.size();
      }
    };
  }
  n->value = std::move(out);
  return n;
}

NodePtr sum(const NodePtr& x) {
  double acc = 0.0;
  for (double v : x->value.values()) acc += v;
  return make_op("sum", Tensor::scalar(acc), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    const double g = self.grad[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
  });
}

NodePtr softmax(const NodePtr& x) {
  if (x->value.rank() != 1 || x->value.size() == 0) {
    throw DimensionError("softmax: expected non-empty rank-1 input, got " +
                         x->value.shape_string());
  }
  const std::size_t n = x->value.size();
  double mx = x->value[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x->value[i]);
  Tensor out(Shape{n});
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(x->value[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
  return make_op("softmax", std::move(out), {x}, [n](Node& self) {
    Node& p = *self.parents[0];
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) inner += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < n; ++i) {
      p.grad[i] += self.value[i] * (self.grad[i] - inner);
    }
  });
}

NodePtr pick(const NodePtr& x, std::size_t i) {
  if (x->value.rank() != 1 || i >= x->value.size()) {
    throw DimensionError("pick: index " + std::to_string(i) + " out of range for " +
                         x->value.shape_string());
  }
  return make_op("pick", Tensor::scalar(x->value[i]), {x}, [i](Node& self) {
    Node& p = *self.parents[0];
    p.grad[i] += self.grad[0];
  });
}

NodePtr dot(const NodePtr& a, const NodePtr& b) {
  if (a->value.rank() != 1 || b->value.rank() != 1 || a->value.size() != b->value.size()) {
    throw DimensionError("dot: incompatible shapes " + a->value.shape_string() + " and " +
                         b->value.shape_string());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a->value.size(); ++i) acc += a->value[i] * b->value[i];
  return make_op("dot", Tensor::scalar(acc), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double g = self.grad[0];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += g * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] += g * pa.value[i];
  });
}

NodePtr embed_row(const NodePtr& table, std::size_t row) {
  if (table->value.rank() != 2 || row >= table->value.dim(0)) {
    throw DimensionError("embed_row: row " + std::to_string(row) + " out of range for " +
                         table->value.shape_string());
  }
  const std::size_t d = table->value.dim(1);
  Tensor out(Shape{d});
  for (std::size_t j = 0; j < d; ++j) out[j] = table->value.at(row, j);
  return make_op("embed_row", std::move(out), {table}, [row, d](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t j = 0; j < d; ++j) p.grad.at(row, j) += self.grad[j];
  });
}

NodePtr clamp(const NodePtr& x, double lo, double hi) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(std::max(out[i], lo), hi);
  return make_op("clamp", std::move(out), {x}, [lo, hi](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double v = p.value[i];
      if (v > lo && v < hi) p.grad[i] += self.grad[i];
    }
  });
}

void backward(const NodePtr& loss) {
  if (!loss) throw ContractError("backward: null loss");
  if (loss->value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " + loss->value.shape_string());
  }
  if (!loss->requires_grad) {
    // Nothing trainable is reachable; a no-op by definition.
    return;
  }

  // Iterative post-order topological sort over the grad-requiring subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* parent = node->parents[idx].get();
      ++idx;
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior grads are scratch space for this sweep; parameter/leaf grads
  // persist so that repeated backward calls accumulate.
  for (Node* n : order) {
    if (n->backprop) n->grad.fill(0.0);
  }
  loss->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

void zero_grad(std::span<const NodePtr> params) {
  for (const auto& p : params) p->grad.fill(0.0);
}

}  // namespace treemil
