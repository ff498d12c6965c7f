#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "treemil/tensor.hpp"

namespace treemil {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One value in a dynamic computation graph. Graphs are built per example,
// consumed by backward(), and freed by dropping the loss handle; parameter
// nodes outlive graphs and accumulate gradients until zeroed.
struct Node {
  Tensor value;
  Tensor grad;  // same shape as value, zero until backward touches it
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backprop;
  const char* op = "leaf";

  double scalar() const { return value[0]; }
};

// While a guard is alive on the current thread, ops produce plain values:
// no gradient bookkeeping, no parent retention. Used for evaluation forwards.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

// Leaf constructors.
NodePtr constant(Tensor v);
NodePtr constant_scalar(double v);
NodePtr parameter(Tensor v);

// Matrix product. Accepts [m x k]*[k x n], [k]*[k x n] (row vector), and
// [m x k]*[k] (column vector).
NodePtr matmul(const NodePtr& a, const NodePtr& b);

// Elementwise ops over identical shapes.
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);

NodePtr sigmoid(const NodePtr& x);
NodePtr tanh_op(const NodePtr& x);
NodePtr log_op(const NodePtr& x);

// Multiply by a compile-time scalar (the only broadcasting in the engine).
NodePtr scale(const NodePtr& x, double c);

// Concatenate rank-1 tensors into one vector.
NodePtr concat(std::span<const NodePtr> parts);

// Sum of all elements -> scalar.
NodePtr sum(const NodePtr& x);

// Numerically stable softmax over a rank-1 tensor.
NodePtr softmax(const NodePtr& x);

// Select element i of a vector -> scalar.
NodePtr pick(const NodePtr& x, std::size_t i);

// Inner product of two equal-length vectors -> scalar.
NodePtr dot(const NodePtr& a, const NodePtr& b);

// Row lookup into a [V x d] matrix -> [d]. Gradient accumulates into the row.
NodePtr embed_row(const NodePtr& table, std::size_t row);

// Clamp into [lo, hi]; gradient passes only through the interior.
NodePtr clamp(const NodePtr& x, double lo, double hi);

// Reverse-mode sweep from a scalar loss. Every reachable trainable node ends
// up holding dLoss/dNode in .grad; repeated calls accumulate into parameters.
void backward(const NodePtr& loss);

void zero_grad(std::span<const NodePtr> params);

}  // namespace treemil
