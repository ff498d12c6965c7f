#pragma once

#include <span>
#include <vector>

#include "treemil/autodiff.hpp"

namespace treemil {

// Bias-corrected Adam. One state owns the moment buffers for a fixed
// parameter list; steps are deterministic given identical state and grads.
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// Applies one update in place. Gradients are left untouched; the caller
// zeroes them. Moment buffers are lazily shaped on the first call.
void adam_step(AdamState& state, std::span<const NodePtr> params);

}  // namespace treemil
