#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "treemil/autodiff.hpp"

namespace treemil {

// Worst relative error between backward() gradients and central finite
// differences over every entry of every listed parameter. build_loss must
// rebuild the graph from the parameters' current values.
double finite_diff_max_rel_error(const std::function<NodePtr()>& build_loss,
                                 std::span<const NodePtr> params, double eps = 1e-3);

struct GradCheckEntry {
  std::string component;
  double worst_rel_err = 0.0;
  bool ok(double tol = 1e-4) const { return worst_rel_err <= tol; }
};

// Finite-difference suite over every autodiff op, the GRU cell and sequence
// encoder, the stance head, and full end-to-end TD and BU tree losses.
// inject_fault adds a negative-control component with a deliberately wrong
// backward rule, which must fail.
std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed, bool inject_fault = false,
                                               int instances_per_op = 20);

}  // namespace treemil
