#include "treemil/tensor.hpp"

#include <cmath>
#include <numeric>

namespace treemil {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  out += "]";
  return out;
}

namespace {
std::size_t shape_product(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), fill);
}

Tensor Tensor::scalar(double v) {
  Tensor t(Shape{1});
  t.data_[0] = v;
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
  if (shape_product(shape) != data.size()) {
    throw DimensionError("Tensor::from: shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data_) v = rng.uniform(lo, hi);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) { data_.assign(data_.size(), v); }

}  // namespace treemil
