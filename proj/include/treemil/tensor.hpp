#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treemil/errors.hpp"
#include "treemil/rng.hpp"

namespace treemil {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of 64-bit floats. Everything in the model runs in
// double precision: the models are desk scale and the gradient checks need it.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0);

  static Tensor scalar(double v);
  static Tensor from(Shape shape, std::vector<double> data);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }
  static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Row-major access for rank-2 tensors.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& vec() const { return data_; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_string() const { return shape_str(shape_); }

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace treemil
