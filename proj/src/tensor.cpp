#include "rumor/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "rumor/errors.hpp"

namespace rumor {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape) : storage_(std::make_shared<Storage>()) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
  storage_->data.assign(shape_size(shape), 0.0);
  storage_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : Tensor(std::move(shape)) {
  if (values.size() != storage_->data.size()) {
    throw DimensionError("tensor of shape " + shape_to_string(storage_->shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  storage_->data = std::move(values);
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_to_string(shape()));
  return storage_->data[0];
}

std::span<double> Tensor::grad() const {
  if (storage_->grad.empty()) storage_->grad.assign(storage_->data.size(), 0.0);
  return storage_->grad;
}

void Tensor::zero_grad() const { std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0); }

Tensor Tensor::clone() const {
  Tensor copy(shape(), storage_->data);
  copy.set_requires_grad(requires_grad());
  return copy;
}

}  // namespace rumor
