#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rumor {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// Tensor is a reference-counted handle: copies alias the same storage, which
/// is how parameters are shared between the model, the tape and the
/// optimizer. Use clone() for an independent copy. Scalars have shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  bool defined() const { return static_cast<bool>(storage_); }

  const Shape& shape() const { return storage_->shape; }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t size() const { return storage_->data.size(); }

  std::span<double> data() { return storage_->data; }
  std::span<const double> data() const { return storage_->data; }
  double& operator[](std::size_t i) { return storage_->data[i]; }
  double operator[](std::size_t i) const { return storage_->data[i]; }
  double item() const;

  bool requires_grad() const { return storage_->requires_grad; }
  void set_requires_grad(bool on) { storage_->requires_grad = on; }

  bool has_grad() const { return !storage_->grad.empty(); }
  /// Gradient buffer, allocated as zeros on first access. Gradients belong to
  /// the shared storage, so they are writable through const handles.
  std::span<double> grad() const;
  void zero_grad() const;

  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return storage_ == other.storage_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

}  // namespace rumor
