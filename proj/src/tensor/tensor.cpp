// SPDX-License-Identifier: Apache-2.0

#include "memlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "memlab/errors.hpp"

namespace memlab {

std::size_t shape_numel(const Shape& shape) {
  if (shape.empty()) throw UsageError("tensor shape must have at least one extent");
  std::size_t n = 1;
  for (auto extent : shape) {
    if (extent == 0) throw UsageError("tensor extents must be positive: " + shape_to_string(shape));
    n *= extent;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) : storage_(std::make_shared<Storage>()) {
  const auto n = shape_numel(shape);
  storage_->shape = std::move(shape);
  storage_->values.assign(n, T(0));
  set_requires_grad(requires_grad);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
    : storage_(std::make_shared<Storage>()) {
  const auto n = shape_numel(shape);
  if (values.size() != n) {
    throw UsageError("element count " + std::to_string(values.size()) + " does not match shape " +
                     shape_to_string(shape));
  }
  storage_->shape = std::move(shape);
  storage_->values.assign(values.begin(), values.end());
  set_requires_grad(requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag) {
  storage_->requires_grad = flag;
  if (flag) {
    storage_->grad.assign(storage_->values.size(), T(0));
  } else {
    storage_->grad.clear();
    storage_->grad.shrink_to_fit();
  }
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), T(0));
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_to_string(shape()));
  return storage_->values[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  Tensor copy(storage_->shape, storage_->requires_grad);
  copy.storage_->values = storage_->values;
  if (storage_->requires_grad) copy.storage_->grad = storage_->grad;
  return copy;
}

template <typename T>
void GradTape<T>::record(Rule rule) {
  if (consumed_) throw UsageError("cannot record onto a consumed tape");
  rules_.push_back(std::move(rule));
}

template <typename T>
void GradTape<T>::backward(Tensor<T>& loss) {
  if (consumed_) throw UsageError("tape already consumed by a previous backward()");
  if (loss.numel() != 1) throw UsageError("backward() needs a scalar loss");
  if (!loss.requires_grad()) throw UsageError("loss was not produced through the tape");
  consumed_ = true;
  loss.grad()[0] += T(1);
  for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  rules_.clear();
}

template <typename T>
void check_finite(std::span<const T> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "non-finite value " << values[i] << " in " << what << " at element " << i;
      throw NumericError(msg.str());
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class GradTape<float>;
template class GradTape<double>;
template void check_finite<float>(std::span<const float>, const std::string&);
template void check_finite<double>(std::span<const double>, const std::string&);

}  // namespace memlab
