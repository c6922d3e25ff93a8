// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace memlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Cache-line aligned allocation keeps vectorized kernels on the same code
/// path for every buffer, so results do not depend on heap placement.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major tensor handle with an optional gradient accumulator.
///
/// Copies share storage (the handle is what autograd closures capture).
/// Use clone() for an independent copy. Scalars have shape {1}.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t numel() const { return storage_->values.size(); }

  std::span<T> values() { return storage_->values; }
  std::span<const T> values() const { return storage_->values; }
  T* data() { return storage_->values.data(); }
  const T* data() const { return storage_->values.data(); }

  /// Gradient accumulator; empty span when requires_grad() is false. The
  /// handle is shallow, so const handles still accumulate into it.
  std::span<T> grad() const { return storage_->grad; }

  bool requires_grad() const { return storage_->requires_grad; }
  void set_requires_grad(bool flag);
  void zero_grad();

  T item() const;
  Tensor clone() const;
  bool shares_storage(const Tensor& other) const { return storage_ == other.storage_; }

 private:
  struct Storage {
    Shape shape;
    AlignedVector<T> values;
    AlignedVector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

/// Records backward rules in execution order; backward() replays them in
/// reverse, which visits every node after all of its consumers.
template <typename T>
class GradTape {
 public:
  using Rule = std::function<void()>;

  void record(Rule rule);
  std::size_t size() const { return rules_.size(); }
  bool consumed() const { return consumed_; }

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded rule once.
  /// Throws UsageError on a second call or a non-scalar loss.
  void backward(Tensor<T>& loss);

 private:
  std::vector<Rule> rules_;
  bool consumed_ = false;
};

/// Throws NumericError if any element is NaN or infinite.
template <typename T>
void check_finite(std::span<const T> values, const std::string& what);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class GradTape<float>;
extern template class GradTape<double>;

}  // namespace memlab
