#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "allconv/common.hpp"

namespace allconv {

inline std::size_t numel_of(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int e : shape) {
    require(e >= 0, "tensor extent must be non-negative");
    n *= static_cast<std::size_t>(e);
  }
  return n;
}

// Dense n-dimensional array, row-major, with an optional gradient buffer of
// the same shape. Training runs at float precision; the gradient-check
// oracles instantiate the double variant.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty, or data.size() entries

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), T(0)) {}
  Tensor(std::vector<int> s, T fill) : shape(std::move(s)), data(numel_of(shape), fill) {}
  Tensor(std::vector<int> s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
    require(data.size() == numel_of(shape), "tensor data length must match shape");
  }

  std::size_t numel() const { return data.size(); }

  int extent(std::size_t dim) const { return shape.at(dim); }

  bool has_grad() const { return !grad.empty(); }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }

  void drop_grad() { grad.clear(); }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  // Convenience accessor for tests and small code paths; hot kernels index
  // data directly.
  T& at(std::initializer_list<int> idx) {
    return data[flat_index(idx)];
  }
  const T& at(std::initializer_list<int> idx) const {
    return const_cast<Tensor*>(this)->data[flat_index(idx)];
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    if (!grad.empty()) {
      out.grad.resize(grad.size());
      for (std::size_t i = 0; i < grad.size(); ++i) out.grad[i] = static_cast<U>(grad[i]);
    }
    return out;
  }

 private:
  std::size_t flat_index(std::initializer_list<int> idx) const {
    require(idx.size() == shape.size(), "index rank mismatch");
    std::size_t flat = 0;
    std::size_t dim = 0;
    for (int i : idx) {
      require(i >= 0 && i < shape[dim], "index out of range");
      flat = flat * static_cast<std::size_t>(shape[dim]) + static_cast<std::size_t>(i);
      ++dim;
    }
    return flat;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape == b.shape;
}

}  // namespace allconv
