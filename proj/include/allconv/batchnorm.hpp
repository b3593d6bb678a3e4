#pragma once

#include <cmath>
#include <vector>

#include "allconv/tensor.hpp"

namespace allconv {

enum class Mode { train, infer };

// Per-channel batch normalization over N x C x H x W (or N x C) tensors.
// Batch statistics use the biased variance, and the running statistics are
// blended as new = (1 - momentum) * old + momentum * batch.
//
// A layer whose statistics are frozen (frozen prefix during adaptation)
// normalizes with its running statistics even in train mode and never
// updates them; re-estimating target-domain statistics is out of scope.
template <typename T>
struct BatchNorm {
  Tensor<T> gamma, beta, running_mean, running_var;
  T momentum = T(0.1);
  T epsilon = T(1e-5);
  bool stats_frozen = false;

  BatchNorm() = default;
  explicit BatchNorm(int channels) {
    gamma = Tensor<T>({channels}, T(1));
    beta = Tensor<T>({channels});
    running_mean = Tensor<T>({channels});
    running_var = Tensor<T>({channels}, T(1));
  }

  int channels() const { return gamma.extent(0); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, bool update_stats = true) {
    require(x.shape.size() == 2 || x.shape.size() == 4,
            "batchnorm expects N x C or N x C x H x W");
    require(x.extent(1) == channels(), "batchnorm channel mismatch");
    require(epsilon > T(0), "batchnorm epsilon must be positive");
    const int n = x.extent(0);
    const int c = channels();
    const int spatial = x.shape.size() == 4 ? x.extent(2) * x.extent(3) : 1;
    const std::size_t per_sample = static_cast<std::size_t>(c) * spatial;

    const bool use_batch_stats = (mode == Mode::train) && !stats_frozen;
    if (use_batch_stats && n < 2)
      throw config_error("batchnorm in train mode requires batch size >= 2");

    std::vector<T> mean(c), inv_std(c);
    if (use_batch_stats) {
      const T count = static_cast<T>(n) * static_cast<T>(spatial);
      std::vector<T> var(c, T(0));
      for (int ch = 0; ch < c; ++ch) mean[ch] = T(0);
      for (int i = 0; i < n; ++i) {
        const T* xi = x.data.data() + i * per_sample;
        for (int ch = 0; ch < c; ++ch) {
          const T* p = xi + static_cast<std::size_t>(ch) * spatial;
          T acc = T(0);
          for (int s = 0; s < spatial; ++s) acc += p[s];
          mean[ch] += acc;
        }
      }
      for (int ch = 0; ch < c; ++ch) mean[ch] /= count;
      for (int i = 0; i < n; ++i) {
        const T* xi = x.data.data() + i * per_sample;
        for (int ch = 0; ch < c; ++ch) {
          const T* p = xi + static_cast<std::size_t>(ch) * spatial;
          T acc = T(0);
          for (int s = 0; s < spatial; ++s) {
            const T d = p[s] - mean[ch];
            acc += d * d;
          }
          var[ch] += acc;
        }
      }
      for (int ch = 0; ch < c; ++ch) {
        var[ch] /= count;
        inv_std[ch] = T(1) / std::sqrt(var[ch] + epsilon);
      }
      if (update_stats) {
        for (int ch = 0; ch < c; ++ch) {
          running_mean.data[ch] = (T(1) - momentum) * running_mean.data[ch] + momentum * mean[ch];
          running_var.data[ch] = (T(1) - momentum) * running_var.data[ch] + momentum * var[ch];
        }
      }
    } else {
      for (int ch = 0; ch < c; ++ch) {
        mean[ch] = running_mean.data[ch];
        inv_std[ch] = T(1) / std::sqrt(running_var.data[ch] + epsilon);
      }
    }

    Tensor<T> y(x.shape);
    cached_xhat_ = Tensor<T>(x.shape);
    for (int i = 0; i < n; ++i) {
      const T* xi = x.data.data() + i * per_sample;
      T* yi = y.data.data() + i * per_sample;
      T* xh = cached_xhat_.data.data() + i * per_sample;
      for (int ch = 0; ch < c; ++ch) {
        const T m = mean[ch], is = inv_std[ch], g = gamma.data[ch], b = beta.data[ch];
        const std::size_t off = static_cast<std::size_t>(ch) * spatial;
        for (int s = 0; s < spatial; ++s) {
          const T h = (xi[off + s] - m) * is;
          xh[off + s] = h;
          yi[off + s] = g * h + b;
        }
      }
    }
    cached_inv_std_ = std::move(inv_std);
    cached_batch_stats_ = use_batch_stats;
    has_cache_ = true;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, bool param_grads = true) {
    require(has_cache_, "batchnorm backward called without a cached forward");
    require(dy.shape == cached_xhat_.shape, "batchnorm upstream gradient shape mismatch");
    const int n = dy.extent(0);
    const int c = channels();
    const int spatial = dy.shape.size() == 4 ? dy.extent(2) * dy.extent(3) : 1;
    const std::size_t per_sample = static_cast<std::size_t>(c) * spatial;
    const T count = static_cast<T>(n) * static_cast<T>(spatial);

    std::vector<T> sum_dy(c, T(0)), sum_dy_xhat(c, T(0));
    for (int i = 0; i < n; ++i) {
      const T* d = dy.data.data() + i * per_sample;
      const T* xh = cached_xhat_.data.data() + i * per_sample;
      for (int ch = 0; ch < c; ++ch) {
        const std::size_t off = static_cast<std::size_t>(ch) * spatial;
        T a = T(0), b = T(0);
        for (int s = 0; s < spatial; ++s) {
          a += d[off + s];
          b += d[off + s] * xh[off + s];
        }
        sum_dy[ch] += a;
        sum_dy_xhat[ch] += b;
      }
    }
    if (param_grads) {
      gamma.ensure_grad();
      beta.ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        gamma.grad[ch] += sum_dy_xhat[ch];
        beta.grad[ch] += sum_dy[ch];
      }
    }

    Tensor<T> dx(dy.shape);
    for (int i = 0; i < n; ++i) {
      const T* d = dy.data.data() + i * per_sample;
      const T* xh = cached_xhat_.data.data() + i * per_sample;
      T* o = dx.data.data() + i * per_sample;
      for (int ch = 0; ch < c; ++ch) {
        const T g_is = gamma.data[ch] * cached_inv_std_[ch];
        const std::size_t off = static_cast<std::size_t>(ch) * spatial;
        if (cached_batch_stats_) {
          const T mean_dy = sum_dy[ch] / count;
          const T mean_dy_xhat = sum_dy_xhat[ch] / count;
          for (int s = 0; s < spatial; ++s)
            o[off + s] = g_is * (d[off + s] - mean_dy - xh[off + s] * mean_dy_xhat);
        } else {
          for (int s = 0; s < spatial; ++s) o[off + s] = g_is * d[off + s];
        }
      }
    }
    return dx;
  }

  void drop_cache() {
    has_cache_ = false;
    cached_xhat_ = Tensor<T>();
    cached_inv_std_.clear();
  }

 private:
  Tensor<T> cached_xhat_;
  std::vector<T> cached_inv_std_;
  bool cached_batch_stats_ = false;
  bool has_cache_ = false;
};

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, BatchNorm<T>& params, Mode mode) {
  return params.forward(input, mode);
}

}  // namespace allconv
