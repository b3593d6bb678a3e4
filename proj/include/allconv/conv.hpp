#pragma once

#include <vector>

#include "allconv/gemm.hpp"
#include "allconv/tensor.hpp"

namespace allconv {

// 2-D convolution with same-size zero padding: pad = (k-1)/2, so the output
// spatial extent is ceil(H/stride). Weights are [outC, inC, kH, kW], which
// doubles as the row-major [outC, inC*kH*kW] matrix the GEMM consumes.
template <typename T>
struct Conv2d {
  Tensor<T> weight;
  Tensor<T> bias;
  int stride = 1;

  Conv2d() = default;
  Conv2d(int in_c, int out_c, int k, int stride_) : stride(stride_) {
    require(k == 1 || k == 3, "kernel extent must be 1 or 3");
    require(stride_ == 1 || stride_ == 2, "stride must be 1 or 2");
    weight = Tensor<T>({out_c, in_c, k, k});
    bias = Tensor<T>({out_c});
  }

  int in_channels() const { return weight.extent(1); }
  int out_channels() const { return weight.extent(0); }
  int kernel() const { return weight.extent(2); }
  int padding() const { return (kernel() - 1) / 2; }

  static int out_extent(int in, int k, int stride) {
    const int pad = (k - 1) / 2;
    return (in + 2 * pad - k) / stride + 1;
  }

  Tensor<T> forward(const Tensor<T>& x, bool keep_cache = true) {
    require(x.shape.size() == 4, "conv2d expects a batch x C x H x W tensor");
    require(x.extent(1) == in_channels(), "conv2d input channel mismatch");
    const int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    const int k = kernel();
    require(h + 2 * padding() >= k && w + 2 * padding() >= k,
            "conv2d input smaller than kernel after padding");
    const int oh = out_extent(h, k, stride);
    const int ow = out_extent(w, k, stride);
    const int oc = out_channels();
    const int patch = c * k * k;

    Tensor<T> y({n, oc, oh, ow});
    const bool direct = (k == 1 && stride == 1);
    if (!direct) col_.resize(static_cast<std::size_t>(patch) * oh * ow);

    const std::size_t x_sample = static_cast<std::size_t>(c) * h * w;
    const std::size_t y_sample = static_cast<std::size_t>(oc) * oh * ow;
    for (int i = 0; i < n; ++i) {
      const T* xi = x.data.data() + i * x_sample;
      const T* col = xi;
      if (!direct) {
        im2col(xi, c, h, w);
        col = col_.data();
      }
      T* yi = y.data.data() + i * y_sample;
      gemm_nn(weight.data.data(), col, yi, oc, patch, oh * ow);
      for (int m = 0; m < oc; ++m) {
        T* row = yi + static_cast<std::size_t>(m) * oh * ow;
        const T b = bias.data[m];
        for (int j = 0; j < oh * ow; ++j) row[j] += b;
      }
    }
    if (keep_cache) {
      cached_input_ = x;
      has_cache_ = true;
    } else {
      has_cache_ = false;
    }
    return y;
  }

  // Returns the input gradient; parameter gradients accumulate into
  // weight.grad / bias.grad unless param_grads is false (frozen layer).
  Tensor<T> backward(const Tensor<T>& dy, bool param_grads = true) {
    require(has_cache_, "conv2d backward called without a cached forward input");
    const Tensor<T>& x = cached_input_;
    const int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    const int k = kernel();
    const int oh = out_extent(h, k, stride);
    const int ow = out_extent(w, k, stride);
    const int oc = out_channels();
    const int patch = c * k * k;
    require(dy.shape == std::vector<int>({n, oc, oh, ow}),
            "conv2d upstream gradient shape mismatch");

    if (param_grads) {
      weight.ensure_grad();
      bias.ensure_grad();
    }
    Tensor<T> dx({n, c, h, w});
    const bool direct = (k == 1 && stride == 1);
    if (!direct) {
      col_.resize(static_cast<std::size_t>(patch) * oh * ow);
      dcol_.resize(static_cast<std::size_t>(patch) * oh * ow);
    }

    const std::size_t x_sample = static_cast<std::size_t>(c) * h * w;
    const std::size_t y_sample = static_cast<std::size_t>(oc) * oh * ow;
    for (int i = 0; i < n; ++i) {
      const T* xi = x.data.data() + i * x_sample;
      const T* dyi = dy.data.data() + i * y_sample;
      T* dxi = dx.data.data() + i * x_sample;
      if (param_grads) {
        const T* col = xi;
        if (!direct) {
          im2col(xi, c, h, w);
          col = col_.data();
        }
        gemm_nt(dyi, col, weight.grad.data(), oc, oh * ow, patch, /*accumulate=*/true);
        for (int m = 0; m < oc; ++m) {
          const T* row = dyi + static_cast<std::size_t>(m) * oh * ow;
          T acc = T(0);
          for (int j = 0; j < oh * ow; ++j) acc += row[j];
          bias.grad[m] += acc;
        }
      }
      if (direct) {
        gemm_tn(weight.data.data(), dyi, dxi, patch, oc, oh * ow);
      } else {
        gemm_tn(weight.data.data(), dyi, dcol_.data(), patch, oc, oh * ow);
        col2im_add(dcol_.data(), c, h, w, dxi);
      }
    }
    return dx;
  }

  void drop_cache() {
    has_cache_ = false;
    cached_input_ = Tensor<T>();
  }

 private:
  Tensor<T> cached_input_;
  bool has_cache_ = false;
  std::vector<T> col_;
  std::vector<T> dcol_;

  // col[(c*k+ki)*k+kj][oy*ow+ox] = x[c][oy*stride+ki-pad][ox*stride+kj-pad]
  void im2col(const T* x, int c, int h, int w) {
    const int k = kernel();
    const int pad = padding();
    const int oh = out_extent(h, k, stride);
    const int ow = out_extent(w, k, stride);
    T* col = col_.data();
    for (int ch = 0; ch < c; ++ch) {
      const T* plane = x + static_cast<std::size_t>(ch) * h * w;
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj) {
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride + ki - pad;
            T* dst = col;
            col += ow;
            if (iy < 0 || iy >= h) {
              for (int ox = 0; ox < ow; ++ox) dst[ox] = T(0);
              continue;
            }
            const T* src = plane + static_cast<std::size_t>(iy) * w;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride + kj - pad;
              dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }

  void col2im_add(const T* col, int c, int h, int w, T* dx) {
    const int k = kernel();
    const int pad = padding();
    const int oh = out_extent(h, k, stride);
    const int ow = out_extent(w, k, stride);
    for (int ch = 0; ch < c; ++ch) {
      T* plane = dx + static_cast<std::size_t>(ch) * h * w;
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj) {
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride + ki - pad;
            const T* src = col;
            col += ow;
            if (iy < 0 || iy >= h) continue;
            T* dst = plane + static_cast<std::size_t>(iy) * w;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride + kj - pad;
              if (ix >= 0 && ix < w) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
};

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, Conv2d<T>& params) {
  return params.forward(input, /*keep_cache=*/true);
}

}  // namespace allconv
