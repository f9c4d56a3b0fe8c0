#pragma once

#include <cblas.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/tensor.hpp"

namespace swsr {

namespace blas {
inline void gemm(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
                 const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, m, n,
              k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const double* a, int lda,
                 const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, m, n,
              k, alpha, a, lda, b, ldb, beta, c, ldc);
}
}  // namespace blas

// ---------------------------------------------------------------------------
// Convolution, bias-free, "same" spatial size, replicate (edge) padding.
// Kernel layout: (out_channels, in_channels/groups, k, k).
// ---------------------------------------------------------------------------

namespace detail {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// col matrix: (cg*k*k) x (h*w), built with clamped (replicate) indexing.
template <typename T>
void im2col(const T* x, int cg, int h, int w, int k, std::vector<T>& col) {
  const int pad = k / 2;
  col.resize(static_cast<size_t>(cg) * k * k * h * w);
  size_t r = 0;
  for (int ic = 0; ic < cg; ++ic) {
    const T* plane = x + static_cast<size_t>(ic) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col.data() + (r++) * h * w;
        for (int y = 0; y < h; ++y) {
          const int sy = clampi(y + ky - pad, 0, h - 1);
          const T* srow = plane + static_cast<size_t>(sy) * w;
          for (int x2 = 0; x2 < w; ++x2) {
            const int sx = clampi(x2 + kx - pad, 0, w - 1);
            dst[static_cast<size_t>(y) * w + x2] = srow[sx];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col with replicate padding: clamped taps accumulate into
/// the edge cells they read from.
template <typename T>
void col2im_accumulate(const std::vector<T>& col, int cg, int h, int w, int k, T* dx) {
  const int pad = k / 2;
  size_t r = 0;
  for (int ic = 0; ic < cg; ++ic) {
    T* plane = dx + static_cast<size_t>(ic) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col.data() + (r++) * h * w;
        for (int y = 0; y < h; ++y) {
          const int sy = clampi(y + ky - pad, 0, h - 1);
          T* srow = plane + static_cast<size_t>(sy) * w;
          for (int x2 = 0; x2 < w; ++x2) {
            const int sx = clampi(x2 + kx - pad, 0, w - 1);
            srow[sx] += src[static_cast<size_t>(y) * w + x2];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
void conv2d_check(const Tensor4<T>& x, const Tensor4<T>& kernel, int groups) {
  if (groups <= 0 || x.c % groups != 0 || kernel.n % groups != 0)
    throw ShapeError("conv2d: channels not divisible by groups (in=" + std::to_string(x.c) +
                     ", out=" + std::to_string(kernel.n) + ", groups=" + std::to_string(groups) +
                     ")");
  if (kernel.c != x.c / groups)
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.c) +
                     " input channels per group, got " + std::to_string(x.c / groups));
  if (kernel.h != kernel.w || kernel.h % 2 == 0)
    throw ShapeError("conv2d: kernel must be odd and square, got " + kernel.shape_str());
}

/// Same-size 2D convolution. Scratch `col` is reused across calls.
template <typename T>
void conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& kernel, int groups, Tensor4<T>& y,
                    std::vector<T>& col) {
  conv2d_check(x, kernel, groups);
  const int cg = x.c / groups;
  const int og = kernel.n / groups;
  const int hw = x.h * x.w;
  const int k = kernel.h;
  y = Tensor4<T>(x.n, kernel.n, x.h, x.w);
  for (int in = 0; in < x.n; ++in) {
    for (int g = 0; g < groups; ++g) {
      detail::im2col(x.plane(in, g * cg), cg, x.h, x.w, k, col);
      // (og x cg*k*k) * (cg*k*k x hw) -> (og x hw)
      blas::gemm(false, false, og, hw, cg * k * k, T(1), kernel.plane(g * og, 0), cg * k * k,
                 col.data(), hw, T(0), y.plane(in, g * og), hw);
    }
  }
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& kernel, int groups = 1) {
  Tensor4<T> y;
  std::vector<T> col;
  conv2d_forward(x, kernel, groups, y, col);
  return y;
}

/// Gradients w.r.t. input and kernel. dk is accumulated (+=) so minibatch
/// members can share one buffer.
template <typename T>
void conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& kernel, int groups,
                     const Tensor4<T>& dy, Tensor4<T>& dx, Tensor4<T>& dk, std::vector<T>& col) {
  conv2d_check(x, kernel, groups);
  if (dy.n != x.n || dy.c != kernel.n || dy.h != x.h || dy.w != x.w)
    throw ShapeError("conv2d_backward: dy shape " + dy.shape_str() + " inconsistent");
  if (!dx.same_shape(x)) dx = Tensor4<T>(x.n, x.c, x.h, x.w);
  dx.zero();
  if (!dk.same_shape(kernel))
    throw ShapeError("conv2d_backward: dk buffer must match the kernel shape");

  const int cg = x.c / groups;
  const int og = kernel.n / groups;
  const int hw = x.h * x.w;
  const int k = kernel.h;
  std::vector<T> dcol(static_cast<size_t>(cg) * k * k * hw);
  for (int in = 0; in < x.n; ++in) {
    for (int g = 0; g < groups; ++g) {
      detail::im2col(x.plane(in, g * cg), cg, x.h, x.w, k, col);
      // dK += dY * col^T : (og x hw) * (hw x cg*k*k)
      blas::gemm(false, true, og, cg * k * k, hw, T(1), dy.plane(in, g * og), hw, col.data(), hw,
                 T(1), dk.plane(g * og, 0), cg * k * k);
      // dcol = K^T * dY : (cg*k*k x og) * (og x hw)
      blas::gemm(true, false, cg * k * k, hw, og, T(1), kernel.plane(g * og, 0), cg * k * k,
                 dy.plane(in, g * og), hw, T(0), dcol.data(), hw);
      detail::col2im_accumulate(dcol, cg, x.h, x.w, k, dx.plane(in, g * cg));
    }
  }
}

// ---------------------------------------------------------------------------
// Swish activation x * sigmoid(x).
// ---------------------------------------------------------------------------

template <typename T>
T swish_scalar(T x) {
  return x / (T(1) + std::exp(-x));
}

template <typename T>
void swish_forward(const Tensor4<T>& x, Tensor4<T>& y) {
  if (!y.same_shape(x)) y = Tensor4<T>(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i) y.data[i] = swish_scalar(x.data[i]);
}

template <typename T>
void swish_backward(const Tensor4<T>& x, const Tensor4<T>& dy, Tensor4<T>& dx) {
  check_same_shape(x, dy, "swish_backward");
  if (!dx.same_shape(x)) dx = Tensor4<T>(x.n, x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i) {
    const T s = T(1) / (T(1) + std::exp(-x.data[i]));
    dx.data[i] = dy.data[i] * (s + x.data[i] * s * (T(1) - s));
  }
}

// ---------------------------------------------------------------------------
// Average pooling with square kernel (stride == kernel).
// ---------------------------------------------------------------------------

template <typename T>
void avg_pool_forward(const Tensor4<T>& x, int k, Tensor4<T>& y) {
  if (x.h % k != 0 || x.w % k != 0)
    throw ShapeError("avg_pool: spatial dims " + x.shape_str() + " not divisible by " +
                     std::to_string(k));
  y = Tensor4<T>(x.n, x.c, x.h / k, x.w / k);
  const T inv = T(1) / static_cast<T>(k * k);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic) {
      const T* src = x.plane(in, ic);
      T* dst = y.plane(in, ic);
      for (int oy = 0; oy < y.h; ++oy)
        for (int ox = 0; ox < y.w; ++ox) {
          T acc = T(0);
          for (int dy2 = 0; dy2 < k; ++dy2) {
            const T* row = src + static_cast<size_t>(oy * k + dy2) * x.w + ox * k;
            for (int dx2 = 0; dx2 < k; ++dx2) acc += row[dx2];
          }
          dst[static_cast<size_t>(oy) * y.w + ox] = acc * inv;
        }
    }
}

template <typename T>
void avg_pool_backward(const Tensor4<T>& dy, int k, Tensor4<T>& dx) {
  dx = Tensor4<T>(dy.n, dy.c, dy.h * k, dy.w * k);
  const T inv = T(1) / static_cast<T>(k * k);
  for (int in = 0; in < dy.n; ++in)
    for (int ic = 0; ic < dy.c; ++ic) {
      const T* src = dy.plane(in, ic);
      T* dst = dx.plane(in, ic);
      for (int oy = 0; oy < dy.h; ++oy)
        for (int ox = 0; ox < dy.w; ++ox) {
          const T g = src[static_cast<size_t>(oy) * dy.w + ox] * inv;
          for (int dy2 = 0; dy2 < k; ++dy2) {
            T* row = dst + static_cast<size_t>(oy * k + dy2) * dx.w + ox * k;
            for (int dx2 = 0; dx2 < k; ++dx2) row[dx2] = g;
          }
        }
    }
}

// ---------------------------------------------------------------------------
// Pixel shuffle: (r^2 C, H, W) -> (C, rH, rW), with
// out(c, r*y+dy, r*x+dx) = in(c*r^2 + dy*r + dx, y, x).
// ---------------------------------------------------------------------------

template <typename T>
void pixel_shuffle_forward(const Tensor4<T>& x, int r, Tensor4<T>& y) {
  if (x.c % (r * r) != 0)
    throw ShapeError("pixel_shuffle: channels " + std::to_string(x.c) + " not divisible by r^2");
  y = Tensor4<T>(x.n, x.c / (r * r), x.h * r, x.w * r);
  for (int in = 0; in < x.n; ++in)
    for (int oc = 0; oc < y.c; ++oc)
      for (int dy2 = 0; dy2 < r; ++dy2)
        for (int dx2 = 0; dx2 < r; ++dx2) {
          const T* src = x.plane(in, oc * r * r + dy2 * r + dx2);
          T* dst = y.plane(in, oc);
          for (int iy = 0; iy < x.h; ++iy) {
            T* drow = dst + static_cast<size_t>(iy * r + dy2) * y.w + dx2;
            const T* srow = src + static_cast<size_t>(iy) * x.w;
            for (int ix = 0; ix < x.w; ++ix) drow[static_cast<size_t>(ix) * r] = srow[ix];
          }
        }
}

template <typename T>
void pixel_shuffle_backward(const Tensor4<T>& dy, int r, Tensor4<T>& dx) {
  if (dy.h % r != 0 || dy.w % r != 0) throw ShapeError("pixel_shuffle_backward: bad shape");
  dx = Tensor4<T>(dy.n, dy.c * r * r, dy.h / r, dy.w / r);
  for (int in = 0; in < dy.n; ++in)
    for (int oc = 0; oc < dy.c; ++oc)
      for (int dy2 = 0; dy2 < r; ++dy2)
        for (int dx2 = 0; dx2 < r; ++dx2) {
          T* dst = dx.plane(in, oc * r * r + dy2 * r + dx2);
          const T* src = dy.plane(in, oc);
          for (int iy = 0; iy < dx.h; ++iy) {
            const T* srow = src + static_cast<size_t>(iy * r + dy2) * dy.w + dx2;
            T* drow = dst + static_cast<size_t>(iy) * dx.w;
            for (int ix = 0; ix < dx.w; ++ix) drow[ix] = srow[static_cast<size_t>(ix) * r];
          }
        }
}

// ---------------------------------------------------------------------------
// Initializers.
// ---------------------------------------------------------------------------

/// He-style uniform fan-in initialization for a conv kernel.
template <typename T>
void kaiming_uniform(Tensor4<T>& kernel, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(kernel.c) * kernel.h * kernel.w;
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : kernel.data) v = static_cast<T>(dist(rng));
}

/// Sub-pixel-convolution initialization: draws out/r^2 independent
/// sub-kernels and replicates each r^2 times, so conv + pixel_shuffle
/// starts out as nearest-neighbor upsampling (no checkerboard artifacts).
template <typename T, typename BaseInit>
void icnr_init(Tensor4<T>& kernel, int r, BaseInit&& base, std::mt19937_64& rng) {
  const int r2 = r * r;
  if (kernel.n % r2 != 0)
    throw ConfigError("icnr_init: out channels " + std::to_string(kernel.n) +
                      " not divisible by r^2 = " + std::to_string(r2));
  if (r == 1) {
    base(kernel, rng);
    return;
  }
  Tensor4<T> sub(kernel.n / r2, kernel.c, kernel.h, kernel.w);
  base(sub, rng);
  const size_t plane = static_cast<size_t>(kernel.c) * kernel.h * kernel.w;
  for (int oc = 0; oc < sub.n; ++oc)
    for (int t = 0; t < r2; ++t)
      std::copy(sub.data.begin() + oc * plane, sub.data.begin() + (oc + 1) * plane,
                kernel.data.begin() + (static_cast<size_t>(oc) * r2 + t) * plane);
}

// ---------------------------------------------------------------------------
// Adam optimizer (bias-corrected first/second moments).
// ---------------------------------------------------------------------------

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update for a single parameter tensor; `step` is the 1-based
/// step count after this update.
template <typename T>
void adam_step(Tensor4<T>& param, const Tensor4<T>& grad, Tensor4<T>& m, Tensor4<T>& v,
               long step, double lr, const AdamHyper& hp = {}) {
  check_same_shape(param, grad, "adam_step");
  if (!m.same_shape(param)) m = Tensor4<T>(param.n, param.c, param.h, param.w);
  if (!v.same_shape(param)) v = Tensor4<T>(param.n, param.c, param.h, param.w);
  const double b1 = hp.beta1, b2 = hp.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad.data[i]);
    const double mi = b1 * static_cast<double>(m.data[i]) + (1.0 - b1) * g;
    const double vi = b2 * static_cast<double>(v.data[i]) + (1.0 - b2) * g * g;
    m.data[i] = static_cast<T>(mi);
    v.data[i] = static_cast<T>(vi);
    const double mhat = mi / bc1;
    const double vhat = vi / bc2;
    param.data[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + hp.eps));
  }
}

}  // namespace swsr
