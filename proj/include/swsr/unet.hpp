#pragma once

#include <random>
#include <string>
#include <vector>

#include "swsr/errors.hpp"
#include "swsr/nn.hpp"
#include "swsr/tensor.hpp"

namespace swsr {

/// U-Net architecture knobs. Defaults give an encoder with 7x7 kernels,
/// two 4x pooling stages, channel widths 32/64/128, sub-pixel upsampling
/// with r = 4, and grouped input/output convolutions over the two
/// velocity channels. All convolutions are bias-free.
struct UNetConfig {
  int in_channels = 2;
  int base_width = 32;
  int levels = 2;
  int enc_kernel = 7;
  int dec_kernel = 3;
  int pool = 4;
  int io_groups = 2;

  int width(int level) const { return base_width << level; }
  int spatial_factor() const {
    int f = 1;
    for (int l = 0; l < levels; ++l) f *= pool;
    return f;
  }

  void validate() const {
    if (in_channels <= 0 || base_width <= 0 || levels <= 0 || pool <= 1)
      throw ConfigError("unet config: non-positive sizes");
    if (enc_kernel % 2 == 0 || dec_kernel % 2 == 0)
      throw ConfigError("unet config: kernels must be odd");
    if (in_channels % io_groups != 0 || base_width % io_groups != 0)
      throw ConfigError("unet config: io_groups must divide channel counts");
  }

  bool operator==(const UNetConfig&) const = default;
};

struct KernelSpec {
  std::string name;
  int out_c, in_c_per_group, k, groups;
  bool icnr;
  int r;
};

/// Kernel declaration order; checkpoints and gradient buffers follow it.
inline std::vector<KernelSpec> unet_kernel_specs(const UNetConfig& cfg) {
  cfg.validate();
  std::vector<KernelSpec> specs;
  auto rb = [&specs](const std::string& base, int in_c, int out_c, int k) {
    specs.push_back({base + "_conv1", out_c, in_c, k, 1, false, 1});
    specs.push_back({base + "_conv2", out_c, out_c, k, 1, false, 1});
    specs.push_back({base + "_skip", out_c, in_c, 1, 1, false, 1});
  };

  specs.push_back({"in_conv", cfg.base_width, cfg.in_channels / cfg.io_groups, cfg.enc_kernel,
                   cfg.io_groups, false, 1});
  for (int l = 0; l < cfg.levels; ++l) {
    const int in_w = (l == 0) ? cfg.base_width : cfg.width(l - 1);
    rb("enc" + std::to_string(l) + "_rb1", in_w, cfg.width(l), cfg.enc_kernel);
    rb("enc" + std::to_string(l) + "_rb2", cfg.width(l), cfg.width(l), cfg.enc_kernel);
  }
  rb("bott_rb1", cfg.width(cfg.levels - 1), cfg.width(cfg.levels), cfg.enc_kernel);
  rb("bott_rb2", cfg.width(cfg.levels), cfg.width(cfg.levels), cfg.enc_kernel);
  for (int l = cfg.levels - 1; l >= 0; --l) {
    const int r2 = cfg.pool * cfg.pool;
    specs.push_back({"up" + std::to_string(l) + "_conv", cfg.width(l) * r2, cfg.width(l + 1),
                     cfg.dec_kernel, 1, true, cfg.pool});
    rb("dec" + std::to_string(l) + "_rb1", 2 * cfg.width(l), cfg.width(l), cfg.dec_kernel);
    rb("dec" + std::to_string(l) + "_rb2", cfg.width(l), cfg.width(l), cfg.dec_kernel);
  }
  specs.push_back({"out_conv", cfg.in_channels, cfg.base_width / cfg.io_groups, cfg.dec_kernel,
                   cfg.io_groups, false, 1});
  return specs;
}

inline long unet_parameter_count(const UNetConfig& cfg) {
  long n = 0;
  for (const auto& s : unet_kernel_specs(cfg))
    n += static_cast<long>(s.out_c) * s.in_c_per_group * s.k * s.k;
  return n;
}

/// All trainable state: kernels in declaration order plus Adam moments and
/// the optimizer step counter. No bias terms exist anywhere, so the whole
/// network maps zero input to zero output.
template <typename T>
struct NetworkParams {
  UNetConfig config;
  std::vector<KernelSpec> specs;
  std::vector<Tensor4<T>> kernels;
  std::vector<Tensor4<T>> adam_m;
  std::vector<Tensor4<T>> adam_v;
  long step = 0;

  static NetworkParams init(const UNetConfig& cfg, std::uint64_t seed) {
    NetworkParams p;
    p.config = cfg;
    p.specs = unet_kernel_specs(cfg);
    std::mt19937_64 rng(seed);
    for (const auto& s : p.specs) {
      Tensor4<T> k(s.out_c, s.in_c_per_group, s.k, s.k);
      if (s.icnr)
        icnr_init(k, s.r, [](Tensor4<T>& t, std::mt19937_64& r) { kaiming_uniform(t, r); }, rng);
      else
        kaiming_uniform(k, rng);
      p.kernels.push_back(std::move(k));
      p.adam_m.emplace_back(s.out_c, s.in_c_per_group, s.k, s.k);
      p.adam_v.emplace_back(s.out_c, s.in_c_per_group, s.k, s.k);
    }
    return p;
  }

  int index_of(const std::string& name) const {
    for (size_t i = 0; i < specs.size(); ++i)
      if (specs[i].name == name) return static_cast<int>(i);
    throw ConfigError("unknown kernel name: " + name);
  }
};

template <typename T>
std::vector<Tensor4<T>> make_grad_buffers(const NetworkParams<T>& p) {
  std::vector<Tensor4<T>> g;
  g.reserve(p.kernels.size());
  for (const auto& k : p.kernels) g.emplace_back(k.n, k.c, k.h, k.w);
  return g;
}

namespace detail {

template <typename T>
struct RbCache {
  Tensor4<T> x;   // block input
  Tensor4<T> a1;  // conv1 output, pre-activation
  Tensor4<T> s1;  // swish(a1)
};

}  // namespace detail

/// Forward activations kept for the backward pass. One cache per
/// concurrently processed sample; buffers are reused across calls.
template <typename T>
struct UNetCache {
  std::vector<T> col;  // conv scratch
  Tensor4<T> x_in;
  Tensor4<T> feat_in;                      // in_conv output
  std::vector<detail::RbCache<T>> enc_rb;  // 2 per level
  std::vector<Tensor4<T>> skips;           // per level
  std::vector<Tensor4<T>> pooled;          // per level
  detail::RbCache<T> bott1, bott2;
  std::vector<Tensor4<T>> up_in;           // per level (decoder input from below)
  std::vector<Tensor4<T>> up_conv_out;     // per level
  std::vector<Tensor4<T>> concat;          // per level
  std::vector<detail::RbCache<T>> dec_rb;  // 2 per level
  std::vector<Tensor4<T>> skip_grad;       // backward scratch per level
  Tensor4<T> head_in;                      // input to out_conv
};

namespace detail {

template <typename T>
Tensor4<T> rb_forward(const Tensor4<T>& x, const NetworkParams<T>& p, int k1, RbCache<T>& cache,
                      std::vector<T>& col) {
  cache.x = x;
  conv2d_forward(x, p.kernels[k1], 1, cache.a1, col);
  swish_forward(cache.a1, cache.s1);
  Tensor4<T> y;
  conv2d_forward(cache.s1, p.kernels[k1 + 1], 1, y, col);
  Tensor4<T> sc;
  conv2d_forward(x, p.kernels[k1 + 2], 1, sc, col);
  for (size_t i = 0; i < y.size(); ++i) y.data[i] += sc.data[i];
  return y;
}

template <typename T>
Tensor4<T> rb_backward(const Tensor4<T>& dy, const NetworkParams<T>& p, int k1,
                       const RbCache<T>& cache, std::vector<Tensor4<T>>& grads,
                       std::vector<T>& col) {
  Tensor4<T> ds1, da1, dx_main, dx_skip;
  conv2d_backward(cache.s1, p.kernels[k1 + 1], 1, dy, ds1, grads[k1 + 1], col);
  swish_backward(cache.a1, ds1, da1);
  conv2d_backward(cache.x, p.kernels[k1], 1, da1, dx_main, grads[k1], col);
  conv2d_backward(cache.x, p.kernels[k1 + 2], 1, dy, dx_skip, grads[k1 + 2], col);
  for (size_t i = 0; i < dx_main.size(); ++i) dx_main.data[i] += dx_skip.data[i];
  return dx_main;
}

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w)
    throw ShapeError("concat: spatial mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor4<T> y(a.n, a.c + b.c, a.h, a.w);
  const size_t plane = static_cast<size_t>(a.h) * a.w;
  for (int in = 0; in < a.n; ++in) {
    std::copy(a.plane(in, 0), a.plane(in, 0) + a.c * plane, y.plane(in, 0));
    std::copy(b.plane(in, 0), b.plane(in, 0) + b.c * plane, y.plane(in, a.c));
  }
  return y;
}

template <typename T>
void split_channels(const Tensor4<T>& dy, Tensor4<T>& da, Tensor4<T>& db, int ca) {
  da = Tensor4<T>(dy.n, ca, dy.h, dy.w);
  db = Tensor4<T>(dy.n, dy.c - ca, dy.h, dy.w);
  const size_t plane = static_cast<size_t>(dy.h) * dy.w;
  for (int in = 0; in < dy.n; ++in) {
    std::copy(dy.plane(in, 0), dy.plane(in, 0) + ca * plane, da.plane(in, 0));
    std::copy(dy.plane(in, ca), dy.plane(in, ca) + (dy.c - ca) * plane, db.plane(in, 0));
  }
}

}  // namespace detail

/// Full forward pass. Input (N, in_channels, S, S) with S divisible by
/// pool^levels; output has the same shape.
template <typename T>
Tensor4<T> unet_forward(const Tensor4<T>& x, const NetworkParams<T>& p, UNetCache<T>& cache) {
  const UNetConfig& cfg = p.config;
  if (x.c != cfg.in_channels)
    throw ShapeError("unet_forward: expected " + std::to_string(cfg.in_channels) +
                     " input channels, got " + std::to_string(x.c));
  if (x.h % cfg.spatial_factor() != 0 || x.w % cfg.spatial_factor() != 0)
    throw ShapeError("unet_forward: spatial size " + x.shape_str() + " not divisible by " +
                     std::to_string(cfg.spatial_factor()) + " (layer in_conv/pooling)");

  cache.enc_rb.resize(2 * cfg.levels);
  cache.skips.resize(cfg.levels);
  cache.pooled.resize(cfg.levels);
  cache.up_in.resize(cfg.levels);
  cache.up_conv_out.resize(cfg.levels);
  cache.concat.resize(cfg.levels);
  cache.dec_rb.resize(2 * cfg.levels);

  cache.x_in = x;
  int ki = 0;  // kernel cursor in declaration order
  conv2d_forward(x, p.kernels[ki], cfg.io_groups, cache.feat_in, cache.col);
  ki += 1;

  Tensor4<T> cur = cache.feat_in;
  for (int l = 0; l < cfg.levels; ++l) {
    cur = detail::rb_forward(cur, p, ki, cache.enc_rb[2 * l], cache.col);
    ki += 3;
    cur = detail::rb_forward(cur, p, ki, cache.enc_rb[2 * l + 1], cache.col);
    ki += 3;
    cache.skips[l] = cur;
    avg_pool_forward(cur, cfg.pool, cache.pooled[l]);
    cur = cache.pooled[l];
  }

  cur = detail::rb_forward(cur, p, ki, cache.bott1, cache.col);
  ki += 3;
  cur = detail::rb_forward(cur, p, ki, cache.bott2, cache.col);
  ki += 3;

  for (int l = cfg.levels - 1; l >= 0; --l) {
    cache.up_in[l] = cur;
    conv2d_forward(cur, p.kernels[ki], 1, cache.up_conv_out[l], cache.col);
    ki += 1;
    Tensor4<T> up;
    pixel_shuffle_forward(cache.up_conv_out[l], cfg.pool, up);
    cache.concat[l] = detail::concat_channels(up, cache.skips[l]);
    cur = detail::rb_forward(cache.concat[l], p, ki, cache.dec_rb[2 * l], cache.col);
    ki += 3;
    cur = detail::rb_forward(cur, p, ki, cache.dec_rb[2 * l + 1], cache.col);
    ki += 3;
  }

  cache.head_in = cur;
  Tensor4<T> y;
  conv2d_forward(cur, p.kernels[ki], cfg.io_groups, y, cache.col);
  return y;
}

/// Reverse pass; accumulates parameter gradients into `grads` (declaration
/// order) and returns the gradient w.r.t. the input.
template <typename T>
Tensor4<T> unet_backward(const Tensor4<T>& dy, const NetworkParams<T>& p, UNetCache<T>& cache,
                         std::vector<Tensor4<T>>& grads) {
  const UNetConfig& cfg = p.config;
  int ki = static_cast<int>(p.kernels.size()) - 1;

  cache.skip_grad.resize(cfg.levels);
  Tensor4<T> cur;
  conv2d_backward(cache.head_in, p.kernels[ki], cfg.io_groups, dy, cur, grads[ki], cache.col);
  ki -= 1;

  for (int l = 0; l < cfg.levels; ++l) {
    cur = detail::rb_backward(cur, p, ki - 2, cache.dec_rb[2 * l + 1], grads, cache.col);
    ki -= 3;
    cur = detail::rb_backward(cur, p, ki - 2, cache.dec_rb[2 * l], grads, cache.col);
    ki -= 3;
    Tensor4<T> dup;
    detail::split_channels(cur, dup, cache.skip_grad[l], cfg.width(l));
    Tensor4<T> dshuffle_in;
    pixel_shuffle_backward(dup, cfg.pool, dshuffle_in);
    conv2d_backward(cache.up_in[l], p.kernels[ki], 1, dshuffle_in, cur, grads[ki], cache.col);
    ki -= 1;
  }

  cur = detail::rb_backward(cur, p, ki - 2, cache.bott2, grads, cache.col);
  ki -= 3;
  cur = detail::rb_backward(cur, p, ki - 2, cache.bott1, grads, cache.col);
  ki -= 3;

  for (int l = cfg.levels - 1; l >= 0; --l) {
    Tensor4<T> dstage;
    avg_pool_backward(cur, cfg.pool, dstage);
    const Tensor4<T>& dskip = cache.skip_grad[l];
    for (size_t i = 0; i < dstage.size(); ++i) dstage.data[i] += dskip.data[i];
    cur = detail::rb_backward(dstage, p, ki - 2, cache.enc_rb[2 * l + 1], grads, cache.col);
    ki -= 3;
    cur = detail::rb_backward(cur, p, ki - 2, cache.enc_rb[2 * l], grads, cache.col);
    ki -= 3;
  }

  Tensor4<T> dx;
  conv2d_backward(cache.x_in, p.kernels[ki], cfg.io_groups, cur, dx, grads[ki], cache.col);
  return dx;
}

/// Convenience single-sample forward without retaining gradients.
template <typename T>
Tensor4<T> unet_apply(const Tensor4<T>& x, const NetworkParams<T>& p) {
  UNetCache<T> cache;
  return unet_forward(x, p, cache);
}

}  // namespace swsr
