#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swsr/errors.hpp"

namespace swsr {

/// Dense NCHW tensor. Shape arithmetic is explicit everywhere; there is no
/// implicit broadcasting.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {}

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }

  T& at(int in, int ic, int iy, int ix) {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  T at(int in, int ic, int iy, int ix) const {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  T* plane(int in, int ic) { return data.data() + (static_cast<size_t>(in) * c + ic) * h * w; }
  const T* plane(int in, int ic) const {
    return data.data() + (static_cast<size_t>(in) * c + ic) * h * w;
  }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out(n, c, h, w);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

template <typename T>
void check_same_shape(const Tensor4<T>& a, const Tensor4<T>& b, const char* where) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
}

}  // namespace swsr
