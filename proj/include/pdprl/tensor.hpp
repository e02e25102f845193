#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pdprl/common.hpp"

namespace pdprl {

// Dense row-major matrix. Parameters and activations are float in training;
// the same code instantiates with double for gradient-check replay.
template <typename T>
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Tensor2() = default;
  Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, T(0)) {}

  bool empty() const { return rows == 0; }
  size_t size() const { return data.size(); }

  T& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  const T& at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  T* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
  const T* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor2& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor2<U> cast() const {
    Tensor2<U> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

// C += A * B        (A: m x k, B: k x n, C: m x n)
template <typename T>
void mm_acc(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    T* ci = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      T s = ai[p];
      const T* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

// C += A * B^T      (A: m x k, B: n x k, C: m x n)
template <typename T>
void mm_nt_acc(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    T* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<size_t>(j) * k;
      T s = T(0);
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// C += A^T * B      (A: p x m, B: p x n, C: m x n)
template <typename T>
void mm_tn_acc(const T* a, const T* b, T* c, int p, int m, int n) {
  for (int t = 0; t < p; ++t) {
    const T* at = a + static_cast<size_t>(t) * m;
    const T* bt = b + static_cast<size_t>(t) * n;
    for (int i = 0; i < m; ++i) {
      T s = at[i];
      if (s == T(0)) continue;
      T* ci = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += s * bt[j];
    }
  }
}

}  // namespace pdprl
