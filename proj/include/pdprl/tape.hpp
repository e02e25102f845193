#pragma once

#include <cassert>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "pdprl/param_store.hpp"
#include "pdprl/tensor.hpp"

namespace pdprl {

// Additive-mask sentinel standing in for -inf inside softmax; large enough
// that exp underflows to exact zero, finite enough that no NaN propagates.
template <typename T>
constexpr T kMaskSentinel = T(-1e9);

template <typename T>
inline bool is_masked(T m) {
  return m <= kMaskSentinel<T> / 2;
}

// Reverse-mode tape over Tensor2 values. Operations record closures that
// push adjoints to their inputs; backward() replays them in reverse and
// deposits parameter gradients into a GradBuffer. Construct with
// recording=false for inference-only episodes.
template <typename T>
class Tape {
 public:
  using Var = int;

  explicit Tape(bool recording = true) : recording_(recording) {}

  // Backward closures capture `this`; the tape must stay put.
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  size_t node_count() const { return nodes_.size(); }

  const Tensor2<T>& value(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v)];
    return n.ext ? *n.ext : n.val;
  }

  Var constant(Tensor2<T> v) {
    return push(std::move(v), /*needs_grad=*/false);
  }

  // Stable storage for additive masks referenced by softmax nodes.
  const Tensor2<T>* own_mask(Tensor2<T> m) {
    masks_.push_back(std::move(m));
    return &masks_.back();
  }

  Var param(ParamStore<T>& store, int slot) {
    Node n;
    n.ext = &store.value(slot);
    n.slot = slot;
    n.needs_grad = recording_;
    nodes_.push_back(std::move(n));
    Var v = static_cast<Var>(nodes_.size() - 1);
    if (recording_) leaves_.push_back(v);
    return v;
  }

  Var param(ParamStore<T>& store, const std::string& name) {
    return param(store, store.require(name));
  }

  Var matmul(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.cols != B.rows) throw ShapeError("matmul: inner dimensions disagree");
    Tensor2<T> C(A.rows, B.cols);
    mm_acc(A.data.data(), B.data.data(), C.data.data(), A.rows, A.cols, B.cols);
    Var out = push(std::move(C), needs(a) || needs(b));
    if (grad_wanted(out)) {
      record([this, a, b, out] {
        const auto& dC = grad_ro(out);
        const auto& Av = value(a);
        const auto& Bv = value(b);
        if (needs(a))
          mm_nt_acc(dC.data.data(), Bv.data.data(), grad_rw(a).data.data(),
                    dC.rows, dC.cols, Av.cols);
        if (needs(b))
          mm_tn_acc(Av.data.data(), dC.data.data(), grad_rw(b).data.data(),
                    Av.rows, Av.cols, dC.cols);
      });
    }
    return out;
  }

  // A * B^T; B given row-major as (n x k).
  Var matmul_nt(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.cols != B.cols) throw ShapeError("matmul_nt: inner dimensions disagree");
    Tensor2<T> C(A.rows, B.rows);
    mm_nt_acc(A.data.data(), B.data.data(), C.data.data(), A.rows, A.cols, B.rows);
    Var out = push(std::move(C), needs(a) || needs(b));
    if (grad_wanted(out)) {
      record([this, a, b, out] {
        const auto& dC = grad_ro(out);
        const auto& Av = value(a);
        const auto& Bv = value(b);
        if (needs(a))
          mm_acc(dC.data.data(), Bv.data.data(), grad_rw(a).data.data(),
                 dC.rows, dC.cols, Bv.cols);
        if (needs(b))
          mm_tn_acc(dC.data.data(), Av.data.data(), grad_rw(b).data.data(),
                    dC.rows, dC.cols, Av.cols);
      });
    }
    return out;
  }

  Var add(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("add: shapes disagree");
    Tensor2<T> C = A;
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] += B.data[i];
    Var out = push(std::move(C), needs(a) || needs(b));
    if (grad_wanted(out)) {
      record([this, a, b, out] {
        const auto& dC = grad_ro(out);
        if (needs(a)) axpy(grad_rw(a), dC);
        if (needs(b)) axpy(grad_rw(b), dC);
      });
    }
    return out;
  }

  Var add_many(const std::vector<Var>& xs) {
    Var acc = xs.front();
    for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
    return acc;
  }

  // Broadcast a 1 x c row vector over every row of a.
  Var add_rowvec(Var a, Var v) {
    const auto& A = value(a);
    const auto& V = value(v);
    if (V.rows != 1 || V.cols != A.cols) throw ShapeError("add_rowvec: bad bias shape");
    Tensor2<T> C = A;
    for (int i = 0; i < C.rows; ++i) {
      T* ci = C.row(i);
      for (int j = 0; j < C.cols; ++j) ci[j] += V.data[static_cast<size_t>(j)];
    }
    Var out = push(std::move(C), needs(a) || needs(v));
    if (grad_wanted(out)) {
      record([this, a, v, out] {
        const auto& dC = grad_ro(out);
        if (needs(a)) axpy(grad_rw(a), dC);
        if (needs(v)) {
          auto& dV = grad_rw(v);
          for (int i = 0; i < dC.rows; ++i) {
            const T* di = dC.row(i);
            for (int j = 0; j < dC.cols; ++j) dV.data[static_cast<size_t>(j)] += di[j];
          }
        }
      });
    }
    return out;
  }

  Var scale(Var a, T s) { return affine(a, s, T(0)); }

  // alpha * a + beta, elementwise constants.
  Var affine(Var a, T alpha, T beta) {
    Tensor2<T> C = value(a);
    for (auto& x : C.data) x = alpha * x + beta;
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out, alpha] {
        const auto& dC = grad_ro(out);
        auto& dA = grad_rw(a);
        for (size_t i = 0; i < dC.data.size(); ++i) dA.data[i] += alpha * dC.data[i];
      });
    }
    return out;
  }

  Var relu(Var a) {
    Tensor2<T> C = value(a);
    for (auto& x : C.data) x = x > T(0) ? x : T(0);
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out] {
        const auto& dC = grad_ro(out);
        const auto& Av = value(a);
        auto& dA = grad_rw(a);
        for (size_t i = 0; i < dC.data.size(); ++i)
          if (Av.data[i] > T(0)) dA.data[i] += dC.data[i];
      });
    }
    return out;
  }

  Var tanh_op(Var a) {
    Tensor2<T> C = value(a);
    for (auto& x : C.data) x = std::tanh(x);
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out] {
        const auto& dC = grad_ro(out);
        const auto& Y = value(out);
        auto& dA = grad_rw(a);
        for (size_t i = 0; i < dC.data.size(); ++i)
          dA.data[i] += dC.data[i] * (T(1) - Y.data[i] * Y.data[i]);
      });
    }
    return out;
  }

  Var sigmoid_op(Var a) {
    Tensor2<T> C = value(a);
    for (auto& x : C.data) x = T(1) / (T(1) + std::exp(-x));
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out] {
        const auto& dC = grad_ro(out);
        const auto& Y = value(out);
        auto& dA = grad_rw(a);
        for (size_t i = 0; i < dC.data.size(); ++i)
          dA.data[i] += dC.data[i] * Y.data[i] * (T(1) - Y.data[i]);
      });
    }
    return out;
  }

  // Row-wise softmax of (a + mask). Masked entries come out exactly zero.
  // Throws MaskExhausted when a row has no unmasked entry.
  Var softmax_rows(Var a, const Tensor2<T>* mask) {
    const auto& A = value(a);
    if (mask && (mask->rows != A.rows || mask->cols != A.cols))
      throw ShapeError("softmax_rows: mask shape disagrees");
    Tensor2<T> Y(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
      const T* ai = A.row(i);
      const T* mi = mask ? mask->row(i) : nullptr;
      T mx = -std::numeric_limits<T>::infinity();
      bool any = false;
      for (int j = 0; j < A.cols; ++j) {
        if (mi && is_masked(mi[j])) continue;
        any = true;
        T v = ai[j] + (mi ? mi[j] : T(0));
        if (v > mx) mx = v;
      }
      if (!any) throw MaskExhausted("softmax row fully masked");
      T* yi = Y.row(i);
      T sum = T(0);
      for (int j = 0; j < A.cols; ++j) {
        if (mi && is_masked(mi[j])) {
          yi[j] = T(0);
          continue;
        }
        T e = std::exp(ai[j] + (mi ? mi[j] : T(0)) - mx);
        yi[j] = e;
        sum += e;
      }
      T inv = T(1) / sum;
      for (int j = 0; j < A.cols; ++j) yi[j] *= inv;
      if (mi)
        for (int j = 0; j < A.cols; ++j)
          if (is_masked(mi[j])) yi[j] = T(0);
    }
    Var out = push(std::move(Y), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out] {
        const auto& dY = grad_ro(out);
        const auto& Yv = value(out);
        auto& dA = grad_rw(a);
        for (int i = 0; i < dY.rows; ++i) {
          const T* dyi = dY.row(i);
          const T* yi = Yv.row(i);
          T dot = T(0);
          for (int j = 0; j < dY.cols; ++j) dot += dyi[j] * yi[j];
          T* dai = dA.row(i);
          for (int j = 0; j < dY.cols; ++j) dai[j] += yi[j] * (dyi[j] - dot);
        }
      });
    }
    return out;
  }

  // Per-row normalization to zero mean / unit variance (eps 1e-5), then an
  // affine map with 1 x c gain and shift.
  Var layer_norm(Var a, Var gain, Var shift) {
    const auto& A = value(a);
    const auto& G = value(gain);
    const auto& S = value(shift);
    if (G.rows != 1 || G.cols != A.cols || S.rows != 1 || S.cols != A.cols)
      throw ShapeError("layer_norm: gain/shift must be 1 x cols");
    const T eps = T(1e-5);
    Tensor2<T> Y(A.rows, A.cols);
    Tensor2<T> xhat(A.rows, A.cols);
    std::vector<T> inv_sd(static_cast<size_t>(A.rows));
    for (int i = 0; i < A.rows; ++i) {
      const T* ai = A.row(i);
      T mean = T(0);
      for (int j = 0; j < A.cols; ++j) mean += ai[j];
      mean /= T(A.cols);
      T var = T(0);
      for (int j = 0; j < A.cols; ++j) {
        T d = ai[j] - mean;
        var += d * d;
      }
      var /= T(A.cols);
      T isd = T(1) / std::sqrt(var + eps);
      inv_sd[static_cast<size_t>(i)] = isd;
      T* xh = xhat.row(i);
      T* yi = Y.row(i);
      for (int j = 0; j < A.cols; ++j) {
        xh[j] = (ai[j] - mean) * isd;
        yi[j] = xh[j] * G.data[static_cast<size_t>(j)] + S.data[static_cast<size_t>(j)];
      }
    }
    Var out = push(std::move(Y), needs(a) || needs(gain) || needs(shift));
    if (grad_wanted(out)) {
      auto xh_keep = std::make_shared<Tensor2<T>>(std::move(xhat));
      auto isd_keep = std::make_shared<std::vector<T>>(std::move(inv_sd));
      record([this, a, gain, shift, out, xh_keep, isd_keep] {
        const auto& dY = grad_ro(out);
        const auto& G = value(gain);
        int cols = dY.cols;
        for (int i = 0; i < dY.rows; ++i) {
          const T* dyi = dY.row(i);
          const T* xh = xh_keep->row(i);
          if (needs(gain)) {
            auto& dG = grad_rw(gain);
            for (int j = 0; j < cols; ++j) dG.data[static_cast<size_t>(j)] += dyi[j] * xh[j];
          }
          if (needs(shift)) {
            auto& dS = grad_rw(shift);
            for (int j = 0; j < cols; ++j) dS.data[static_cast<size_t>(j)] += dyi[j];
          }
          if (needs(a)) {
            T mean_dxhat = T(0), mean_dxhat_xhat = T(0);
            for (int j = 0; j < cols; ++j) {
              T dxh = dyi[j] * G.data[static_cast<size_t>(j)];
              mean_dxhat += dxh;
              mean_dxhat_xhat += dxh * xh[j];
            }
            mean_dxhat /= T(cols);
            mean_dxhat_xhat /= T(cols);
            T isd = (*isd_keep)[static_cast<size_t>(i)];
            auto& dA = grad_rw(a);
            T* dai = dA.row(i);
            for (int j = 0; j < cols; ++j) {
              T dxh = dyi[j] * G.data[static_cast<size_t>(j)];
              dai[j] += (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat) * isd;
            }
          }
        }
      });
    }
    return out;
  }

  Var select_rows(Var a, std::vector<int> idx) {
    const auto& A = value(a);
    Tensor2<T> C(static_cast<int>(idx.size()), A.cols);
    for (size_t r = 0; r < idx.size(); ++r)
      std::copy_n(A.row(idx[r]), A.cols, C.row(static_cast<int>(r)));
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out, idx = std::move(idx)] {
        const auto& dC = grad_ro(out);
        auto& dA = grad_rw(a);
        for (size_t r = 0; r < idx.size(); ++r) {
          const T* src = dC.row(static_cast<int>(r));
          T* dst = dA.row(idx[r]);
          for (int j = 0; j < dC.cols; ++j) dst[j] += src[j];
        }
      });
    }
    return out;
  }

  Var concat_rows(const std::vector<Var>& xs) {
    int cols = value(xs.front()).cols;
    int rows = 0;
    bool ng = false;
    for (Var x : xs) {
      const auto& X = value(x);
      if (X.cols != cols) throw ShapeError("concat_rows: column counts disagree");
      rows += X.rows;
      ng = ng || needs(x);
    }
    Tensor2<T> C(rows, cols);
    int at = 0;
    for (Var x : xs) {
      const auto& X = value(x);
      std::copy_n(X.data.data(), X.size(), C.row(at));
      at += X.rows;
    }
    Var out = push(std::move(C), ng);
    if (grad_wanted(out)) {
      record([this, xs, out] {
        const auto& dC = grad_ro(out);
        int at = 0;
        for (Var x : xs) {
          const auto& X = value(x);
          if (needs(x)) {
            auto& dX = grad_rw(x);
            for (int i = 0; i < X.rows; ++i) {
              const T* src = dC.row(at + i);
              T* dst = dX.row(i);
              for (int j = 0; j < dC.cols; ++j) dst[j] += src[j];
            }
          }
          at += X.rows;
        }
      });
    }
    return out;
  }

  Var slice_cols(Var a, int start, int len) {
    const auto& A = value(a);
    if (start < 0 || start + len > A.cols) throw ShapeError("slice_cols: out of range");
    Tensor2<T> C(A.rows, len);
    for (int i = 0; i < A.rows; ++i)
      std::copy_n(A.row(i) + start, len, C.row(i));
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out, start, len] {
        const auto& dC = grad_ro(out);
        auto& dA = grad_rw(a);
        for (int i = 0; i < dC.rows; ++i) {
          const T* src = dC.row(i);
          T* dst = dA.row(i) + start;
          for (int j = 0; j < len; ++j) dst[j] += src[j];
        }
      });
    }
    return out;
  }

  Var concat_cols(const std::vector<Var>& xs) {
    int rows = value(xs.front()).rows;
    int cols = 0;
    bool ng = false;
    for (Var x : xs) {
      const auto& X = value(x);
      if (X.rows != rows) throw ShapeError("concat_cols: row counts disagree");
      cols += X.cols;
      ng = ng || needs(x);
    }
    Tensor2<T> C(rows, cols);
    int at = 0;
    for (Var x : xs) {
      const auto& X = value(x);
      for (int i = 0; i < rows; ++i)
        std::copy_n(X.row(i), X.cols, C.row(i) + at);
      at += X.cols;
    }
    Var out = push(std::move(C), ng);
    if (grad_wanted(out)) {
      record([this, xs, out] {
        const auto& dC = grad_ro(out);
        int at = 0;
        for (Var x : xs) {
          const auto& X = value(x);
          if (needs(x)) {
            auto& dX = grad_rw(x);
            for (int i = 0; i < dC.rows; ++i) {
              const T* src = dC.row(i) + at;
              T* dst = dX.row(i);
              for (int j = 0; j < X.cols; ++j) dst[j] += src[j];
            }
          }
          at += X.cols;
        }
      });
    }
    return out;
  }

  // Row r of the output is the mean of a's rows listed in groups[r].
  Var group_mean_rows(Var a, std::vector<std::vector<int>> groups) {
    const auto& A = value(a);
    Tensor2<T> C(static_cast<int>(groups.size()), A.cols);
    for (size_t r = 0; r < groups.size(); ++r) {
      if (groups[r].empty()) throw ShapeError("group_mean_rows: empty group");
      T* cr = C.row(static_cast<int>(r));
      for (int i : groups[r]) {
        const T* ai = A.row(i);
        for (int j = 0; j < A.cols; ++j) cr[j] += ai[j];
      }
      T inv = T(1) / T(groups[r].size());
      for (int j = 0; j < A.cols; ++j) cr[j] *= inv;
    }
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      record([this, a, out, groups = std::move(groups)] {
        const auto& dC = grad_ro(out);
        auto& dA = grad_rw(a);
        for (size_t r = 0; r < groups.size(); ++r) {
          const T* src = dC.row(static_cast<int>(r));
          T inv = T(1) / T(groups[r].size());
          for (int i : groups[r]) {
            T* dst = dA.row(i);
            for (int j = 0; j < dC.cols; ++j) dst[j] += src[j] * inv;
          }
        }
      });
    }
    return out;
  }

  // Scale row i of a by s[i]; s is (rows x 1).
  Var mul_colvec(Var a, Var s) {
    const auto& A = value(a);
    const auto& S = value(s);
    if (S.cols != 1 || S.rows != A.rows) throw ShapeError("mul_colvec: scale must be rows x 1");
    Tensor2<T> C = A;
    for (int i = 0; i < C.rows; ++i) {
      T m = S.data[static_cast<size_t>(i)];
      T* ci = C.row(i);
      for (int j = 0; j < C.cols; ++j) ci[j] *= m;
    }
    Var out = push(std::move(C), needs(a) || needs(s));
    if (grad_wanted(out)) {
      record([this, a, s, out] {
        const auto& dC = grad_ro(out);
        const auto& Av = value(a);
        const auto& Sv = value(s);
        if (needs(a)) {
          auto& dA = grad_rw(a);
          for (int i = 0; i < dC.rows; ++i) {
            T m = Sv.data[static_cast<size_t>(i)];
            const T* src = dC.row(i);
            T* dst = dA.row(i);
            for (int j = 0; j < dC.cols; ++j) dst[j] += src[j] * m;
          }
        }
        if (needs(s)) {
          auto& dS = grad_rw(s);
          for (int i = 0; i < dC.rows; ++i) {
            const T* src = dC.row(i);
            const T* ai = Av.row(i);
            T acc = T(0);
            for (int j = 0; j < dC.cols; ++j) acc += src[j] * ai[j];
            dS.data[static_cast<size_t>(i)] += acc;
          }
        }
      });
    }
    return out;
  }

  // out[i] = log p[i][col[i]]; probabilities are floored at the smallest
  // normal value purely to keep log and its adjoint finite.
  Var log_pick(Var p, std::vector<int> col) {
    const auto& P = value(p);
    if (static_cast<int>(col.size()) != P.rows) throw ShapeError("log_pick: one column per row");
    Tensor2<T> C(P.rows, 1);
    for (int i = 0; i < P.rows; ++i) {
      T v = P.at(i, col[static_cast<size_t>(i)]);
      C.data[static_cast<size_t>(i)] = std::log(std::max(v, std::numeric_limits<T>::min()));
    }
    Var out = push(std::move(C), needs(p));
    if (grad_wanted(out)) {
      record([this, p, out, col = std::move(col)] {
        const auto& dC = grad_ro(out);
        const auto& Pv = value(p);
        auto& dP = grad_rw(p);
        for (int i = 0; i < dC.rows; ++i) {
          T v = std::max(Pv.at(i, col[static_cast<size_t>(i)]),
                         std::numeric_limits<T>::min());
          dP.at(i, col[static_cast<size_t>(i)]) += dC.data[static_cast<size_t>(i)] / v;
        }
      });
    }
    return out;
  }

  // sum(a .* w) -> 1x1, w constant.
  Var weighted_sum(Var a, Tensor2<T> w) {
    const auto& A = value(a);
    if (!A.same_shape(w)) throw ShapeError("weighted_sum: shapes disagree");
    Tensor2<T> C(1, 1);
    T acc = T(0);
    for (size_t i = 0; i < A.data.size(); ++i) acc += A.data[i] * w.data[i];
    C.data[0] = acc;
    Var out = push(std::move(C), needs(a));
    if (grad_wanted(out)) {
      auto w_keep = std::make_shared<Tensor2<T>>(std::move(w));
      record([this, a, out, w_keep] {
        T d = grad_ro(out).data[0];
        auto& dA = grad_rw(a);
        for (size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += d * w_keep->data[i];
      });
    }
    return out;
  }

  // Seeds d(root)=1 and runs all recorded adjoint steps in reverse, then
  // deposits parameter-leaf gradients into `sink` (aligned with the store).
  void backward(Var root, GradBuffer<T>& sink) {
    if (!recording_)
      throw GradientUnavailable("backward on a non-recording tape");
    const auto& R = value(root);
    if (R.rows != 1 || R.cols != 1)
      throw GradientUnavailable("backward root must be a scalar");
    grad_rw(root).data[0] = T(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
    for (Var leaf : leaves_) {
      const Node& n = nodes_[static_cast<size_t>(leaf)];
      if (n.grad.empty()) continue;
      auto& dst = sink.g[static_cast<size_t>(n.slot)];
      for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += n.grad.data[i];
    }
  }

 private:
  struct Node {
    Tensor2<T> val;
    const Tensor2<T>* ext = nullptr;
    Tensor2<T> grad;
    int slot = -1;
    bool needs_grad = false;
  };

  Var push(Tensor2<T> v, bool needs_grad) {
#ifndef NDEBUG
    assert(v.all_finite() && "non-finite value out of a tape op");
#endif
    Node n;
    n.val = std::move(v);
    n.needs_grad = needs_grad && recording_;
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  bool needs(Var v) const { return nodes_[static_cast<size_t>(v)].needs_grad; }
  bool grad_wanted(Var out) const { return recording_ && needs(out); }

  Tensor2<T>& grad_rw(Var v) {
    Node& n = nodes_[static_cast<size_t>(v)];
    if (n.grad.empty()) {
      const Tensor2<T>& val = n.ext ? *n.ext : n.val;
      n.grad = Tensor2<T>(val.rows, val.cols);
    }
    return n.grad;
  }

  const Tensor2<T>& grad_ro(Var v) { return grad_rw(v); }

  void record(std::function<void()> fn) { back_.push_back(std::move(fn)); }

  static void axpy(Tensor2<T>& dst, const Tensor2<T>& src) {
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
  }

  bool recording_;
  std::vector<Node> nodes_;
  std::vector<std::function<void()>> back_;
  std::vector<Var> leaves_;
  std::deque<Tensor2<T>> masks_;
};

}  // namespace pdprl
