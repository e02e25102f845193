#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "pdprl/tape.hpp"

namespace pdprl {

// Caches one tape leaf per parameter so repeated uses share a node and its
// adjoint accumulates in place.
template <typename T>
class ParamVars {
 public:
  ParamVars(Tape<T>& tape, ParamStore<T>& store) : tape_(&tape), store_(&store) {}

  typename Tape<T>::Var operator()(const std::string& name) {
    int slot = store_->require(name);
    auto it = cache_.find(slot);
    if (it != cache_.end()) return it->second;
    auto v = tape_->param(*store_, slot);
    cache_[slot] = v;
    return v;
  }

  Tape<T>& tape() { return *tape_; }
  ParamStore<T>& store() { return *store_; }

 private:
  Tape<T>* tape_;
  ParamStore<T>* store_;
  std::unordered_map<int, typename Tape<T>::Var> cache_;
};

// x W (+ b broadcast over rows).
template <typename T>
typename Tape<T>::Var linear(Tape<T>& t, typename Tape<T>::Var x,
                             typename Tape<T>::Var W,
                             std::optional<typename Tape<T>::Var> b = {}) {
  auto y = t.matmul(x, W);
  if (b) y = t.add_rowvec(y, *b);
  return y;
}

// Multi-head scaled dot-product attention over already-projected Q, K, V
// (rows = tokens, cols = model dim). Heads are column slices; outputs are
// concatenated and projected by Wo. `mask` is an additive (q_rows x kv_rows)
// matrix using the kMaskSentinel convention, applied inside every head.
template <typename T>
typename Tape<T>::Var mha(Tape<T>& t, typename Tape<T>::Var Q,
                          typename Tape<T>::Var K, typename Tape<T>::Var V,
                          int heads, typename Tape<T>::Var Wo,
                          const Tensor2<T>* mask = nullptr) {
  int d = t.value(Q).cols;
  if (t.value(K).cols != d || t.value(V).cols != d)
    throw ShapeError("mha: Q/K/V feature dims disagree");
  if (heads < 1 || d % heads != 0)
    throw ShapeError("mha: feature dim not divisible by heads");
  int dk = d / heads;
  T norm = T(1) / std::sqrt(T(dk));
  std::vector<typename Tape<T>::Var> zs;
  zs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto Qh = t.slice_cols(Q, h * dk, dk);
    auto Kh = t.slice_cols(K, h * dk, dk);
    auto Vh = t.slice_cols(V, h * dk, dk);
    auto scores = t.scale(t.matmul_nt(Qh, Kh), norm);
    auto attn = t.softmax_rows(scores, mask);
    zs.push_back(t.matmul(attn, Vh));
  }
  return t.matmul(heads == 1 ? zs[0] : t.concat_cols(zs), Wo);
}

// Variant with per-head K/V slices prepared once and reused across calls
// (the decoder's keys and values are fixed for a whole episode).
template <typename T>
typename Tape<T>::Var mha_cached_kv(Tape<T>& t, typename Tape<T>::Var Q,
                                    const std::vector<typename Tape<T>::Var>& Kh,
                                    const std::vector<typename Tape<T>::Var>& Vh,
                                    typename Tape<T>::Var Wo,
                                    const Tensor2<T>* mask) {
  int heads = static_cast<int>(Kh.size());
  int d = t.value(Q).cols;
  if (heads < 1 || d % heads != 0)
    throw ShapeError("mha: feature dim not divisible by heads");
  int dk = d / heads;
  T norm = T(1) / std::sqrt(T(dk));
  std::vector<typename Tape<T>::Var> zs;
  zs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto Qh = t.slice_cols(Q, h * dk, dk);
    auto scores = t.scale(t.matmul_nt(Qh, Kh[static_cast<size_t>(h)]), norm);
    auto attn = t.softmax_rows(scores, mask);
    zs.push_back(t.matmul(attn, Vh[static_cast<size_t>(h)]));
  }
  return t.matmul(heads == 1 ? zs[0] : t.concat_cols(zs), Wo);
}

// Position-wise feed forward: linear -> ReLU -> linear.
template <typename T>
typename Tape<T>::Var ffn(Tape<T>& t, typename Tape<T>::Var x,
                          typename Tape<T>::Var W1, typename Tape<T>::Var b1,
                          typename Tape<T>::Var W2, typename Tape<T>::Var b2) {
  return linear(t, t.relu(linear(t, x, W1, b1)), W2, b2);
}

// Plain-vector softmax with an additive mask; masked entries are exactly 0.
template <typename T>
std::vector<T> softmax_masked(const std::vector<T>& logits,
                              const std::vector<T>& mask) {
  if (logits.size() != mask.size())
    throw ShapeError("softmax_masked: lengths disagree");
  Tape<T> t(false);
  Tensor2<T> l(1, static_cast<int>(logits.size()));
  l.data = logits;
  Tensor2<T> m(1, static_cast<int>(mask.size()));
  m.data = mask;
  auto a = t.constant(std::move(l));
  auto y = t.softmax_rows(a, t.own_mask(std::move(m)));
  return t.value(y).data;
}

}  // namespace pdprl
