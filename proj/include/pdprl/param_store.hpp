#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdprl/rng.hpp"
#include "pdprl/tensor.hpp"

namespace pdprl {

// Named, shaped learnable arrays with parallel gradient and Adam moment
// buffers. Iteration order is insertion order, which fixes the update and
// serialization order. Single-writer: gradient accumulation and optimizer
// steps require exclusive access; frozen reads are freely shared.
template <typename T>
class ParamStore {
 public:
  int add(const std::string& name, Tensor2<T> init) {
    if (index_.count(name)) throw Error("duplicate parameter: " + name);
    int slot = static_cast<int>(names_.size());
    index_[name] = slot;
    names_.push_back(name);
    grads_.emplace_back(init.rows, init.cols);
    m_.emplace_back(init.rows, init.cols);
    v_.emplace_back(init.rows, init.cols);
    values_.push_back(std::move(init));
    return slot;
  }

  int slot(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  int require(const std::string& name) const {
    int s = slot(name);
    if (s < 0) throw Error("unknown parameter: " + name);
    return s;
  }

  int count() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  Tensor2<T>& value(int slot) { return values_[static_cast<size_t>(slot)]; }
  const Tensor2<T>& value(int slot) const { return values_[static_cast<size_t>(slot)]; }
  Tensor2<T>& value(const std::string& name) { return values_[static_cast<size_t>(require(name))]; }
  const Tensor2<T>& value(const std::string& name) const {
    return values_[static_cast<size_t>(require(name))];
  }

  Tensor2<T>& grad(int slot) { return grads_[static_cast<size_t>(slot)]; }
  Tensor2<T>& grad(const std::string& name) { return grads_[static_cast<size_t>(require(name))]; }

  void zero_grads() {
    for (auto& g : grads_) g.fill(T(0));
    grads_populated_ = false;
  }

  void mark_grads_populated() { grads_populated_ = true; }
  bool grads_populated() const { return grads_populated_; }

  Tensor2<T>& moment1(int slot) { return m_[static_cast<size_t>(slot)]; }
  Tensor2<T>& moment2(int slot) { return v_[static_cast<size_t>(slot)]; }

  std::uint64_t scalar_count() const {
    std::uint64_t c = 0;
    for (const auto& t : values_) c += t.size();
    return c;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (int s = 0; s < count(); ++s)
      out.add(names_[static_cast<size_t>(s)], values_[static_cast<size_t>(s)].template cast<U>());
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<Tensor2<T>> values_;
  std::vector<Tensor2<T>> grads_;
  std::vector<Tensor2<T>> m_, v_;
  bool grads_populated_ = false;
};

// Per-episode gradient accumulator aligned with a store's slots. Keeping
// contributions separate lets the trainer reduce them in a fixed order, so
// results do not depend on thread scheduling.
template <typename T>
struct GradBuffer {
  std::vector<Tensor2<T>> g;

  void reset(const ParamStore<T>& store) {
    g.resize(static_cast<size_t>(store.count()));
    for (int s = 0; s < store.count(); ++s) {
      const auto& val = store.value(s);
      if (g[static_cast<size_t>(s)].rows != val.rows ||
          g[static_cast<size_t>(s)].cols != val.cols)
        g[static_cast<size_t>(s)] = Tensor2<T>(val.rows, val.cols);
      else
        g[static_cast<size_t>(s)].fill(T(0));
    }
  }
};

// store.grad += buffer * scale
template <typename T>
void accumulate(ParamStore<T>& store, const GradBuffer<T>& buf, T scale) {
  for (int s = 0; s < store.count(); ++s) {
    auto& dst = store.grad(s);
    const auto& src = buf.g[static_cast<size_t>(s)];
    if (src.empty()) continue;
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
  }
  store.mark_grads_populated();
}

// Standard Adam update with bias correction; moment buffers live in the
// store. `t` is the 1-based step count.
template <typename T>
void adam_step(ParamStore<T>& store, T lr, T beta1, T beta2, T eps, int t) {
  if (!store.grads_populated())
    throw GradientUnavailable("adam_step before gradients were accumulated");
  T bc1 = T(1) - std::pow(beta1, T(t));
  T bc2 = T(1) - std::pow(beta2, T(t));
  for (int s = 0; s < store.count(); ++s) {
    auto& theta = store.value(s);
    auto& g = store.grad(s);
    auto& m = store.moment1(s);
    auto& v = store.moment2(s);
    for (size_t i = 0; i < theta.data.size(); ++i) {
      T gi = g.data[i];
      m.data[i] = beta1 * m.data[i] + (T(1) - beta1) * gi;
      v.data[i] = beta2 * v.data[i] + (T(1) - beta2) * gi * gi;
      T mhat = m.data[i] / bc1;
      T vhat = v.data[i] / bc2;
      theta.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

// Fan-in uniform init: W ~ U(-1/sqrt(d_in), 1/sqrt(d_in)) with d_in = rows
// (inputs are row vectors, applied as x * W). Biases start at zero.
template <typename T>
Tensor2<T> init_weight(int rows, int cols, Rng& rng) {
  Tensor2<T> w(rows, cols);
  double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (auto& x : w.data) x = static_cast<T>(rng.uniform(-bound, bound));
  return w;
}

}  // namespace pdprl
