#pragma once

#include <vector>

#include "pdprl/instance.hpp"
#include "pdprl/model.hpp"
#include "pdprl/nn.hpp"

namespace pdprl {

// Additive intra-cluster attention mask: 0 where roles match, sentinel
// otherwise. The depot is a singleton cluster and attends only to itself.
template <typename T>
Tensor2<T> cluster_mask(const PdpInstance& inst) {
  int m = inst.node_count();
  Tensor2<T> mask(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (inst.role(i) != inst.role(j)) mask.at(i, j) = kMaskSentinel<T>;
  return mask;
}

// Per-node input features [x, y, onehot3(role)] mapped by one shared linear
// layer to the embedding dim.
template <typename T>
typename Tape<T>::Var embed_inputs(ParamVars<T>& pv, const PdpInstance& inst) {
  auto& t = pv.tape();
  int m = inst.node_count();
  Tensor2<T> feat(m, 5);
  for (int i = 0; i < m; ++i) {
    feat.at(i, 0) = static_cast<T>(inst.coords[static_cast<size_t>(i)][0]);
    feat.at(i, 1) = static_cast<T>(inst.coords[static_cast<size_t>(i)][1]);
    feat.at(i, 2 + static_cast<int>(inst.role(i))) = T(1);
  }
  return linear(t, t.constant(std::move(feat)), pv("encoder.embed.W"),
                pv("encoder.embed.b"));
}

// Replaces the depot row by attention with the depot embedding as query and
// all customer embeddings as keys/values; customer rows pass through
// untouched. Pure replacement, no residual.
template <typename T>
typename Tape<T>::Var depot_cross_attention(ParamVars<T>& pv,
                                            typename Tape<T>::Var H0,
                                            int heads) {
  auto& t = pv.tape();
  int m = t.value(H0).rows;
  if (m <= 1) return H0;
  std::vector<int> cust(static_cast<size_t>(m - 1));
  for (int i = 1; i < m; ++i) cust[static_cast<size_t>(i - 1)] = i;
  auto depot = t.select_rows(H0, {0});
  auto customers = t.select_rows(H0, cust);
  auto q = t.matmul(depot, pv("encoder.depot_ca.Wq"));
  auto k = t.matmul(customers, pv("encoder.depot_ca.Wk"));
  auto v = t.matmul(customers, pv("encoder.depot_ca.Wv"));
  auto depot_out = mha(t, q, k, v, heads, pv("encoder.depot_ca.Wo"));
  return t.concat_rows({depot_out, customers});
}

// One dual-attention layer: global self-attention plus (optionally) masked
// intra-cluster attention, fused by addition, then linear + residual + LN,
// then FFN + residual + LN.
template <typename T>
typename Tape<T>::Var encoder_layer(ParamVars<T>& pv, typename Tape<T>::Var H,
                                    const Tensor2<T>* mask,
                                    const EncoderConfig& cfg, int l) {
  auto& t = pv.tape();
  auto branch = [&](const char* which, const Tensor2<T>* m) {
    auto q = t.matmul(H, pv(names::layer(l, (std::string(which) + ".Wq").c_str())));
    auto k = t.matmul(H, pv(names::layer(l, (std::string(which) + ".Wk").c_str())));
    auto v = t.matmul(H, pv(names::layer(l, (std::string(which) + ".Wv").c_str())));
    return mha(t, q, k, v, cfg.heads,
               pv(names::layer(l, (std::string(which) + ".Wo").c_str())), m);
  };
  auto fused = branch("global", nullptr);
  if (cfg.cluster_attention_enabled) fused = t.add(fused, branch("cluster", mask));
  auto combined = linear(t, fused, pv(names::layer(l, "fuse.W")),
                         pv(names::layer(l, "fuse.b")));
  auto h1 = t.layer_norm(t.add(H, combined), pv(names::layer(l, "ln1.gain")),
                         pv(names::layer(l, "ln1.shift")));
  auto ff = ffn(t, h1, pv(names::layer(l, "ffn.W1")), pv(names::layer(l, "ffn.b1")),
                pv(names::layer(l, "ffn.W2")), pv(names::layer(l, "ffn.b2")));
  return t.layer_norm(t.add(h1, ff), pv(names::layer(l, "ln2.gain")),
                      pv(names::layer(l, "ln2.shift")));
}

// Full encoder: initial embedding, depot cross-attention, L stacked layers.
// Returns the (2n+1 x d_h) node embedding matrix.
template <typename T>
typename Tape<T>::Var encode(ParamVars<T>& pv, const PdpInstance& inst,
                             const EncoderConfig& cfg) {
  auto& t = pv.tape();
  auto H = embed_inputs(pv, inst);
  H = depot_cross_attention(pv, H, cfg.heads);
  const Tensor2<T>* mask =
      cfg.cluster_attention_enabled ? t.own_mask(cluster_mask<T>(inst)) : nullptr;
  for (int l = 0; l < cfg.L; ++l) H = encoder_layer(pv, H, mask, cfg, l);
  return H;
}

}  // namespace pdprl
