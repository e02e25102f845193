#pragma once

#include <string>

#include "pdprl/param_store.hpp"

namespace pdprl {

struct EncoderConfig {
  int d_h = 128;
  int L = 6;
  int heads = 8;
  int ffn_hidden = 512;
  bool cluster_attention_enabled = true;
};

struct DecoderConfig {
  double clip = 10.0;  // logit clipping C
  bool dual_decoder_enabled = true;
  int gate_hidden = 128;
};

enum class Ablation { Full, NoEncoder, NoDecoder, Pomo };

const char* to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);

struct ModelConfig {
  EncoderConfig enc;
  DecoderConfig dec;

  void validate() const {
    if (enc.L < 1) throw Error("encoder needs at least one layer");
    if (enc.heads < 1 || enc.d_h % enc.heads != 0)
      throw Error("embedding dim must be divisible by head count");
    if (dec.clip <= 0) throw Error("logit clip must be positive");
  }

  // Ablations rewire the forward pass only; the parameter set is identical,
  // so one store can be evaluated under any variant.
  void apply(Ablation a) {
    enc.cluster_attention_enabled = (a == Ablation::Full || a == Ablation::NoDecoder);
    dec.dual_decoder_enabled = (a == Ablation::Full || a == Ablation::NoEncoder);
  }
};

inline const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoEncoder: return "no_encoder";
    case Ablation::NoDecoder: return "no_decoder";
    case Ablation::Pomo: return "pomo";
  }
  return "?";
}

inline Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return Ablation::Full;
  if (s == "no_encoder") return Ablation::NoEncoder;
  if (s == "no_decoder") return Ablation::NoDecoder;
  if (s == "pomo") return Ablation::Pomo;
  throw Error("unknown ablation: " + s);
}

namespace names {

inline std::string layer(int l, const char* rest) {
  return "encoder.layer" + std::to_string(l) + "." + rest;
}

}  // namespace names

// Creates every learnable tensor with fan-in uniform init (biases and LN
// shifts zero, LN gains one). Creation order fixes update and checkpoint
// order.
template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  int d = cfg.enc.d_h;
  Rng rng(seed);
  ParamStore<T> store;
  auto weight = [&](const std::string& name, int rows, int cols) {
    store.add(name, init_weight<T>(rows, cols, rng));
  };
  auto zeros = [&](const std::string& name, int rows, int cols) {
    store.add(name, Tensor2<T>(rows, cols));
  };
  auto ones = [&](const std::string& name, int cols) {
    Tensor2<T> t(1, cols);
    t.fill(T(1));
    store.add(name, std::move(t));
  };

  weight("encoder.embed.W", 5, d);  // [x, y, onehot3(role)]
  zeros("encoder.embed.b", 1, d);

  weight("encoder.depot_ca.Wq", d, d);
  weight("encoder.depot_ca.Wk", d, d);
  weight("encoder.depot_ca.Wv", d, d);
  weight("encoder.depot_ca.Wo", d, d);

  for (int l = 0; l < cfg.enc.L; ++l) {
    weight(names::layer(l, "global.Wq"), d, d);
    weight(names::layer(l, "global.Wk"), d, d);
    weight(names::layer(l, "global.Wv"), d, d);
    weight(names::layer(l, "global.Wo"), d, d);
    weight(names::layer(l, "cluster.Wq"), d, d);
    weight(names::layer(l, "cluster.Wk"), d, d);
    weight(names::layer(l, "cluster.Wv"), d, d);
    weight(names::layer(l, "cluster.Wo"), d, d);
    weight(names::layer(l, "fuse.W"), d, d);
    zeros(names::layer(l, "fuse.b"), 1, d);
    ones(names::layer(l, "ln1.gain"), d);
    zeros(names::layer(l, "ln1.shift"), 1, d);
    weight(names::layer(l, "ffn.W1"), d, cfg.enc.ffn_hidden);
    zeros(names::layer(l, "ffn.b1"), 1, cfg.enc.ffn_hidden);
    weight(names::layer(l, "ffn.W2"), cfg.enc.ffn_hidden, d);
    zeros(names::layer(l, "ffn.b2"), 1, d);
    ones(names::layer(l, "ln2.gain"), d);
    zeros(names::layer(l, "ln2.shift"), 1, d);
  }

  weight("decoder.Wq_first", d, d);
  weight("decoder.Wq_last", d, d);
  weight("decoder.Wq_cluster", d, d);
  weight("decoder.glimpse.Wk", d, d);
  weight("decoder.glimpse.Wv", d, d);
  weight("decoder.glimpse.Wo", d, d);
  weight("decoder.logit.Wk", d, d);

  weight("gate.W1", 3 * d, cfg.dec.gate_hidden);
  zeros("gate.b1", 1, cfg.dec.gate_hidden);
  weight("gate.W2", cfg.dec.gate_hidden, 1);
  zeros("gate.b2", 1, 1);

  return store;
}

}  // namespace pdprl
