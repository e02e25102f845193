#pragma once

#include <utility>
#include <vector>

#include "pdprl/encoder.hpp"
#include "pdprl/env.hpp"
#include "pdprl/rng.hpp"

namespace pdprl {

enum class DecodeMode { Greedy, Sample, Replay };

// One decoding step's distributions (diagnostic view of a single state).
template <typename T>
struct StepDistribution {
  std::vector<T> p_intra, p_inter, pi;  // over 2n+1 nodes; masked entries 0
  T p_stay = T(0.5);
  std::vector<T> u_intra, u_inter;  // clipped logits before the final mask
};

// First node of the maximal tour suffix whose nodes share the current node's
// role; the depot itself at t=0.
inline int first_of_suffix(const PdpInstance& inst, const RouteState& state) {
  NodeRole role = inst.role(state.current);
  int first = state.current;
  for (auto it = state.tour.rbegin(); it != state.tour.rend(); ++it) {
    if (inst.role(*it) != role) break;
    first = *it;
  }
  return first;
}

// Decoding-time tape state shared by all rollouts of one instance: encoder
// output, glimpse key/value head slices, logit keys, cluster mean rows.
template <typename T>
class DecoderSession {
 public:
  using Var = typename Tape<T>::Var;

  DecoderSession(ParamVars<T>& pv, const PdpInstance& inst, const ModelConfig& cfg)
      : DecoderSession(pv, inst, cfg, encode(pv, inst, cfg.enc)) {}

  DecoderSession(ParamVars<T>& pv, const PdpInstance& inst, const ModelConfig& cfg,
                 Var H)
      : pv_(&pv), inst_(&inst), cfg_(&cfg), H_(H) {
    auto& t = tape();
    int d = cfg.enc.d_h;
    int dk = d / cfg.enc.heads;
    auto K = t.matmul(H_, pv("decoder.glimpse.Wk"));
    auto V = t.matmul(H_, pv("decoder.glimpse.Wv"));
    for (int h = 0; h < cfg.enc.heads; ++h) {
      Kh_.push_back(t.slice_cols(K, h * dk, dk));
      Vh_.push_back(t.slice_cols(V, h * dk, dk));
    }
    Kl_ = t.matmul(H_, pv("decoder.logit.Wk"));

    std::vector<std::vector<int>> role_groups(3);
    role_groups[0] = {0};
    for (int i = 1; i <= inst.n; ++i) role_groups[1].push_back(i);
    for (int i = inst.n + 1; i <= 2 * inst.n; ++i) role_groups[2].push_back(i);
    role_means_ = t.group_mean_rows(H_, std::move(role_groups));
  }

  Tape<T>& tape() { return pv_->tape(); }
  Var embeddings() const { return H_; }

  struct StepVars {
    Var pi = -1;
    Var p_intra = -1, p_inter = -1, p_stay = -1;
    Var u_intra = -1, u_inter = -1;
  };

  // One synchronized decoding step for a batch of rollout states. `mask` is
  // the additive feasibility mask (rows x nodes) owned by the tape.
  StepVars step(const std::vector<RouteState>& states,
                const std::vector<int>& firsts, const Tensor2<T>* mask) {
    auto& t = tape();
    auto& pv = *pv_;
    int rows = static_cast<int>(states.size());

    std::vector<int> currents(static_cast<size_t>(rows));
    std::vector<int> cur_role(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      currents[static_cast<size_t>(r)] = states[static_cast<size_t>(r)].current;
      cur_role[static_cast<size_t>(r)] =
          static_cast<int>(inst_->role(states[static_cast<size_t>(r)].current));
    }

    auto h_last = t.select_rows(H_, currents);
    auto q_last = t.matmul(h_last, pv("decoder.Wq_last"));
    auto h_first = t.select_rows(H_, firsts);
    auto q_intra = t.add(t.matmul(h_first, pv("decoder.Wq_first")), q_last);

    StepVars out;
    auto pipe = [&](Var q) {
      auto glimpse = mha_cached_kv(t, q, Kh_, Vh_, pv("decoder.glimpse.Wo"), mask);
      auto u = t.scale(t.matmul_nt(glimpse, Kl_),
                       T(1) / std::sqrt(T(cfg_->enc.d_h)));
      auto clipped = t.scale(t.tanh_op(u), T(cfg_->dec.clip));
      return std::make_pair(t.softmax_rows(clipped, mask), clipped);
    };

    if (!cfg_->dec.dual_decoder_enabled) {
      auto [p, u] = pipe(q_intra);
      out.pi = p;
      out.u_intra = u;
      return out;
    }

    auto mean_current = t.select_rows(role_means_, cur_role);
    auto q_inter = t.add(q_last, t.matmul(mean_current, pv("decoder.Wq_cluster")));

    // Mean embedding of feasible nodes outside the current cluster; all
    // feasible nodes when no such node exists.
    std::vector<std::vector<int>> other_groups(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      auto& other = other_groups[static_cast<size_t>(r)];
      std::vector<int> any;
      for (int j = 0; j < inst_->node_count(); ++j) {
        if (is_masked(mask->at(r, j))) continue;
        any.push_back(j);
        if (static_cast<int>(inst_->role(j)) != cur_role[static_cast<size_t>(r)])
          other.push_back(j);
      }
      if (other.empty()) other = std::move(any);
    }
    auto mean_other = t.group_mean_rows(H_, std::move(other_groups));

    auto [p_intra, u_intra] = pipe(q_intra);
    auto [p_inter, u_inter] = pipe(q_inter);

    auto gate_in = t.concat_cols({h_last, mean_current, mean_other});
    auto hidden = t.relu(linear(t, gate_in, pv("gate.W1"), pv("gate.b1")));
    auto p_stay = t.sigmoid_op(linear(t, hidden, pv("gate.W2"), pv("gate.b2")));
    auto p_leave = t.affine(p_stay, T(-1), T(1));

    out.pi = t.add(t.mul_colvec(p_intra, p_stay), t.mul_colvec(p_inter, p_leave));
    out.p_intra = p_intra;
    out.p_inter = p_inter;
    out.p_stay = p_stay;
    out.u_intra = u_intra;
    out.u_inter = u_inter;
    return out;
  }

 private:
  ParamVars<T>* pv_;
  const PdpInstance* inst_;
  const ModelConfig* cfg_;
  Var H_;
  std::vector<Var> Kh_, Vh_;
  Var Kl_ = -1;
  Var role_means_ = -1;
};

template <typename T>
struct RolloutSet {
  std::vector<std::vector<int>> orders;  // per rollout, customer visit order
  std::vector<double> lengths;           // closed-tour lengths
  typename Tape<T>::Var logprob = -1;    // (rollouts x 1) summed log pi
};

template <typename T>
Tensor2<T> feasibility_mask_rows(const PdpInstance& inst,
                                 const std::vector<RouteState>& states) {
  Tensor2<T> mask(static_cast<int>(states.size()), inst.node_count());
  for (int r = 0; r < mask.rows; ++r) {
    ActionMask am = feasible_mask(inst, states[static_cast<size_t>(r)]);
    for (int j = 0; j < mask.cols; ++j)
      if (!am.at(j)) mask.at(r, j) = kMaskSentinel<T>;
  }
  return mask;
}

// Synchronized rollouts over one instance. The first move of rollout r is
// forced to starts[r] (a pickup) and its log-probability is still taken from
// pi; later moves follow `mode`. Feasibility masking guarantees every
// produced order passes validate_tour.
template <typename T>
RolloutSet<T> run_rollouts(Tape<T>& tape, ParamStore<T>& store,
                           const PdpInstance& inst, const ModelConfig& cfg,
                           const std::vector<int>& starts, DecodeMode mode,
                           std::vector<Rng>* rngs = nullptr,
                           const std::vector<std::vector<int>>* replay = nullptr) {
  cfg.validate();
  for (int s : starts)
    if (!inst.is_pickup(s)) throw Error("rollout start must be a pickup");
  if (mode == DecodeMode::Sample && rngs == nullptr)
    throw Error("sampling rollouts need per-row rngs");
  if (mode == DecodeMode::Replay && replay == nullptr)
    throw Error("replay rollouts need recorded actions");

  ParamVars<T> pv(tape, store);
  DecoderSession<T> sess(pv, inst, cfg);
  int rows = static_cast<int>(starts.size());

  std::vector<RouteState> states(static_cast<size_t>(rows), initial_state(inst));
  std::vector<int> firsts(static_cast<size_t>(rows), 0);
  std::vector<typename Tape<T>::Var> step_logps;
  step_logps.reserve(static_cast<size_t>(2 * inst.n));

  for (int t_step = 0; t_step < 2 * inst.n; ++t_step) {
    const Tensor2<T>* mask =
        tape.own_mask(feasibility_mask_rows<T>(inst, states));
    auto sv = sess.step(states, firsts, mask);
    // copy: later tape pushes may relocate node storage
    const Tensor2<T> pi = tape.value(sv.pi);

    std::vector<int> actions(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      int a = -1;
      if (t_step == 0) {
        a = starts[static_cast<size_t>(r)];
      } else if (mode == DecodeMode::Replay) {
        a = (*replay)[static_cast<size_t>(r)][static_cast<size_t>(t_step)];
      } else if (mode == DecodeMode::Greedy) {
        T best = T(-1);
        for (int j = 0; j < pi.cols; ++j) {
          if (is_masked(mask->at(r, j))) continue;
          if (pi.at(r, j) > best) {
            best = pi.at(r, j);
            a = j;
          }
        }
      } else {
        double u = (*rngs)[static_cast<size_t>(r)].uniform();
        double cum = 0.0;
        for (int j = 0; j < pi.cols; ++j) {
          if (is_masked(mask->at(r, j))) continue;
          a = j;  // last feasible wins if rounding leaves u uncovered
          cum += static_cast<double>(pi.at(r, j));
          if (cum > u) break;
        }
      }
      actions[static_cast<size_t>(r)] = a;
    }

    step_logps.push_back(tape.log_pick(sv.pi, actions));

    for (int r = 0; r < rows; ++r) {
      int a = actions[static_cast<size_t>(r)];
      auto& st = states[static_cast<size_t>(r)];
      if (inst.role(a) != inst.role(st.current)) firsts[static_cast<size_t>(r)] = a;
      st = step(inst, st, a).first;
    }
  }

  RolloutSet<T> out;
  out.logprob = tape.add_many(step_logps);
  out.orders.resize(static_cast<size_t>(rows));
  out.lengths.resize(static_cast<size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const auto& tour = states[static_cast<size_t>(r)].tour;
    out.orders[static_cast<size_t>(r)].assign(tour.begin() + 1, tour.end());
    out.lengths[static_cast<size_t>(r)] =
        tour_length(inst, out.orders[static_cast<size_t>(r)]);
  }
  return out;
}

// --- Single-state views used by tests and diagnostics ---------------------

template <typename T>
struct DecodeContext {
  std::vector<T> h_last, h_first, mean_current, mean_other;
  std::vector<T> mask;  // additive, 2n+1
};

template <typename T>
Tensor2<T> encode_values(const PdpInstance& inst, ParamStore<T>& store,
                         const EncoderConfig& cfg) {
  Tape<T> t(false);
  ParamVars<T> pv(t, store);
  return t.value(encode(pv, inst, cfg));
}

// Pure selection/means over H; no parameters involved.
template <typename T>
DecodeContext<T> build_context(const PdpInstance& inst, const RouteState& state,
                               const Tensor2<T>& H) {
  if (state.done) throw EpisodeFinished("build_context on a finished episode");
  DecodeContext<T> ctx;
  int d = H.cols;
  auto row_of = [&](int i) {
    return std::vector<T>(H.row(i), H.row(i) + d);
  };
  ctx.h_last = row_of(state.current);
  ctx.h_first = row_of(first_of_suffix(inst, state));

  NodeRole role = inst.role(state.current);
  std::vector<T> mc(static_cast<size_t>(d), T(0));
  int count = 0;
  for (int i = 0; i < inst.node_count(); ++i) {
    if (inst.role(i) != role) continue;
    for (int j = 0; j < d; ++j) mc[static_cast<size_t>(j)] += H.at(i, j);
    ++count;
  }
  for (auto& x : mc) x /= T(count);
  ctx.mean_current = std::move(mc);

  ActionMask am = feasible_mask(inst, state);
  ctx.mask.assign(static_cast<size_t>(inst.node_count()), T(0));
  for (int j = 0; j < inst.node_count(); ++j)
    if (!am.at(j)) ctx.mask[static_cast<size_t>(j)] = kMaskSentinel<T>;

  std::vector<int> other, any;
  for (int j = 0; j < inst.node_count(); ++j) {
    if (!am.at(j)) continue;
    any.push_back(j);
    if (inst.role(j) != role) other.push_back(j);
  }
  if (other.empty()) other = std::move(any);
  std::vector<T> mo(static_cast<size_t>(d), T(0));
  for (int i : other)
    for (int j = 0; j < d; ++j) mo[static_cast<size_t>(j)] += H.at(i, j);
  for (auto& x : mo) x /= T(other.size());
  ctx.mean_other = std::move(mo);
  return ctx;
}

namespace detail {

template <typename T>
std::vector<T> apply_square(const std::vector<T>& x, const Tensor2<T>& W) {
  std::vector<T> y(static_cast<size_t>(W.cols), T(0));
  mm_acc(x.data(), W.data.data(), y.data(), 1, W.rows, W.cols);
  return y;
}

}  // namespace detail

// q_intra and q_inter from one context; Wq_last is shared between them.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> queries(const DecodeContext<T>& ctx,
                                                  ParamStore<T>& store) {
  auto q_last = detail::apply_square(ctx.h_last, store.value("decoder.Wq_last"));
  auto q_intra = detail::apply_square(ctx.h_first, store.value("decoder.Wq_first"));
  auto q_inter =
      detail::apply_square(ctx.mean_current, store.value("decoder.Wq_cluster"));
  for (size_t i = 0; i < q_last.size(); ++i) {
    q_intra[i] += q_last[i];
    q_inter[i] += q_last[i];
  }
  return {std::move(q_intra), std::move(q_inter)};
}

// One decoding pipeline for an externally supplied query vector.
template <typename T>
std::vector<T> pipeline(const std::vector<T>& q, const Tensor2<T>& H,
                        const std::vector<T>& mask, ParamStore<T>& store,
                        const ModelConfig& cfg) {
  Tape<T> t(false);
  ParamVars<T> pv(t, store);
  Tensor2<T> qm(1, static_cast<int>(q.size()));
  qm.data = q;
  Tensor2<T> mk(1, static_cast<int>(mask.size()));
  mk.data = mask;
  const Tensor2<T>* mp = t.own_mask(std::move(mk));
  auto Hv = t.constant(H);
  auto qv = t.constant(std::move(qm));
  auto K = t.matmul(Hv, pv("decoder.glimpse.Wk"));
  auto V = t.matmul(Hv, pv("decoder.glimpse.Wv"));
  auto glimpse = mha(t, qv, K, V, cfg.enc.heads, pv("decoder.glimpse.Wo"), mp);
  auto u = t.scale(t.matmul_nt(glimpse, t.matmul(Hv, pv("decoder.logit.Wk"))),
                   T(1) / std::sqrt(T(cfg.enc.d_h)));
  auto P = t.softmax_rows(t.scale(t.tanh_op(u), T(cfg.dec.clip)), mp);
  return t.value(P).data;
}

// Gate output for one context; sigmoid of a one-hidden-layer ReLU MLP.
template <typename T>
T gate(const DecodeContext<T>& ctx, ParamStore<T>& store) {
  std::vector<T> x;
  x.reserve(ctx.h_last.size() * 3);
  x.insert(x.end(), ctx.h_last.begin(), ctx.h_last.end());
  x.insert(x.end(), ctx.mean_current.begin(), ctx.mean_current.end());
  x.insert(x.end(), ctx.mean_other.begin(), ctx.mean_other.end());
  const auto& W1 = store.value("gate.W1");
  const auto& b1 = store.value("gate.b1");
  std::vector<T> h(static_cast<size_t>(W1.cols), T(0));
  mm_acc(x.data(), W1.data.data(), h.data(), 1, W1.rows, W1.cols);
  for (int j = 0; j < W1.cols; ++j) {
    h[static_cast<size_t>(j)] += b1.data[static_cast<size_t>(j)];
    if (h[static_cast<size_t>(j)] < T(0)) h[static_cast<size_t>(j)] = T(0);
  }
  const auto& W2 = store.value("gate.W2");
  T z = store.value("gate.b2").data[0];
  for (int j = 0; j < W2.rows; ++j) z += h[static_cast<size_t>(j)] * W2.data[static_cast<size_t>(j)];
  return T(1) / (T(1) + std::exp(-z));
}

// Full single-state decoding step; the same session code path the rollout
// engine uses, exposed with plain-vector outputs.
template <typename T>
StepDistribution<T> decode_step(const PdpInstance& inst, const RouteState& state,
                                const Tensor2<T>& H, ParamStore<T>& store,
                                const ModelConfig& cfg) {
  if (state.done) throw EpisodeFinished("decode_step on a finished episode");
  Tape<T> t(false);
  ParamVars<T> pv(t, store);
  DecoderSession<T> sess(pv, inst, cfg, t.constant(H));
  std::vector<RouteState> states{state};
  std::vector<int> firsts{first_of_suffix(inst, state)};
  const Tensor2<T>* mask = t.own_mask(feasibility_mask_rows<T>(inst, states));
  auto sv = sess.step(states, firsts, mask);

  StepDistribution<T> out;
  out.pi = t.value(sv.pi).data;
  if (cfg.dec.dual_decoder_enabled) {
    out.p_intra = t.value(sv.p_intra).data;
    out.p_inter = t.value(sv.p_inter).data;
    out.p_stay = t.value(sv.p_stay).data[0];
    out.u_intra = t.value(sv.u_intra).data;
    out.u_inter = t.value(sv.u_inter).data;
  } else {
    out.p_intra = out.pi;
    out.p_inter = out.pi;
    out.p_stay = T(0.5);
    out.u_intra = t.value(sv.u_intra).data;
    out.u_inter = out.u_intra;
  }
  return out;
}

// Single rollout from a forced pickup start; returns the validated tour and
// the summed log-probability of its moves.
template <typename T>
std::pair<Tour, double> rollout(const PdpInstance& inst, ParamStore<T>& store,
                                const ModelConfig& cfg, int start,
                                DecodeMode mode, Rng& rng) {
  Tape<T> tape(false);
  std::vector<Rng> rngs{rng};
  auto set = run_rollouts(tape, store, inst, cfg, {start}, mode, &rngs);
  rng = rngs[0];  // hand the advanced stream back
  Tour tour = make_tour(inst, set.orders[0]);
  double lp = static_cast<double>(tape.value(set.logprob).data[0]);
  return {std::move(tour), lp};
}

}  // namespace pdprl
