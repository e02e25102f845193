#include "pdprl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pdprl {

GradCheckResult gradcheck_policy_loss(const GradCheckConfig& cfg) {
  ModelConfig model;
  model.enc.d_h = cfg.d_h;
  model.enc.L = cfg.L;
  model.enc.heads = cfg.heads;
  model.enc.ffn_hidden = cfg.ffn_hidden;
  model.dec.gate_hidden = cfg.gate_hidden;
  model.dec.clip = cfg.clip;
  model.apply(cfg.ablation);
  model.validate();

  PdpInstance inst = generate(cfg.distribution, cfg.n, derive(cfg.seed, 0xA1));
  ParamStore<double> store = init_params<double>(model, derive(cfg.seed, 0xA2));

  // Base rollouts fix the trajectories and the advantage weights.
  auto base = pomo_rollouts(inst, store, model, derive(cfg.seed, 0xA3));
  const auto& actions = base.rollouts.orders;
  int n_roll = base.size();
  std::vector<double> w(static_cast<size_t>(n_roll));
  for (int j = 0; j < n_roll; ++j)
    w[static_cast<size_t>(j)] = -base.advantages[static_cast<size_t>(j)] / n_roll;

  std::vector<int> starts;
  for (int p = 1; p <= inst.n; ++p) starts.push_back(p);

  auto replay_loss = [&]() {
    Tape<double> tape(false);
    auto rolls = run_rollouts(tape, store, inst, model, starts, DecodeMode::Replay,
                              nullptr, &actions);
    const auto& lp = tape.value(rolls.logprob);
    double loss = 0.0;
    for (int j = 0; j < n_roll; ++j)
      loss += w[static_cast<size_t>(j)] * lp.data[static_cast<size_t>(j)];
    return loss;
  };

  // Tape gradient of the same replayed loss.
  GradBuffer<double> grads;
  grads.reset(store);
  {
    Tape<double> tape(true);
    auto rolls = run_rollouts(tape, store, inst, model, starts, DecodeMode::Replay,
                              nullptr, &actions);
    Tensor2<double> wt(n_roll, 1);
    wt.data = w;
    auto loss = tape.weighted_sum(rolls.logprob, std::move(wt));
    tape.backward(loss, grads);
  }

  GradCheckResult result;
  for (int s = 0; s < store.count(); ++s) {
    auto& theta = store.value(s);
    const auto& g = grads.g[static_cast<size_t>(s)];
    for (size_t i = 0; i < theta.data.size(); ++i) {
      double keep = theta.data[i];
      theta.data[i] = keep + cfg.h;
      double up = replay_loss();
      theta.data[i] = keep - cfg.h;
      double down = replay_loss();
      theta.data[i] = keep;
      double fd = (up - down) / (2.0 * cfg.h);
      double bp = g.data[i];
      double rel = std::abs(fd - bp) / std::max({std::abs(fd), std::abs(bp), 1e-6});
      ++result.scalars_checked;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = store.names()[static_cast<size_t>(s)] + "[" +
                             std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace pdprl
