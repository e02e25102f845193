#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdprl/decoder.hpp"

namespace pdprl {

// One POMO batch for a single instance: N sampled rollouts with distinct
// forced pickup starts, their rewards (negative closed-tour length), the
// shared mean baseline, and centered advantages.
template <typename T>
struct RolloutBatch {
  std::shared_ptr<Tape<T>> tape;
  RolloutSet<T> rollouts;
  std::vector<double> rewards;
  double baseline = 0.0;
  std::vector<double> advantages;

  int size() const { return static_cast<int>(rewards.size()); }
};

template <typename T>
RolloutBatch<T> pomo_rollouts(const PdpInstance& inst, ParamStore<T>& store,
                              const ModelConfig& cfg, std::uint64_t rollout_seed) {
  RolloutBatch<T> batch;
  batch.tape = std::make_shared<Tape<T>>(true);
  std::vector<int> starts;
  std::vector<Rng> rngs;
  for (int p = 1; p <= inst.n; ++p) {
    starts.push_back(p);
    rngs.emplace_back(derive(rollout_seed, static_cast<std::uint64_t>(p)));
  }
  batch.rollouts =
      run_rollouts(*batch.tape, store, inst, cfg, starts, DecodeMode::Sample, &rngs);
  int n_roll = static_cast<int>(starts.size());
  batch.rewards.resize(static_cast<size_t>(n_roll));
  double sum = 0.0;
  for (int j = 0; j < n_roll; ++j) {
    batch.rewards[static_cast<size_t>(j)] =
        -batch.rollouts.lengths[static_cast<size_t>(j)];
    sum += batch.rewards[static_cast<size_t>(j)];
  }
  batch.baseline = sum / n_roll;
  batch.advantages.resize(static_cast<size_t>(n_roll));
  for (int j = 0; j < n_roll; ++j)
    batch.advantages[static_cast<size_t>(j)] =
        batch.rewards[static_cast<size_t>(j)] - batch.baseline;
  return batch;
}

// L = -(1/N) sum_j (R_j - b) log pi(tau_j); advantages enter as constants so
// no gradient flows through the baseline.
template <typename T>
typename Tape<T>::Var instance_loss(RolloutBatch<T>& batch) {
  int n_roll = batch.size();
  Tensor2<T> w(n_roll, 1);
  for (int j = 0; j < n_roll; ++j)
    w.data[static_cast<size_t>(j)] =
        static_cast<T>(-batch.advantages[static_cast<size_t>(j)] / n_roll);
  return batch.tape->weighted_sum(batch.rollouts.logprob, std::move(w));
}

struct TrainConfig {
  int epochs = 800;
  int batches_per_epoch = 100;
  int batch_size = 512;
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int n = 20;
  Distribution distribution = Distribution::Clustered;
  Ablation ablation = Ablation::Full;
  std::uint64_t seed = 1;
  int checkpoint_every = 10;  // epochs; 0 disables periodic checkpoints
  ModelConfig model;
  int threads = 0;    // 0 = hardware concurrency (capped)
  int val_size = 64;  // fixed validation set for the per-epoch greedy curve
  std::string out_dir;  // empty = no files written

  ModelConfig effective_model() const {
    ModelConfig m = model;
    m.apply(ablation);
    return m;
  }
};

struct EpochStats {
  int epoch = 0;
  double train_mean_len = 0.0;   // mean sampled-rollout length over the epoch
  double val_greedy_len = 0.0;   // multi-start greedy mean on the val set
};

struct TrainResult {
  ParamStore<float> store;
  ModelConfig model;
  std::vector<EpochStats> epochs;
  std::string final_checkpoint;  // path, when out_dir was set
};

// Full training loop: fresh instances every batch, POMO rollouts, one Adam
// step per batch. Writes metrics.csv (per batch) and epochs.csv (per epoch)
// plus periodic checkpoints under out_dir. Deterministic for a fixed
// (seed, config) regardless of thread count. A non-null `initial` overrides
// the seeded parameter init (resume). Throws TrainingDiverged after dumping
// the parameters and the offending instance when a loss turns non-finite.
TrainResult train(const TrainConfig& cfg, const ParamStore<float>* initial = nullptr);

// Multi-start greedy mean tour length of `store` over a set of instances.
double mean_multistart_greedy(ParamStore<float>& store, const ModelConfig& cfg,
                              const std::vector<PdpInstance>& set);

}  // namespace pdprl
