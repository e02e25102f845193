#include "pdprl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "pdprl/checkpoint.hpp"

namespace pdprl {

namespace {

// Stream namespaces: training instances, rollout sampling, validation set,
// and parameter init never share a derivation path.
constexpr std::uint64_t kTagInit = 0x11;
constexpr std::uint64_t kTagTrainInst = 0x22;
constexpr std::uint64_t kTagRollout = 0x33;
constexpr std::uint64_t kTagVal = 0x44;

// Fixed gradient-reduction chunk size. Chunk sums and their reduction order
// do not depend on the thread count, so any parallelism yields bit-identical
// results for a fixed config.
constexpr int kChunk = 16;

}  // namespace

double mean_multistart_greedy(ParamStore<float>& store, const ModelConfig& cfg,
                              const std::vector<PdpInstance>& set) {
  double total = 0.0;
  for (const auto& inst : set) {
    Tape<float> tape(false);
    std::vector<int> starts;
    for (int p = 1; p <= inst.n; ++p) starts.push_back(p);
    auto rolls = run_rollouts(tape, store, inst, cfg, starts, DecodeMode::Greedy);
    double best = rolls.lengths[0];
    for (double len : rolls.lengths) best = std::min(best, len);
    total += best;
  }
  return total / static_cast<double>(set.size());
}

TrainResult train(const TrainConfig& cfg, const ParamStore<float>* initial) {
  if (cfg.batch_size < 1) throw Error("batch size must be >= 1");
  if (cfg.batches_per_epoch < 1) throw Error("batches_per_epoch must be >= 1");
  if (!(cfg.lr > 0)) throw Error("learning rate must be positive");
  if (cfg.n < 1) throw InvalidSize("pair count must be >= 1");
  ModelConfig model = cfg.effective_model();
  model.validate();

  ParamStore<float> store =
      initial ? *initial : init_params<float>(cfg.model, derive(cfg.seed, kTagInit));

  std::vector<PdpInstance> val_set;
  for (int i = 0; i < cfg.val_size; ++i)
    val_set.push_back(generate(cfg.distribution, cfg.n,
                               derive(cfg.seed, kTagVal, static_cast<std::uint64_t>(i))));

  std::ofstream metrics, epochs_csv;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    metrics.open(cfg.out_dir + "/metrics.csv");
    metrics << "epoch,batch,mean_reward,mean_len,loss,wall_ms\n";
    epochs_csv.open(cfg.out_dir + "/epochs.csv");
    epochs_csv << "epoch,train_mean_len,val_greedy_len\n";
  }

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  int B = cfg.batch_size;
  int n_chunks = (B + kChunk - 1) / kChunk;
  std::vector<GradBuffer<float>> chunk_grads(static_cast<size_t>(n_chunks));

  TrainResult result;
  result.model = model;
  std::uint64_t inst_counter = 0;
  int adam_t = 0;

  auto dump_divergence = [&](const PdpInstance& inst) {
    if (cfg.out_dir.empty()) return std::string();
    std::string ckpt = cfg.out_dir + "/diverged_params.bin";
    save_checkpoint(ckpt, store, meta_from(model, static_cast<std::uint64_t>(adam_t)));
    std::ofstream bad(cfg.out_dir + "/diverged_instance.json");
    bad << instance_to_json(inst);
    return ckpt;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_len_sum = 0.0;
    for (int batch = 0; batch < cfg.batches_per_epoch; ++batch) {
      auto t0 = std::chrono::steady_clock::now();

      std::vector<PdpInstance> instances;
      instances.reserve(static_cast<size_t>(B));
      std::vector<std::uint64_t> roll_seeds(static_cast<size_t>(B));
      for (int i = 0; i < B; ++i) {
        std::uint64_t c = inst_counter++;
        instances.push_back(
            generate(cfg.distribution, cfg.n, derive(cfg.seed, kTagTrainInst, c)));
        roll_seeds[static_cast<size_t>(i)] = derive(cfg.seed, kTagRollout, c);
      }

      std::vector<double> losses(static_cast<size_t>(B), 0.0);
      std::vector<double> mean_lens(static_cast<size_t>(B), 0.0);

      auto work = [&](int tid) {
        for (int c = tid; c < n_chunks; c += threads) {
          auto& sink = chunk_grads[static_cast<size_t>(c)];
          sink.reset(store);
          int lo = c * kChunk;
          int hi = std::min(B, lo + kChunk);
          for (int i = lo; i < hi; ++i) {
            auto batch_i = pomo_rollouts(instances[static_cast<size_t>(i)], store,
                                         model, roll_seeds[static_cast<size_t>(i)]);
            auto loss = instance_loss(batch_i);
            losses[static_cast<size_t>(i)] =
                static_cast<double>(batch_i.tape->value(loss).data[0]);
            double len_sum = 0.0;
            for (double len : batch_i.rollouts.lengths) len_sum += len;
            mean_lens[static_cast<size_t>(i)] = len_sum / batch_i.size();
            batch_i.tape->backward(loss, sink);
          }
        }
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
      }

      double batch_loss = 0.0, batch_len = 0.0;
      for (int i = 0; i < B; ++i) {
        if (!std::isfinite(losses[static_cast<size_t>(i)])) {
          std::string where = dump_divergence(instances[static_cast<size_t>(i)]);
          throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch) +
                                 (where.empty() ? "" : "; dumped to " + where));
        }
        batch_loss += losses[static_cast<size_t>(i)];
        batch_len += mean_lens[static_cast<size_t>(i)];
      }
      batch_loss /= B;
      batch_len /= B;
      epoch_len_sum += batch_len;

      store.zero_grads();
      for (auto& sink : chunk_grads)
        accumulate(store, sink, 1.0f / static_cast<float>(B));
      adam_step<float>(store, static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                       static_cast<float>(cfg.beta2), static_cast<float>(cfg.adam_eps),
                       ++adam_t);

      if (metrics.is_open()) {
        double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        metrics << epoch + 1 << ',' << batch + 1 << ',' << -batch_len << ','
                << batch_len << ',' << batch_loss << ',' << wall_ms << '\n';
      }
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_mean_len = epoch_len_sum / cfg.batches_per_epoch;
    stats.val_greedy_len = mean_multistart_greedy(store, model, val_set);
    result.epochs.push_back(stats);
    if (epochs_csv.is_open())
      epochs_csv << stats.epoch << ',' << stats.train_mean_len << ','
                 << stats.val_greedy_len << std::endl;

    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(cfg.out_dir + "/ckpt_epoch" + std::to_string(epoch + 1) + ".bin",
                      store, meta_from(model, static_cast<std::uint64_t>(adam_t)));
    }
  }

  if (!cfg.out_dir.empty()) {
    result.final_checkpoint = cfg.out_dir + "/ckpt_final.bin";
    save_checkpoint(result.final_checkpoint, store,
                    meta_from(model, static_cast<std::uint64_t>(adam_t)));
  }
  result.store = std::move(store);
  return result;
}

}  // namespace pdprl
