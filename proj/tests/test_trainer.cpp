#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdprl/checkpoint.hpp"
#include "pdprl/trainer.hpp"

using namespace pdprl;

namespace {

ModelConfig toy_config(int d_h = 16, int L = 1, int heads = 2) {
  ModelConfig cfg;
  cfg.enc.d_h = d_h;
  cfg.enc.L = L;
  cfg.enc.heads = heads;
  cfg.enc.ffn_hidden = 2 * d_h;
  cfg.dec.gate_hidden = d_h;
  return cfg;
}

// metrics.csv with the wall_ms column stripped (timings differ run to run).
std::string metrics_without_wall(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto cut = line.rfind(',');
    out << line.substr(0, cut) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("pomo rollouts: starts, baseline, centered advantages") {
  auto cfg = toy_config();
  auto inst = gen_clustered(1, 301);
  auto store = init_params<float>(cfg, 303);
  auto batch = pomo_rollouts(inst, store, cfg, 307);
  CHECK(batch.size() == 1);
  CHECK(batch.advantages[0] == 0.0);

  auto inst4 = gen_clustered(4, 311);
  auto store4 = init_params<float>(cfg, 313);
  auto b4 = pomo_rollouts(inst4, store4, cfg, 317);
  CHECK(b4.size() == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(b4.rollouts.orders[static_cast<size_t>(j)].front() == j + 1);
    CHECK(validate_tour(inst4, b4.rollouts.orders[static_cast<size_t>(j)]).ok);
    CHECK(b4.rewards[static_cast<size_t>(j)] ==
          doctest::Approx(-b4.rollouts.lengths[static_cast<size_t>(j)]));
  }
  double adv_sum = 0;
  for (double a : b4.advantages) adv_sum += a;
  CHECK(std::abs(adv_sum) <= 1e-9);
}

TEST_CASE("baseline arithmetic on a fixed reward pair") {
  // rewards {-3, -5} -> baseline -4, advantages {+1, -1}
  std::vector<double> rewards{-3.0, -5.0};
  double baseline = (rewards[0] + rewards[1]) / 2;
  CHECK(baseline == -4.0);
  CHECK(rewards[0] - baseline == 1.0);
  CHECK(rewards[1] - baseline == -1.0);
}

TEST_CASE("instance loss: zero advantage, sign, gradient flow") {
  auto cfg = toy_config();
  auto inst = gen_clustered(1, 331);
  auto store = init_params<float>(cfg, 333);
  auto batch = pomo_rollouts(inst, store, cfg, 337);
  auto loss = instance_loss(batch);
  CHECK(batch.tape->value(loss).data[0] == 0.0f);  // n=1: single rollout

  auto inst3 = gen_clustered(3, 347);
  auto store3 = init_params<float>(cfg, 349);
  auto b3 = pomo_rollouts(inst3, store3, cfg, 353);
  auto l3 = instance_loss(b3);
  const auto& lp = b3.tape->value(b3.rollouts.logprob);
  double manual = 0;
  for (int j = 0; j < b3.size(); ++j)
    manual += -b3.advantages[static_cast<size_t>(j)] / b3.size() *
              lp.data[static_cast<size_t>(j)];
  CHECK(b3.tape->value(l3).data[0] == doctest::Approx(manual).epsilon(1e-6));

  // raising the log-prob of an above-baseline rollout lowers the loss
  int best = 0;
  for (int j = 1; j < b3.size(); ++j)
    if (b3.advantages[static_cast<size_t>(j)] > b3.advantages[static_cast<size_t>(best)])
      best = j;
  double bumped = 0;
  for (int j = 0; j < b3.size(); ++j) {
    double lpj = lp.data[static_cast<size_t>(j)] + (j == best ? 0.1 : 0.0);
    bumped += -b3.advantages[static_cast<size_t>(j)] / b3.size() * lpj;
  }
  CHECK(bumped < manual);
}

TEST_CASE("equal-reward batches leave parameters untouched after adam") {
  auto cfg = toy_config();
  auto inst = gen_clustered(3, 359);
  auto store = init_params<float>(cfg, 367);
  auto batch = pomo_rollouts(inst, store, cfg, 373);
  // force equal rewards; advantages collapse to zero
  std::fill(batch.rewards.begin(), batch.rewards.end(), -2.5);
  batch.baseline = -2.5;
  std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);

  auto loss = instance_loss(batch);
  GradBuffer<float> sink;
  sink.reset(store);
  batch.tape->backward(loss, sink);

  auto before = init_params<float>(cfg, 367);
  store.zero_grads();
  accumulate(store, sink, 1.0f);
  adam_step<float>(store, 1e-3f, 0.9f, 0.999f, 1e-8f, 1);
  for (int s = 0; s < store.count(); ++s)
    CHECK(store.value(s).data == before.value(s).data);
}

TEST_CASE("checkpoints: byte-exact round trip and validation") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 379);
  auto meta = meta_from(cfg, 42);
  std::filesystem::create_directories("tmp_ckpt");
  save_checkpoint("tmp_ckpt/a.bin", store, meta);
  auto [loaded, meta2] = load_checkpoint("tmp_ckpt/a.bin");
  CHECK(meta2.d_h == 16);
  CHECK(meta2.step == 42);
  save_checkpoint("tmp_ckpt/b.bin", loaded, meta2);

  std::ifstream fa("tmp_ckpt/a.bin", std::ios::binary),
      fb("tmp_ckpt/b.bin", std::ios::binary);
  std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ba == bb);

  // identical forward outputs after reload
  auto inst = gen_clustered(3, 383);
  auto h1 = encode_values(inst, store, cfg.enc);
  auto h2 = encode_values(inst, loaded, cfg.enc);
  CHECK(h1.data == h2.data);

  // architecture mismatch
  auto cfg32 = toy_config(32, 1, 2);
  CHECK_THROWS_AS(load_checkpoint_expect("tmp_ckpt/a.bin", cfg32), CheckpointError);
  CHECK_NOTHROW(load_checkpoint_expect("tmp_ckpt/a.bin", cfg));
  CHECK_THROWS_AS(load_checkpoint("tmp_ckpt/missing.bin"), CheckpointError);
}

TEST_CASE("a checkpoint trained at one size evaluates at another") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 389);
  auto small = gen_clustered(5, 397);
  auto large = gen_clustered(20, 401);
  Tape<float> t(false);
  std::vector<int> starts{1, 2, 3};
  CHECK_NOTHROW(run_rollouts(t, store, small, cfg, starts, DecodeMode::Greedy));
  Tape<float> t2(false);
  auto rolls = run_rollouts(t2, store, large, cfg, starts, DecodeMode::Greedy);
  for (const auto& order : rolls.orders) CHECK(validate_tour(large, order).ok);
}

TEST_CASE("micro training run learns and is reproducible") {
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batches_per_epoch = 20;
  cfg.batch_size = 16;
  cfg.lr = 3e-4;
  cfg.n = 3;
  cfg.distribution = Distribution::Clustered;
  cfg.ablation = Ablation::Full;
  cfg.seed = 404;
  cfg.checkpoint_every = 0;
  cfg.model = toy_config(32, 1, 4);
  cfg.threads = 2;
  cfg.val_size = 32;
  cfg.out_dir = "tmp_train_a";

  auto res1 = train(cfg);
  REQUIRE(res1.epochs.size() == 6);
  // The sampled training objective must come down; the greedy validation
  // curve has almost no headroom at n=3 and is exercised at desk scale.
  CHECK(res1.epochs.back().train_mean_len < res1.epochs.front().train_mean_len);

  cfg.out_dir = "tmp_train_b";
  auto res2 = train(cfg);
  for (size_t e = 0; e < res1.epochs.size(); ++e) {
    CHECK(res1.epochs[e].train_mean_len == res2.epochs[e].train_mean_len);
    CHECK(res1.epochs[e].val_greedy_len == res2.epochs[e].val_greedy_len);
  }
  CHECK(metrics_without_wall("tmp_train_a/metrics.csv") ==
        metrics_without_wall("tmp_train_b/metrics.csv"));

  // thread count does not change the numbers
  cfg.threads = 1;
  cfg.epochs = 2;
  cfg.out_dir.clear();
  auto res3 = train(cfg);
  cfg.threads = 2;
  auto res4 = train(cfg);
  for (size_t e = 0; e < res3.epochs.size(); ++e)
    CHECK(res3.epochs[e].train_mean_len == res4.epochs[e].train_mean_len);
}

TEST_CASE("pomo ablation trains with both structural components disabled") {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batches_per_epoch = 4;
  cfg.batch_size = 8;
  cfg.n = 2;
  cfg.ablation = Ablation::Pomo;
  cfg.seed = 405;
  cfg.model = toy_config(16, 1, 2);
  cfg.threads = 1;
  cfg.val_size = 8;
  auto model = cfg.effective_model();
  CHECK_FALSE(model.enc.cluster_attention_enabled);
  CHECK_FALSE(model.dec.dual_decoder_enabled);
  CHECK_NOTHROW(train(cfg));
}

TEST_CASE("train rejects degenerate configs") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(cfg), Error);
  cfg.batch_size = 1;
  cfg.lr = 0;
  CHECK_THROWS_AS(train(cfg), Error);
}

TEST_CASE("non-finite loss aborts with a diagnostic dump") {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batches_per_epoch = 1;
  cfg.batch_size = 4;
  cfg.n = 2;
  cfg.seed = 406;
  cfg.model = toy_config(16, 1, 2);
  cfg.threads = 1;
  cfg.val_size = 4;
  cfg.out_dir = "tmp_diverged";

  auto poisoned = init_params<float>(cfg.model, 1);
  poisoned.value("encoder.embed.W").data[0] = std::nanf("");
  CHECK_THROWS_AS(train(cfg, &poisoned), TrainingDiverged);
  CHECK(std::filesystem::exists("tmp_diverged/diverged_params.bin"));
  CHECK(std::filesystem::exists("tmp_diverged/diverged_instance.json"));
  // the dumped instance parses back
  std::ifstream in("tmp_diverged/diverged_instance.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK_NOTHROW(instance_from_json(text));
}
