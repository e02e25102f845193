// Command-line front end: instance generation, training, evaluation,
// oracles, gradient checking, and report aggregation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pdprl/bench.hpp"
#include "pdprl/gradcheck.hpp"

namespace {

using namespace pdprl;

std::uint64_t seed_or_env(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PDPRL_SEED")) return std::stoull(env);
  return fallback;
}

ModelConfig model_from_json(const nlohmann::json& j) {
  ModelConfig m;
  m.enc.d_h = j.value("d_h", m.enc.d_h);
  m.enc.L = j.value("L", m.enc.L);
  m.enc.heads = j.value("heads", m.enc.heads);
  m.enc.ffn_hidden = j.value("ffn_hidden", m.enc.ffn_hidden);
  m.dec.gate_hidden = j.value("gate_hidden", m.dec.gate_hidden);
  m.dec.clip = j.value("clip", m.dec.clip);
  return m;
}

TrainConfig train_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  TrainConfig cfg;
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batches_per_epoch = j.value("batches_per_epoch", cfg.batches_per_epoch);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.n = j.value("n", cfg.n);
  cfg.distribution =
      distribution_from_string(j.value("distribution", std::string("clustered")));
  cfg.ablation = ablation_from_string(j.value("ablation", std::string("full")));
  cfg.seed = j.value("seed", cfg.seed);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.val_size = j.value("val_size", cfg.val_size);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("model")) cfg.model = model_from_json(j["model"]);
  return cfg;
}

int cmd_gen(int n, const std::string& dist, int count, std::uint64_t seed,
            const std::string& out) {
  TestSet set = make_test_set(n, distribution_from_string(dist), seed, count);
  write_dataset(out, set.instances);
  std::cout << "wrote " << count << " instances to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir_override) {
  TrainConfig cfg = train_config_from_file(config_path);
  cfg.seed = seed_or_env(seed, cfg.seed);
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  TrainResult res = train(cfg);
  std::cout << "trained " << cfg.epochs << " epochs";
  if (!res.epochs.empty())
    std::cout << "; final val greedy length " << res.epochs.back().val_greedy_len;
  if (!res.final_checkpoint.empty())
    std::cout << "; checkpoint " << res.final_checkpoint;
  std::cout << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& testset_path,
             const std::string& decode, int samples, bool single_start,
             double clip, std::uint64_t sample_seed, const std::string& out,
             bool with_exact) {
  auto [store, meta] = load_checkpoint(ckpt);
  ModelConfig cfg = model_config_from(meta, store);
  cfg.dec.clip = clip;
  TestSet set = test_set_from_instances(read_dataset(testset_path), sample_seed);

  EvalReport report;
  if (decode == "greedy")
    report = eval_greedy(store, cfg, set, !single_start);
  else if (decode == "sample")
    report = eval_sampling(store, cfg, set, samples);
  else
    throw Error("decode must be greedy or sample");

  std::vector<double> exact_objs;
  const std::vector<double>* ref = nullptr;
  if (with_exact && 2 * set.n <= 16) {
    for (const auto& r : eval_exact(set).rows) exact_objs.push_back(r.obj);
    ref = &exact_objs;
  }
  std::ofstream os(out);
  if (!os) throw Error("cannot open for write: " + out);
  write_results_csv_header(os);
  append_results_csv(os, report, ref);
  std::cout << "mean obj " << report.mean_obj << ", mean decode time "
            << report.mean_time_ms / 1000.0 << " s over " << report.rows.size()
            << " instances -> " << out << "\n";
  return 0;
}

int cmd_oracle(const std::string& testset_path, const std::string& out,
               const std::string& tours_out) {
  TestSet set = test_set_from_instances(read_dataset(testset_path), 0);
  std::ofstream os(out);
  if (!os) throw Error("cannot open for write: " + out);
  write_results_csv_header(os);
  EvalReport exact;
  bool have_exact = 2 * set.n <= 16;
  std::vector<double> exact_objs;
  if (have_exact) {
    exact = eval_exact(set);
    for (const auto& r : exact.rows) exact_objs.push_back(r.obj);
    append_results_csv(os, exact, &exact_objs);
  }
  append_results_csv(os, eval_greedy_nf(set), have_exact ? &exact_objs : nullptr);
  if (!tours_out.empty() && have_exact) {
    std::ofstream ts(tours_out);
    ts << "[";
    for (size_t i = 0; i < exact.rows.size(); ++i) {
      Tour t;
      t.order = exact.rows[i].order;
      t.length = exact.rows[i].obj;
      ts << (i ? ",\n" : "\n")
         << tour_to_json(testset_path + "#" + std::to_string(i), t);
    }
    ts << "\n]";
  }
  std::cout << "oracle results -> " << out << "\n";
  return 0;
}

int cmd_gradcheck(int n, int d_h, int L, int heads, int seeds, double h,
                  const std::string& ablation) {
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    GradCheckConfig cfg;
    cfg.n = n;
    cfg.d_h = d_h;
    cfg.L = L;
    cfg.heads = heads;
    cfg.h = h;
    cfg.ablation = ablation_from_string(ablation);
    cfg.seed = 1000 + static_cast<std::uint64_t>(s);
    auto res = gradcheck_policy_loss(cfg);
    std::cout << "seed " << cfg.seed << ": max rel err " << res.max_rel_err
              << " at " << res.worst_param << " (" << res.scalars_checked
              << " scalars)\n";
    worst = std::max(worst, res.max_rel_err);
  }
  std::cout << (worst <= 1e-3 ? "PASS" : "FAIL") << ": worst " << worst << "\n";
  return worst <= 1e-3 ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::string& out) {
  auto rows = aggregate_results(inputs);
  std::string text = render_table(rows, format);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out);
    os << text;
  }
  return 0;
}

int cmd_matrix(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw Error("cannot open config: " + config_path);
  nlohmann::json j = nlohmann::json::parse(in);
  MatrixSpec spec;
  for (int n : j.at("sizes")) spec.sizes.push_back(n);
  for (const auto& d : j.at("dists"))
    spec.dists.push_back(distribution_from_string(d.get<std::string>()));
  for (const auto& a : j.value("ablations", std::vector<std::string>{"full"}))
    spec.ablations.push_back(ablation_from_string(a));
  for (const auto& d : j.at("decodes")) {
    MatrixSpec::Decode dec;
    dec.kind = d.at("kind").get<std::string>();
    dec.samples = d.value("samples", 0);
    spec.decodes.push_back(dec);
  }
  spec.ckpt_pattern = j.value("ckpt_pattern", std::string());
  spec.testset_seed = j.value("testset_seed", spec.testset_seed);
  spec.count = j.value("count", spec.count);
  spec.include_baselines = j.value("include_baselines", true);
  spec.clip = j.value("clip", spec.clip);
  spec.out_dir = j.at("out_dir").get<std::string>();
  MatrixResult res = run_matrix(spec);
  std::cout << res.cells_run << " cells evaluated, " << res.cells_skipped
            << " skipped; results " << res.results_csv << ", report "
            << res.report_md << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural and exact solvers for the single-vehicle pickup-and-delivery problem"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an instance dataset");
  int gen_n = 5, gen_count = 100;
  std::string gen_dist = "clustered", gen_out = "testset.json";
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--n", gen_n, "pickup-delivery pair count")->required();
  gen->add_option("--dist", gen_dist, "clustered|uniform");
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--seed", gen_seed, "root seed (or PDPRL_SEED)");
  gen->add_option("--out", gen_out, "output JSON path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a policy from a JSON config");
  std::string tr_config, tr_out;
  std::optional<std::uint64_t> tr_seed;
  tr->add_option("--config", tr_config, "JSON config path")->required();
  tr->add_option("--seed", tr_seed, "seed override (or PDPRL_SEED)");
  tr->add_option("--out-dir", tr_out, "output directory override");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a test set");
  std::string ev_ckpt, ev_set, ev_decode = "greedy", ev_out = "results.csv";
  int ev_samples = 1280;
  bool ev_single = false, ev_exact = false;
  double ev_clip = 10.0;
  std::uint64_t ev_sample_seed = 2025;
  ev->add_option("--ckpt", ev_ckpt)->required();
  ev->add_option("--testset", ev_set)->required();
  ev->add_option("--decode", ev_decode, "greedy|sample");
  ev->add_option("--samples", ev_samples, "sample count for --decode sample");
  ev->add_flag("--single-start", ev_single, "single-start greedy");
  ev->add_flag("--with-exact", ev_exact, "add per-instance exact gaps when 2n<=16");
  ev->add_option("--clip", ev_clip, "logit clip C");
  ev->add_option("--sample-seed", ev_sample_seed, "sampling stream seed");
  ev->add_option("--out", ev_out, "results CSV path");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Exact and greedy baselines on a test set");
  std::string orc_set, orc_out = "oracle.csv", orc_tours;
  orc->add_option("--testset", orc_set)->required();
  orc->add_option("--out", orc_out, "results CSV path");
  orc->add_option("--tours", orc_tours, "optional optimal-tour JSON path");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  int gc_n = 2, gc_dh = 16, gc_L = 1, gc_heads = 2, gc_seeds = 3;
  double gc_h = 1e-3;
  std::string gc_ablation = "full";
  gc->add_option("--n", gc_n);
  gc->add_option("--d-h", gc_dh);
  gc->add_option("--layers", gc_L);
  gc->add_option("--heads", gc_heads);
  gc->add_option("--seeds", gc_seeds, "number of random seeds");
  gc->add_option("--fd-step", gc_h, "finite-difference step");
  gc->add_option("--ablation", gc_ablation);

  // report
  auto* rp = app.add_subcommand("report", "Aggregate results CSVs into a table");
  std::vector<std::string> rp_in;
  std::string rp_format = "md", rp_out;
  rp->add_option("--in", rp_in, "results CSV files")->required()->expected(-1);
  rp->add_option("--format", rp_format, "csv|md");
  rp->add_option("--out", rp_out, "output path (stdout if omitted)");

  // matrix
  auto* mx = app.add_subcommand("matrix", "Run an evaluation grid from a JSON spec");
  std::string mx_config;
  mx->add_option("--config", mx_config)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_n, gen_dist, gen_count, seed_or_env(gen_seed, 42), gen_out);
    if (*tr) return cmd_train(tr_config, tr_seed, tr_out);
    if (*ev)
      return cmd_eval(ev_ckpt, ev_set, ev_decode, ev_samples, ev_single, ev_clip,
                      ev_sample_seed, ev_out, ev_exact);
    if (*orc) return cmd_oracle(orc_set, orc_out, orc_tours);
    if (*gc) return cmd_gradcheck(gc_n, gc_dh, gc_L, gc_heads, gc_seeds, gc_h, gc_ablation);
    if (*rp) return cmd_report(rp_in, rp_format, rp_out);
    if (*mx) return cmd_matrix(mx_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
