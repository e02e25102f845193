#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdprl/bench.hpp"

using namespace pdprl;

namespace {

ModelConfig toy_config(int d_h = 16) {
  ModelConfig cfg;
  cfg.enc.d_h = d_h;
  cfg.enc.L = 1;
  cfg.enc.heads = 2;
  cfg.enc.ffn_hidden = 2 * d_h;
  cfg.dec.gate_hidden = d_h;
  return cfg;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

TEST_CASE("test sets regenerate bit-identically") {
  auto a = make_test_set(4, Distribution::Clustered, 77, 10);
  auto b = make_test_set(4, Distribution::Clustered, 77, 10);
  CHECK(dataset_to_json(a.instances) == dataset_to_json(b.instances));
  auto c = make_test_set(4, Distribution::Clustered, 78, 10);
  CHECK(dataset_to_json(a.instances) != dataset_to_json(c.instances));
}

TEST_CASE("gap arithmetic matches the reported reference cells") {
  CHECK(round2(gap_pct(2.727, 2.723)) == doctest::Approx(0.15));
  CHECK(round2(gap_pct(4.813, 4.709)) == doctest::Approx(2.21));
  CHECK(gap_pct(3.3, 3.3) == 0.0);
  CHECK_THROWS_AS(gap_pct(1.0, 0.0), InvalidReference);
  CHECK_THROWS_AS(gap_pct(1.0, -2.0), InvalidReference);
}

TEST_CASE("greedy evaluation is exact on forced n=1 tours and deterministic") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 501);
  auto set = make_test_set(1, Distribution::Uniform, 503, 12);
  auto rep = eval_greedy(store, cfg, set);
  auto exact = eval_exact(set);
  for (size_t i = 0; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].obj == doctest::Approx(exact.rows[i].obj).epsilon(1e-12));

  auto rep2 = eval_greedy(store, cfg, set);
  for (size_t i = 0; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].obj == rep2.rows[i].obj);
  CHECK(rep.method == "neural");
  CHECK(rep.decode == "greedy");

  auto single = eval_greedy(store, cfg, set, /*multi_start=*/false);
  CHECK(single.decode == "greedy-1");
}

TEST_CASE("multi-start greedy never loses to single-start") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 521);
  auto set = make_test_set(4, Distribution::Clustered, 523, 8);
  auto multi = eval_greedy(store, cfg, set, true);
  auto single = eval_greedy(store, cfg, set, false);
  for (size_t i = 0; i < multi.rows.size(); ++i)
    CHECK(multi.rows[i].obj <= single.rows[i].obj + 1e-12);
}

TEST_CASE("sampling: nested streams make best-of-K monotone in K") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 541);
  auto set = make_test_set(3, Distribution::Clustered, 547, 6);
  auto k1 = eval_sampling(store, cfg, set, 1);
  auto k10 = eval_sampling(store, cfg, set, 10, /*chunk_rows=*/4);
  auto k40 = eval_sampling(store, cfg, set, 40, /*chunk_rows=*/16);
  for (size_t i = 0; i < set.instances.size(); ++i) {
    CHECK(k10.rows[i].obj <= k1.rows[i].obj);
    CHECK(k40.rows[i].obj <= k10.rows[i].obj);
  }
  // chunking must not change the draw for a given k
  auto k10b = eval_sampling(store, cfg, set, 10, /*chunk_rows=*/3);
  for (size_t i = 0; i < set.instances.size(); ++i)
    CHECK(k10.rows[i].obj == k10b.rows[i].obj);

  auto exact = eval_exact(set);
  for (size_t i = 0; i < set.instances.size(); ++i)
    CHECK(k40.rows[i].obj >= exact.rows[i].obj - 1e-12);
}

TEST_CASE("results csv schema and per-instance gaps") {
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 571);
  auto set = make_test_set(2, Distribution::Uniform, 577, 5);
  auto rep = eval_greedy(store, cfg, set);
  auto exact = eval_exact(set);
  std::vector<double> refs;
  for (const auto& r : exact.rows) refs.push_back(r.obj);

  std::ostringstream out;
  write_results_csv_header(out);
  append_results_csv(out, rep, &refs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,n,dist,decode,instance_id,obj,time_ms,gap_pct");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
    CHECK(line.rfind("neural,2,uniform,greedy,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("aggregation picks exact as reference and renders tables") {
  std::filesystem::create_directories("tmp_bench");
  {
    std::ofstream csv("tmp_bench/rows.csv");
    write_results_csv_header(csv);
    csv << "exact,2,uniform,-,0,1.0,5.0,\n";
    csv << "exact,2,uniform,-,1,2.0,5.0,\n";
    csv << "neural,2,uniform,greedy,0,1.2,1.0,\n";
    csv << "neural,2,uniform,greedy,1,2.2,1.0,\n";
  }
  auto rows = aggregate_results({"tmp_bench/rows.csv"});
  REQUIRE(rows.size() == 2);
  double neural_gap = 0;
  for (const auto& r : rows) {
    if (r.method == "exact") CHECK(r.gap == doctest::Approx(0.0));
    if (r.method == "neural") neural_gap = r.gap;
  }
  CHECK(neural_gap == doctest::Approx(gap_pct(1.7, 1.5)));

  auto md = render_table(rows, "md");
  CHECK(md.find("| Method |") != std::string::npos);
  CHECK(md.find("exact") != std::string::npos);
  auto csv_text = render_table(rows, "csv");
  CHECK(csv_text.find("method,decode,n,dist,mean_obj,gap_pct,mean_time_s,instances") == 0);
  CHECK_THROWS_AS(render_table(rows, "html"), Error);
}

TEST_CASE("run_matrix evaluates available cells and skips missing checkpoints") {
  std::filesystem::create_directories("tmp_matrix");
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 601);
  save_checkpoint("tmp_matrix/full_n2_clustered.bin", store, meta_from(cfg, 0));

  MatrixSpec spec;
  spec.sizes = {2};
  spec.dists = {Distribution::Clustered, Distribution::Uniform};
  spec.ablations = {Ablation::Full};
  spec.decodes = {{"greedy", 0}, {"sample", 8}};
  spec.ckpt_pattern = "tmp_matrix/{ablation}_n{n}_{dist}.bin";
  spec.testset_seed = 607;
  spec.count = 4;
  spec.out_dir = "tmp_matrix/out";
  auto res = run_matrix(spec);
  CHECK(res.cells_skipped == 1);  // uniform checkpoint missing
  CHECK(std::filesystem::exists(res.results_csv));
  CHECK(std::filesystem::exists(res.report_md));

  std::ifstream md(res.report_md);
  std::string text((std::istreambuf_iterator<char>(md)), std::istreambuf_iterator<char>());
  CHECK(text.find("exact") != std::string::npos);       // oracle column present
  CHECK(text.find("greedy-nf") != std::string::npos);
  CHECK(text.find("neural-full") != std::string::npos);
  CHECK(text.find("skipped") != std::string::npos);

  auto agg = aggregate_results({res.results_csv});
  for (const auto& row : agg)
    if (row.method != "exact") CHECK(row.gap >= -1e-9);
}

TEST_CASE("matrix cross-size cells reuse one checkpoint across test sizes") {
  std::filesystem::create_directories("tmp_matrix2");
  auto cfg = toy_config();
  auto store = init_params<float>(cfg, 611);
  save_checkpoint("tmp_matrix2/shared.bin", store, meta_from(cfg, 0));

  MatrixSpec spec;
  spec.sizes = {2, 3};  // one checkpoint, two test sizes
  spec.dists = {Distribution::Clustered};
  spec.ablations = {Ablation::Full};
  spec.decodes = {{"greedy", 0}};
  spec.ckpt_pattern = "tmp_matrix2/shared.bin";
  spec.testset_seed = 613;
  spec.count = 4;
  spec.out_dir = "tmp_matrix2/out";
  auto res = run_matrix(spec);
  CHECK(res.cells_skipped == 0);
  auto agg = aggregate_results({res.results_csv});
  int neural_rows = 0;
  for (const auto& row : agg)
    if (row.method == "neural-full") ++neural_rows;
  CHECK(neural_rows == 2);  // both sizes evaluated without shape errors
}
