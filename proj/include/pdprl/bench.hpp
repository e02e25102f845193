#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pdprl/baselines.hpp"
#include "pdprl/checkpoint.hpp"
#include "pdprl/trainer.hpp"

namespace pdprl {

// Frozen evaluation set: regeneration from (n, distribution, seed) is
// bit-identical, and the derivation tag keeps it disjoint from training
// streams.
struct TestSet {
  int n = 0;
  Distribution dist = Distribution::Clustered;
  std::uint64_t seed = 0;
  std::vector<PdpInstance> instances;
};

TestSet make_test_set(int n, Distribution dist, std::uint64_t seed, int count = 100);
TestSet test_set_from_instances(std::vector<PdpInstance> instances, std::uint64_t seed);

struct EvalRow {
  int instance_id = 0;
  double obj = 0.0;
  double time_ms = 0.0;
  std::vector<int> order;
};

struct EvalReport {
  std::string method;  // "neural" | "exact" | "greedy-nf"
  std::string decode;  // "greedy" | "greedy-1" | "sample-K" | "-"
  int n = 0;
  Distribution dist = Distribution::Clustered;
  double mean_obj = 0.0;
  double mean_time_ms = 0.0;
  std::vector<EvalRow> rows;
};

// Multi-start greedy (best over all pickup starts) by default; single-start
// greedy behind the flag. Timing covers decode only.
EvalReport eval_greedy(ParamStore<float>& store, const ModelConfig& cfg,
                       const TestSet& set, bool multi_start = true);

// Best of K sampled rollouts per instance, starts cycled over pickups.
// Sample k draws from a stream seeded by (instance, start, k), so a larger K
// extends a smaller K's sample set and best-of-K is monotone in K.
EvalReport eval_sampling(ParamStore<float>& store, const ModelConfig& cfg,
                         const TestSet& set, int K, int chunk_rows = 256);

EvalReport eval_exact(const TestSet& set);
EvalReport eval_greedy_nf(const TestSet& set);

// (obj - ref) / ref * 100. Throws InvalidReference for ref <= 0.
double gap_pct(double obj, double ref);

// Appends per-instance rows: method,n,dist,decode,instance_id,obj,time_ms,
// gap_pct. The gap column is filled against per-instance reference
// objectives when given, left empty otherwise.
void append_results_csv(std::ostream& out, const EvalReport& report,
                        const std::vector<double>* ref_objs);
void write_results_csv_header(std::ostream& out);

// Aggregated table in the Obj. / Gap (%) / Time layout. Reference per
// (n, dist): the exact mean when present, otherwise the best mean objective
// across methods.
struct AggRow {
  std::string method;
  std::string decode;
  int n = 0;
  std::string dist;
  double mean_obj = 0.0;
  double mean_time_ms = 0.0;
  double gap = 0.0;
  std::size_t count = 0;
};

std::vector<AggRow> aggregate_results(const std::vector<std::string>& csv_paths);
std::string render_table(const std::vector<AggRow>& rows, const std::string& format);

struct MatrixSpec {
  std::vector<int> sizes;
  std::vector<Distribution> dists;
  std::vector<Ablation> ablations;
  struct Decode {
    std::string kind;  // "greedy" | "sample"
    int samples = 0;
  };
  std::vector<Decode> decodes;
  std::string ckpt_pattern;  // placeholders: {ablation} {n} {dist}
  std::uint64_t testset_seed = 2025;
  int count = 100;
  bool include_baselines = true;
  double clip = 10.0;
  std::string out_dir;
};

struct MatrixResult {
  std::string results_csv;
  std::string report_md;
  int cells_run = 0;
  int cells_skipped = 0;
};

// Runs the evaluation grid; cells whose checkpoint is missing are reported
// as skipped, never aborted on.
MatrixResult run_matrix(const MatrixSpec& spec);

}  // namespace pdprl
