#include "pdprl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace pdprl {

namespace {

constexpr std::uint64_t kTagTestSet = 0x55;
constexpr std::uint64_t kTagSample = 0x66;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

TestSet make_test_set(int n, Distribution dist, std::uint64_t seed, int count) {
  TestSet set;
  set.n = n;
  set.dist = dist;
  set.seed = seed;
  std::uint64_t base = derive(seed, kTagTestSet);
  for (int i = 0; i < count; ++i)
    set.instances.push_back(
        generate(dist, n, derive(base, static_cast<std::uint64_t>(i))));
  return set;
}

TestSet test_set_from_instances(std::vector<PdpInstance> instances,
                                std::uint64_t seed) {
  if (instances.empty()) throw Error("empty test set");
  TestSet set;
  set.n = instances.front().n;
  set.dist = instances.front().distribution;
  set.seed = seed;
  set.instances = std::move(instances);
  return set;
}

EvalReport eval_greedy(ParamStore<float>& store, const ModelConfig& cfg,
                       const TestSet& set, bool multi_start) {
  EvalReport report;
  report.method = "neural";
  report.decode = multi_start ? "greedy" : "greedy-1";
  report.n = set.n;
  report.dist = set.dist;
  std::vector<int> starts;
  if (multi_start)
    for (int p = 1; p <= set.n; ++p) starts.push_back(p);
  else
    starts.push_back(1);

  for (size_t i = 0; i < set.instances.size(); ++i) {
    const auto& inst = set.instances[i];
    double t0 = now_ms();
    Tape<float> tape(false);
    auto rolls = run_rollouts(tape, store, inst, cfg, starts, DecodeMode::Greedy);
    int best = 0;
    for (int r = 1; r < static_cast<int>(rolls.lengths.size()); ++r)
      if (rolls.lengths[static_cast<size_t>(r)] < rolls.lengths[static_cast<size_t>(best)])
        best = r;
    EvalRow row;
    row.instance_id = static_cast<int>(i);
    row.obj = rolls.lengths[static_cast<size_t>(best)];
    row.time_ms = now_ms() - t0;
    row.order = rolls.orders[static_cast<size_t>(best)];
    if (!validate_tour(inst, row.order).ok)
      throw Error("eval produced an infeasible tour");
    report.rows.push_back(std::move(row));
  }
  for (const auto& r : report.rows) {
    report.mean_obj += r.obj;
    report.mean_time_ms += r.time_ms;
  }
  report.mean_obj /= static_cast<double>(report.rows.size());
  report.mean_time_ms /= static_cast<double>(report.rows.size());
  return report;
}

EvalReport eval_sampling(ParamStore<float>& store, const ModelConfig& cfg,
                         const TestSet& set, int K, int chunk_rows) {
  if (K < 1) throw Error("sample count must be >= 1");
  EvalReport report;
  report.method = "neural";
  report.decode = "sample-" + std::to_string(K);
  report.n = set.n;
  report.dist = set.dist;

  for (size_t i = 0; i < set.instances.size(); ++i) {
    const auto& inst = set.instances[i];
    std::uint64_t inst_stream =
        derive(derive(set.seed, kTagSample), static_cast<std::uint64_t>(i));
    double t0 = now_ms();
    double best_obj = 0.0;
    std::vector<int> best_order;
    for (int k0 = 0; k0 < K; k0 += chunk_rows) {
      int rows = std::min(chunk_rows, K - k0);
      std::vector<int> starts(static_cast<size_t>(rows));
      std::vector<Rng> rngs;
      rngs.reserve(static_cast<size_t>(rows));
      for (int r = 0; r < rows; ++r) {
        int k = k0 + r;
        int start = (k % inst.n) + 1;
        starts[static_cast<size_t>(r)] = start;
        rngs.emplace_back(derive(inst_stream, static_cast<std::uint64_t>(start),
                                 static_cast<std::uint64_t>(k)));
      }
      Tape<float> tape(false);
      auto rolls =
          run_rollouts(tape, store, inst, cfg, starts, DecodeMode::Sample, &rngs);
      for (int r = 0; r < rows; ++r) {
        if (best_order.empty() || rolls.lengths[static_cast<size_t>(r)] < best_obj) {
          best_obj = rolls.lengths[static_cast<size_t>(r)];
          best_order = rolls.orders[static_cast<size_t>(r)];
        }
      }
    }
    EvalRow row;
    row.instance_id = static_cast<int>(i);
    row.obj = best_obj;
    row.time_ms = now_ms() - t0;
    row.order = std::move(best_order);
    if (!validate_tour(inst, row.order).ok)
      throw Error("eval produced an infeasible tour");
    report.rows.push_back(std::move(row));
  }
  for (const auto& r : report.rows) {
    report.mean_obj += r.obj;
    report.mean_time_ms += r.time_ms;
  }
  report.mean_obj /= static_cast<double>(report.rows.size());
  report.mean_time_ms /= static_cast<double>(report.rows.size());
  return report;
}

namespace {

EvalReport eval_reference(const TestSet& set, const char* method,
                          const std::function<Tour(const PdpInstance&)>& solve) {
  EvalReport report;
  report.method = method;
  report.decode = "-";
  report.n = set.n;
  report.dist = set.dist;
  for (size_t i = 0; i < set.instances.size(); ++i) {
    double t0 = now_ms();
    Tour tour = solve(set.instances[i]);
    EvalRow row;
    row.instance_id = static_cast<int>(i);
    row.obj = tour.length;
    row.time_ms = now_ms() - t0;
    row.order = std::move(tour.order);
    if (!validate_tour(set.instances[i], row.order).ok)
      throw Error("reference solver produced an infeasible tour");
    report.rows.push_back(std::move(row));
  }
  for (const auto& r : report.rows) {
    report.mean_obj += r.obj;
    report.mean_time_ms += r.time_ms;
  }
  report.mean_obj /= static_cast<double>(report.rows.size());
  report.mean_time_ms /= static_cast<double>(report.rows.size());
  return report;
}

}  // namespace

EvalReport eval_exact(const TestSet& set) {
  return eval_reference(set, "exact", [](const PdpInstance& inst) {
    OracleResult res = exact_dp(inst);
    Tour t;
    t.order = res.order;
    t.length = res.length;
    return t;
  });
}

EvalReport eval_greedy_nf(const TestSet& set) {
  return eval_reference(set, "greedy-nf",
                        [](const PdpInstance& inst) { return greedy_nearest_feasible(inst); });
}

double gap_pct(double obj, double ref) {
  if (ref <= 0) throw InvalidReference("gap reference must be positive");
  return (obj - ref) / ref * 100.0;
}

void write_results_csv_header(std::ostream& out) {
  out << "method,n,dist,decode,instance_id,obj,time_ms,gap_pct\n";
}

void append_results_csv(std::ostream& out, const EvalReport& report,
                        const std::vector<double>* ref_objs) {
  for (const auto& row : report.rows) {
    out << report.method << ',' << report.n << ',' << to_string(report.dist) << ','
        << report.decode << ',' << row.instance_id << ',' << std::setprecision(17)
        << row.obj << ',' << row.time_ms << ',';
    if (ref_objs)
      out << std::setprecision(6)
          << gap_pct(row.obj, (*ref_objs)[static_cast<size_t>(row.instance_id)]);
    out << '\n';
  }
}

namespace {

struct CsvRow {
  std::string method, dist, decode;
  int n = 0;
  double obj = 0, time_ms = 0;
};

std::vector<CsvRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    CsvRow row;
    std::getline(ss, row.method, ',');
    std::getline(ss, field, ',');
    row.n = std::stoi(field);
    std::getline(ss, row.dist, ',');
    std::getline(ss, row.decode, ',');
    std::getline(ss, field, ',');  // instance_id
    std::getline(ss, field, ',');
    row.obj = std::stod(field);
    std::getline(ss, field, ',');
    row.time_ms = std::stod(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<AggRow> aggregate_results(const std::vector<std::string>& csv_paths) {
  std::map<std::tuple<int, std::string, std::string, std::string>, AggRow> agg;
  for (const auto& path : csv_paths) {
    for (const auto& row : read_results_csv(path)) {
      auto key = std::make_tuple(row.n, row.dist, row.method, row.decode);
      auto& a = agg[key];
      if (a.count == 0) {
        a.method = row.method;
        a.decode = row.decode;
        a.n = row.n;
        a.dist = row.dist;
      }
      a.mean_obj += row.obj;
      a.mean_time_ms += row.time_ms;
      ++a.count;
    }
  }
  std::vector<AggRow> rows;
  for (auto& [key, a] : agg) {
    a.mean_obj /= static_cast<double>(a.count);
    a.mean_time_ms /= static_cast<double>(a.count);
    rows.push_back(a);
  }
  // Reference per (n, dist): exact mean when present, else best mean.
  std::map<std::pair<int, std::string>, double> refs;
  for (const auto& a : rows) {
    auto key = std::make_pair(a.n, a.dist);
    auto it = refs.find(key);
    if (a.method == "exact")
      refs[key] = a.mean_obj;
    else if (it == refs.end())
      refs[key] = a.mean_obj;
    else if (it->second > a.mean_obj) {
      bool exact_seen = false;
      for (const auto& b : rows)
        if (b.method == "exact" && b.n == a.n && b.dist == a.dist) exact_seen = true;
      if (!exact_seen) it->second = a.mean_obj;
    }
  }
  for (auto& a : rows) a.gap = gap_pct(a.mean_obj, refs[{a.n, a.dist}]);
  return rows;
}

std::string render_table(const std::vector<AggRow>& rows, const std::string& format) {
  std::ostringstream out;
  if (format == "csv") {
    out << "method,decode,n,dist,mean_obj,gap_pct,mean_time_s,instances\n";
    for (const auto& a : rows)
      out << a.method << ',' << a.decode << ',' << a.n << ',' << a.dist << ','
          << std::fixed << std::setprecision(3) << a.mean_obj << ','
          << std::setprecision(2) << a.gap << ',' << std::setprecision(4)
          << a.mean_time_ms / 1000.0 << ',' << a.count << '\n';
    return out.str();
  }
  if (format != "md") throw Error("unknown report format: " + format);
  out << "| Method | Decode | n | Dist | Obj. | Gap (%) | Time (s) |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& a : rows)
    out << "| " << a.method << " | " << a.decode << " | " << a.n << " | " << a.dist
        << " | " << std::fixed << std::setprecision(3) << a.mean_obj << " | "
        << std::setprecision(2) << a.gap << " | " << std::setprecision(4)
        << a.mean_time_ms / 1000.0 << " |\n";
  return out.str();
}

namespace {

std::string expand_pattern(std::string pattern, Ablation a, int n, Distribution d) {
  auto replace_all = [&](const std::string& key, const std::string& value) {
    size_t pos = 0;
    while ((pos = pattern.find(key, pos)) != std::string::npos) {
      pattern.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{ablation}", to_string(a));
  replace_all("{n}", std::to_string(n));
  replace_all("{dist}", to_string(d));
  return pattern;
}

}  // namespace

MatrixResult run_matrix(const MatrixSpec& spec) {
  MatrixResult result;
  std::filesystem::create_directories(spec.out_dir);
  result.results_csv = spec.out_dir + "/results.csv";
  std::ofstream csv(result.results_csv);
  write_results_csv_header(csv);
  std::ostringstream skipped;

  for (int n : spec.sizes) {
    for (Distribution dist : spec.dists) {
      TestSet set = make_test_set(n, dist, spec.testset_seed, spec.count);
      std::vector<double> exact_objs;
      const std::vector<double>* ref = nullptr;
      if (spec.include_baselines && 2 * n <= 16) {
        EvalReport exact = eval_exact(set);
        for (const auto& r : exact.rows) exact_objs.push_back(r.obj);
        ref = &exact_objs;
        append_results_csv(csv, exact, ref);
        ++result.cells_run;
      }
      if (spec.include_baselines) {
        append_results_csv(csv, eval_greedy_nf(set), ref);
        ++result.cells_run;
      }
      for (Ablation a : spec.ablations) {
        std::string path = expand_pattern(spec.ckpt_pattern, a, n, dist);
        if (!std::filesystem::exists(path)) {
          skipped << "- skipped: " << to_string(a) << " n=" << n << " "
                  << to_string(dist) << " (missing checkpoint " << path << ")\n";
          ++result.cells_skipped;
          continue;
        }
        auto [store, meta] = load_checkpoint(path);
        ModelConfig cfg = model_config_from(meta, store);
        cfg.dec.clip = spec.clip;
        cfg.apply(a);
        for (const auto& dec : spec.decodes) {
          EvalReport rep;
          if (dec.kind == "greedy")
            rep = eval_greedy(store, cfg, set);
          else if (dec.kind == "sample")
            rep = eval_sampling(store, cfg, set, dec.samples);
          else
            throw Error("unknown decode kind: " + dec.kind);
          rep.method = std::string("neural-") + to_string(a);
          append_results_csv(csv, rep, ref);
          ++result.cells_run;
        }
      }
    }
  }
  csv.close();

  auto agg = aggregate_results({result.results_csv});
  result.report_md = spec.out_dir + "/report.md";
  std::ofstream md(result.report_md);
  md << render_table(agg, "md");
  std::string sk = skipped.str();
  if (!sk.empty()) md << "\nSkipped cells:\n" << sk;
  return result;
}

}  // namespace pdprl
