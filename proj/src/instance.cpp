#include "pdprl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pdprl/rng.hpp"

namespace pdprl {

const char* to_string(Distribution d) {
  return d == Distribution::Clustered ? "clustered" : "uniform";
}

Distribution distribution_from_string(const std::string& s) {
  if (s == "clustered") return Distribution::Clustered;
  if (s == "uniform") return Distribution::Uniform;
  throw Error("unknown distribution: " + s);
}

double euclid(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  double dx = a[0] - b[0];
  double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

namespace {

std::vector<NodeRole> roles_for(int n) {
  std::vector<NodeRole> roles(static_cast<size_t>(2 * n + 1), NodeRole::Depot);
  for (int i = 1; i <= n; ++i) roles[static_cast<size_t>(i)] = NodeRole::Pickup;
  for (int i = n + 1; i <= 2 * n; ++i)
    roles[static_cast<size_t>(i)] = NodeRole::Delivery;
  return roles;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

PdpInstance gen_uniform(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidSize("pair count must be >= 1");
  PdpInstance inst;
  inst.n = n;
  inst.distribution = Distribution::Uniform;
  inst.seed = seed;
  inst.roles = roles_for(n);
  inst.coords.resize(static_cast<size_t>(2 * n + 1));
  Rng rng(seed);
  for (auto& p : inst.coords) {
    p[0] = rng.uniform();
    p[1] = rng.uniform();
  }
  return inst;
}

PdpInstance gen_clustered(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidSize("pair count must be >= 1");
  PdpInstance inst;
  inst.n = n;
  inst.distribution = Distribution::Clustered;
  inst.seed = seed;
  inst.roles = roles_for(n);
  inst.coords.resize(static_cast<size_t>(2 * n + 1));
  Rng rng(seed);
  inst.coords[0][0] = rng.uniform();
  inst.coords[0][1] = rng.uniform();
  for (int i = 1; i <= n; ++i) {
    inst.coords[static_cast<size_t>(i)][0] = clamp01(rng.normal(0.25, 0.1));
    inst.coords[static_cast<size_t>(i)][1] = clamp01(rng.normal(0.25, 0.1));
  }
  for (int i = n + 1; i <= 2 * n; ++i) {
    inst.coords[static_cast<size_t>(i)][0] = clamp01(rng.normal(0.75, 0.1));
    inst.coords[static_cast<size_t>(i)][1] = clamp01(rng.normal(0.75, 0.1));
  }
  return inst;
}

PdpInstance generate(Distribution dist, int n, std::uint64_t seed) {
  return dist == Distribution::Clustered ? gen_clustered(n, seed)
                                         : gen_uniform(n, seed);
}

DistanceMatrix distance_matrix(const PdpInstance& inst) {
  int m = inst.node_count();
  DistanceMatrix dm;
  dm.size = m;
  dm.d.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double v = euclid(inst.coords[static_cast<size_t>(i)],
                        inst.coords[static_cast<size_t>(j)]);
      dm.d[static_cast<size_t>(i) * m + j] = v;
      dm.d[static_cast<size_t>(j) * m + i] = v;
    }
  }
  return dm;
}

namespace {

nlohmann::ordered_json instance_json(const PdpInstance& inst) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["n"] = inst.n;
  j["distribution"] = to_string(inst.distribution);
  j["seed"] = inst.seed;
  auto coords = nlohmann::ordered_json::array();
  for (const auto& p : inst.coords) coords.push_back({p[0], p[1]});
  j["coords"] = std::move(coords);
  auto roles = nlohmann::ordered_json::array();
  for (auto r : inst.roles) roles.push_back(static_cast<int>(r));
  j["roles"] = std::move(roles);
  return j;
}

PdpInstance instance_from(const nlohmann::json& j) {
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw Error("unsupported instance file version");
  PdpInstance inst;
  inst.n = j.at("n").get<int>();
  if (inst.n < 1) throw InvalidSize("instance with n < 1");
  inst.distribution = distribution_from_string(j.at("distribution").get<std::string>());
  inst.seed = j.at("seed").get<std::uint64_t>();
  const auto& coords = j.at("coords");
  const auto& roles = j.at("roles");
  size_t m = static_cast<size_t>(2 * inst.n + 1);
  if (coords.size() != m || roles.size() != m)
    throw Error("instance field lengths disagree with n");
  inst.coords.resize(m);
  inst.roles.resize(m);
  for (size_t i = 0; i < m; ++i) {
    inst.coords[i] = {coords[i][0].get<double>(), coords[i][1].get<double>()};
    inst.roles[i] = static_cast<NodeRole>(roles[i].get<int>());
  }
  return inst;
}

}  // namespace

std::string instance_to_json(const PdpInstance& inst) {
  return instance_json(inst).dump();
}

PdpInstance instance_from_json(const std::string& text) {
  return instance_from(nlohmann::json::parse(text));
}

std::string dataset_to_json(const std::vector<PdpInstance>& set) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& inst : set) arr.push_back(instance_json(inst));
  return arr.dump();
}

std::vector<PdpInstance> dataset_from_json(const std::string& text) {
  auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw Error("dataset file must be a JSON array");
  std::vector<PdpInstance> set;
  set.reserve(arr.size());
  for (const auto& j : arr) set.push_back(instance_from(j));
  return set;
}

void write_dataset(const std::string& path, const std::vector<PdpInstance>& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for write: " + path);
  out << dataset_to_json(set);
}

std::vector<PdpInstance> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return dataset_from_json(text);
}

}  // namespace pdprl
