#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pdprl/common.hpp"

namespace pdprl {

// Node role doubles as the discrete cluster ID fed to the model.
enum class NodeRole : int { Depot = 0, Pickup = 1, Delivery = 2 };

enum class Distribution { Clustered, Uniform };

const char* to_string(Distribution d);
Distribution distribution_from_string(const std::string& s);

// A single-vehicle pickup-and-delivery instance on the unit square.
// Index convention: node 0 is the depot, 1..n are pickups, n+1..2n are
// deliveries, and pickup i pairs with delivery i+n.
struct PdpInstance {
  int n = 0;
  std::vector<std::array<double, 2>> coords;  // 2n+1 points in [0,1]^2
  std::vector<NodeRole> roles;                // fixed by the index convention
  Distribution distribution = Distribution::Uniform;
  std::uint64_t seed = 0;
  double speed = 1.0;  // constant vehicle speed f

  int node_count() const { return 2 * n + 1; }

  NodeRole role(int i) const { return roles[static_cast<size_t>(i)]; }
  bool is_pickup(int i) const { return i >= 1 && i <= n; }
  bool is_delivery(int i) const { return i > n && i <= 2 * n; }

  // Paired node of a customer: pickup i <-> delivery i+n.
  int partner(int i) const { return is_pickup(i) ? i + n : i - n; }
};

struct DistanceMatrix {
  int size = 0;
  std::vector<double> d;  // row-major (2n+1)^2

  double at(int i, int j) const {
    return d[static_cast<size_t>(i) * size + j];
  }
};

double euclid(const std::array<double, 2>& a, const std::array<double, 2>& b);

// 2n+1 i.i.d. uniform points on the unit square. Throws InvalidSize for n=0.
PdpInstance gen_uniform(int n, std::uint64_t seed);

// Pickups ~ N((0.25,0.25), 0.1 I), deliveries ~ N((0.75,0.75), 0.1 I), each
// coordinate clamped to [0,1]; depot uniform on the square. Throws
// InvalidSize for n=0.
PdpInstance gen_clustered(int n, std::uint64_t seed);

PdpInstance generate(Distribution dist, int n, std::uint64_t seed);

DistanceMatrix distance_matrix(const PdpInstance& inst);

// JSON (de)serialization. An instance round-trips bit-exactly; a dataset is a
// JSON array of instances.
std::string instance_to_json(const PdpInstance& inst);
PdpInstance instance_from_json(const std::string& text);
std::string dataset_to_json(const std::vector<PdpInstance>& set);
std::vector<PdpInstance> dataset_from_json(const std::string& text);

void write_dataset(const std::string& path, const std::vector<PdpInstance>& set);
std::vector<PdpInstance> read_dataset(const std::string& path);

}  // namespace pdprl
