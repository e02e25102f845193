#pragma once

#include <cstdint>
#include <vector>

#include "pdprl/env.hpp"
#include "pdprl/instance.hpp"

namespace pdprl {

struct OracleResult {
  std::vector<int> order;   // optimal customer permutation
  double length = 0.0;
  std::uint64_t explored_states = 0;
};

// Exact solver: Held-Karp over (customer subset, last node) states restricted
// to precedence-closed subsets. Throws TooLarge when 2n exceeds the cap.
OracleResult exact_dp(const PdpInstance& inst, int max_customers = 16);

// Exhaustive enumeration of all precedence-valid permutations; the oracle
// for the oracle. explored_states counts valid complete permutations,
// which equals (2n)!/2^n. Throws TooLarge when 2n > 8.
OracleResult brute_force(const PdpInstance& inst, int max_customers = 8);

// Constructive baseline: repeatedly move to the nearest feasible node, ties
// broken by lowest index.
Tour greedy_nearest_feasible(const PdpInstance& inst);

}  // namespace pdprl
