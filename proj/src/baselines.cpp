#include "pdprl/baselines.hpp"

#include <algorithm>
#include <limits>

namespace pdprl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Customer c in [0, 2n) maps to node c+1; c < n are pickups.
inline bool subset_closed(std::uint32_t s, int n) {
  std::uint32_t pick_mask = (1u << n) - 1u;
  std::uint32_t deliveries = (s >> n) & pick_mask;
  std::uint32_t pickups = s & pick_mask;
  return (deliveries & ~pickups) == 0;
}

}  // namespace

OracleResult exact_dp(const PdpInstance& inst, int max_customers) {
  int m = 2 * inst.n;
  if (m > max_customers || m > 30)
    throw TooLarge("exact_dp limited to " + std::to_string(max_customers) +
                   " customers");
  DistanceMatrix D = distance_matrix(inst);
  size_t nstates = size_t(1) << m;
  std::vector<double> dp(nstates * static_cast<size_t>(m), kInf);
  std::vector<std::int8_t> par(nstates * static_cast<size_t>(m), -1);
  auto idx = [m](std::uint32_t s, int j) {
    return static_cast<size_t>(s) * static_cast<size_t>(m) + static_cast<size_t>(j);
  };

  OracleResult result;
  for (int p = 0; p < inst.n; ++p) {
    dp[idx(1u << p, p)] = D.at(0, p + 1);
    ++result.explored_states;
  }

  std::uint32_t full = static_cast<std::uint32_t>(nstates - 1);
  for (std::uint32_t s = 1; s < full; ++s) {
    if (!subset_closed(s, inst.n)) continue;
    for (int j = 0; j < m; ++j) {
      if (!(s & (1u << j))) continue;
      double base = dp[idx(s, j)];
      if (base == kInf) continue;
      for (int k = 0; k < m; ++k) {
        if (s & (1u << k)) continue;
        if (k >= inst.n && !(s & (1u << (k - inst.n)))) continue;  // precedence
        double cand = base + D.at(j + 1, k + 1);
        std::uint32_t ns = s | (1u << k);
        double& slot = dp[idx(ns, k)];
        if (cand < slot) {
          if (slot == kInf) ++result.explored_states;
          slot = cand;
          par[idx(ns, k)] = static_cast<std::int8_t>(j);
        }
      }
    }
  }

  double best = kInf;
  int best_last = -1;
  for (int j = 0; j < m; ++j) {
    double v = dp[idx(full, j)];
    if (v == kInf) continue;
    double total = v + D.at(j + 1, 0);
    if (total < best) {
      best = total;
      best_last = j;
    }
  }
  if (best_last < 0) throw Error("exact_dp found no feasible tour");

  result.length = best;
  result.order.resize(static_cast<size_t>(m));
  std::uint32_t s = full;
  int j = best_last;
  for (int pos = m - 1; pos >= 0; --pos) {
    result.order[static_cast<size_t>(pos)] = j + 1;
    int prev = par[idx(s, j)];
    s &= ~(1u << j);
    j = prev;
  }
  return result;
}

namespace {

void enumerate_orders(const PdpInstance& inst, const DistanceMatrix& D,
                      std::vector<int>& prefix, std::vector<char>& used,
                      double partial, int last, OracleResult& out) {
  int m = 2 * inst.n;
  if (static_cast<int>(prefix.size()) == m) {
    double total = partial + D.at(last, 0);
    ++out.explored_states;
    if (total < out.length) {
      out.length = total;
      out.order = prefix;
    }
    return;
  }
  for (int v = 1; v <= m; ++v) {
    if (used[static_cast<size_t>(v)]) continue;
    if (inst.is_delivery(v) && !used[static_cast<size_t>(v - inst.n)]) continue;
    used[static_cast<size_t>(v)] = 1;
    prefix.push_back(v);
    enumerate_orders(inst, D, prefix, used, partial + D.at(last, v), v, out);
    prefix.pop_back();
    used[static_cast<size_t>(v)] = 0;
  }
}

}  // namespace

OracleResult brute_force(const PdpInstance& inst, int max_customers) {
  int m = 2 * inst.n;
  if (m > max_customers)
    throw TooLarge("brute_force limited to " + std::to_string(max_customers) +
                   " customers");
  DistanceMatrix D = distance_matrix(inst);
  OracleResult out;
  out.length = kInf;
  std::vector<int> prefix;
  prefix.reserve(static_cast<size_t>(m));
  std::vector<char> used(static_cast<size_t>(m + 1), 0);
  enumerate_orders(inst, D, prefix, used, 0.0, 0, out);
  return out;
}

Tour greedy_nearest_feasible(const PdpInstance& inst) {
  RouteState state = initial_state(inst);
  std::vector<int> order;
  order.reserve(static_cast<size_t>(2 * inst.n));
  while (!state.done) {
    ActionMask mask = feasible_mask(inst, state);
    int best = -1;
    double best_d = kInf;
    for (int j = 1; j <= 2 * inst.n; ++j) {
      if (!mask.at(j)) continue;
      double d = euclid(inst.coords[static_cast<size_t>(state.current)],
                        inst.coords[static_cast<size_t>(j)]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    state = step(inst, state, best).first;
    order.push_back(best);
  }
  return make_tour(inst, order);
}

}  // namespace pdprl
