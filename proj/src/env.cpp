#include "pdprl/env.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace pdprl {

int ActionMask::count() const {
  int c = 0;
  for (char f : feasible) c += (f != 0);
  return c;
}

RouteState initial_state(const PdpInstance& inst) {
  RouteState s;
  s.tour = {0};
  s.visited.assign(static_cast<size_t>(inst.node_count()), 0);
  s.visited[0] = 1;
  s.current = 0;
  s.done = false;
  return s;
}

ActionMask feasible_mask(const PdpInstance& inst, const RouteState& state) {
  if (state.done) throw EpisodeFinished("feasible_mask on a finished episode");
  ActionMask mask;
  mask.feasible.assign(static_cast<size_t>(inst.node_count()), 0);
  for (int j = 1; j <= 2 * inst.n; ++j) {
    if (state.visited[static_cast<size_t>(j)]) continue;
    if (inst.is_pickup(j) || state.visited[static_cast<size_t>(j - inst.n)])
      mask.feasible[static_cast<size_t>(j)] = 1;
  }
  return mask;
}

std::pair<RouteState, double> step(const PdpInstance& inst,
                                   const RouteState& state, int action) {
  if (state.done) throw EpisodeFinished("step on a finished episode");
  if (action <= 0 || action > 2 * inst.n) {
    throw InfeasibleAction(action == 0 ? Violation::Depot : Violation::UnknownNode,
                           action);
  }
  if (state.visited[static_cast<size_t>(action)])
    throw InfeasibleAction(Violation::Visited, action);
  if (inst.is_delivery(action) &&
      !state.visited[static_cast<size_t>(action - inst.n)])
    throw InfeasibleAction(Violation::Precedence, action);

  RouteState next = state;
  next.tour.push_back(action);
  next.visited[static_cast<size_t>(action)] = 1;
  next.current = action;
  if (inst.is_pickup(action)) {
    auto it = std::lower_bound(next.open_pickups.begin(),
                               next.open_pickups.end(), action);
    next.open_pickups.insert(it, action);
  } else {
    int pickup = action - inst.n;
    auto it = std::lower_bound(next.open_pickups.begin(),
                               next.open_pickups.end(), pickup);
    if (it != next.open_pickups.end() && *it == pickup)
      next.open_pickups.erase(it);
  }
  next.done = next.customers_visited() == 2 * inst.n;

  double reward = -euclid(inst.coords[static_cast<size_t>(state.current)],
                          inst.coords[static_cast<size_t>(action)]);
  return {std::move(next), reward};
}

namespace {

void require_permutation(const PdpInstance& inst, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != 2 * inst.n)
    throw InvalidTour("order length != 2n");
  std::vector<char> seen(static_cast<size_t>(2 * inst.n + 1), 0);
  for (int v : order) {
    if (v < 1 || v > 2 * inst.n) throw InvalidTour("node index out of range");
    if (seen[static_cast<size_t>(v)]) throw InvalidTour("duplicate node in order");
    seen[static_cast<size_t>(v)] = 1;
  }
}

}  // namespace

double tour_length(const PdpInstance& inst, const std::vector<int>& order) {
  require_permutation(inst, order);
  double total = euclid(inst.coords[0], inst.coords[static_cast<size_t>(order[0])]);
  for (size_t k = 0; k + 1 < order.size(); ++k)
    total += euclid(inst.coords[static_cast<size_t>(order[k])],
                    inst.coords[static_cast<size_t>(order[k + 1])]);
  total += euclid(inst.coords[static_cast<size_t>(order.back())], inst.coords[0]);
  return total;
}

std::vector<double> arrival_times(const PdpInstance& inst,
                                  const std::vector<int>& order) {
  require_permutation(inst, order);
  std::vector<double> times;
  times.reserve(order.size());
  double t = 0.0;
  int prev = 0;
  for (int v : order) {
    t += euclid(inst.coords[static_cast<size_t>(prev)],
                inst.coords[static_cast<size_t>(v)]) /
         inst.speed;
    times.push_back(t);
    prev = v;
  }
  return times;
}

ValidationReport validate_tour(const PdpInstance& inst,
                               const std::vector<int>& order) {
  ValidationReport report;
  std::vector<char> seen(static_cast<size_t>(2 * inst.n + 1), 0);
  for (int v : order) {
    if (v < 1 || v > 2 * inst.n) {
      report.ok = false;
      report.violation = {Violation::UnknownNode, v};
      return report;
    }
    if (seen[static_cast<size_t>(v)]) {
      report.ok = false;
      report.violation = {Violation::Duplicate, v};
      return report;
    }
    if (inst.is_delivery(v) && !seen[static_cast<size_t>(v - inst.n)]) {
      report.ok = false;
      report.violation = {Violation::Precedence, v - inst.n};  // pair index
      return report;
    }
    seen[static_cast<size_t>(v)] = 1;
  }
  for (int j = 1; j <= 2 * inst.n; ++j) {
    if (!seen[static_cast<size_t>(j)]) {
      report.ok = false;
      report.violation = {Violation::Incomplete, j};
      return report;
    }
  }
  return report;
}

Tour make_tour(const PdpInstance& inst, const std::vector<int>& order) {
  Tour t;
  t.order = order;
  t.length = tour_length(inst, order);
  return t;
}

std::string tour_to_json(const std::string& instance_ref, const Tour& tour) {
  nlohmann::ordered_json j;
  j["instance_ref"] = instance_ref;
  j["order"] = tour.order;
  j["length"] = tour.length;
  return j.dump();
}

std::string report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json j;
  j["ok"] = report.ok;
  if (report.violation) {
    j["violation"] = {{"kind", violation_name(report.violation->kind)},
                      {"node", report.violation->node}};
  } else {
    j["violation"] = nullptr;
  }
  return j.dump();
}

}  // namespace pdprl
