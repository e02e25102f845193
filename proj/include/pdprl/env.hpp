#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdprl/instance.hpp"

namespace pdprl {

// Partial tour during autoregressive construction. Values; step() returns a
// new state, so many episodes can share one instance concurrently.
struct RouteState {
  std::vector<int> tour;       // visited nodes in order, tour[0] == 0
  std::vector<char> visited;   // length 2n+1
  int current = 0;
  std::vector<int> open_pickups;  // pickups visited whose delivery is not, sorted
  bool done = false;

  int customers_visited() const { return static_cast<int>(tour.size()) - 1; }
};

struct Tour {
  std::vector<int> order;  // customer permutation, depot legs implicit
  double length = 0.0;
};

struct ActionMask {
  std::vector<char> feasible;  // length 2n+1; depot entry false before done

  bool at(int i) const { return feasible[static_cast<size_t>(i)] != 0; }
  int count() const;
};

struct TourViolation {
  Violation kind;
  int node;  // offending node, or pair index for Precedence
};

struct ValidationReport {
  bool ok = true;
  std::optional<TourViolation> violation;
};

RouteState initial_state(const PdpInstance& inst);

// Feasible set: unvisited pickups, plus unvisited deliveries whose pickup is
// already in the tour. The depot is never an explicit action. Throws
// EpisodeFinished on a done state.
ActionMask feasible_mask(const PdpInstance& inst, const RouteState& state);

// Appends `action`; reward is the negative travel distance of the leg. When
// the last customer is visited the state is flagged done; the caller adds the
// terminal depot-return reward -D[last][0]. Throws InfeasibleAction naming
// the violated rule.
std::pair<RouteState, double> step(const PdpInstance& inst,
                                   const RouteState& state, int action);

// Closed-tour length: depot -> order -> depot. Throws InvalidTour when
// `order` is not a permutation of {1..2n}.
double tour_length(const PdpInstance& inst, const std::vector<int>& order);

// Cumulative arrival times along the route (one value per visited customer,
// depot departure at time zero, travel time = distance / speed).
std::vector<double> arrival_times(const PdpInstance& inst,
                                  const std::vector<int>& order);

// Checks visit-exactly-once and pickup-before-delivery; violations are
// reported as values, never thrown.
ValidationReport validate_tour(const PdpInstance& inst,
                               const std::vector<int>& order);

Tour make_tour(const PdpInstance& inst, const std::vector<int>& order);

// JSON forms used by the CLI: {instance_ref, order, length} for tours and a
// structured object for validation reports.
std::string tour_to_json(const std::string& instance_ref, const Tour& tour);
std::string report_to_json(const ValidationReport& report);

}  // namespace pdprl
