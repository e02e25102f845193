#pragma once

#include <stdexcept>
#include <string>

namespace pdprl {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

// Rule violated by an action or a tour.
enum class Violation {
  Visited,     // node already in the tour
  Precedence,  // delivery attempted before its pickup
  Depot,       // depot selected as an explicit action
  Duplicate,   // node appears twice in a tour
  UnknownNode, // index outside {1..2n}
  Incomplete,  // tour misses at least one customer
};

inline const char* violation_name(Violation v) {
  switch (v) {
    case Violation::Visited: return "Visited";
    case Violation::Precedence: return "Precedence";
    case Violation::Depot: return "Depot";
    case Violation::Duplicate: return "Duplicate";
    case Violation::UnknownNode: return "UnknownNode";
    case Violation::Incomplete: return "Incomplete";
  }
  return "?";
}

class InfeasibleAction : public Error {
 public:
  InfeasibleAction(Violation rule, int node)
      : Error(std::string("infeasible action (") + violation_name(rule) +
              ") at node " + std::to_string(node)),
        rule(rule),
        node(node) {}
  Violation rule;
  int node;
};

class InvalidTour : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class MaskExhausted : public Error {
 public:
  using Error::Error;
};

class GradientUnavailable : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class InvalidReference : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace pdprl
