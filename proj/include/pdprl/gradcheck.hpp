#pragma once

#include <string>

#include "pdprl/trainer.hpp"

namespace pdprl {

// Central finite-difference verification of the full policy-loss gradient.
// Trajectories are sampled once at the base parameters; the loss is then a
// smooth function of theta under action replay, so (L(t+h)-L(t-h))/2h is an
// independent oracle for the tape gradient. Runs entirely in double.
struct GradCheckConfig {
  int n = 2;
  int d_h = 16;
  int L = 1;
  int heads = 2;
  int ffn_hidden = 64;
  int gate_hidden = 32;
  double clip = 10.0;
  Ablation ablation = Ablation::Full;
  Distribution distribution = Distribution::Clustered;
  double h = 1e-3;
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t scalars_checked = 0;
};

GradCheckResult gradcheck_policy_loss(const GradCheckConfig& cfg);

}  // namespace pdprl
