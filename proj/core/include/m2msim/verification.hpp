#pragma once

#include <string>
#include <vector>

#include "m2msim/controller.hpp"
#include "m2msim/pomdp.hpp"

namespace m2msim {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // largest deviation seen
  std::string detail;
};

// Expectimax over every action and observation path, carried out on the
// joint 2^R belief with no factoring, pruning or caching.
double reference_value(const PomdpModel& model, const Belief& belief, int slot = 0);

// Exact solver against reference_value for R <= 2, K <= 4, epsilon in
// {0, 0.1, 0.3, 0.5}, beta in {0, 0.5, 1}, at 25 beliefs per instance.
CheckResult verify_pomdp_oracle(double tolerance = 1e-9);

// Linear loop with a step in the targets for L in {2, 5}, omega in
// {0.5, 0.8}, mu in {1, 2}. The plant gain is mu * plant_mu_scale.
CheckResult verify_deadbeat(double plant_mu_scale = 1.0, double tolerance = 1e-9);

}  // namespace m2msim
