#include "m2msim/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "m2msim/error.hpp"

namespace m2msim {

Action Action::access(int rb) {
  if (rb < 0) throw DomainError("Action::access: negative RB index");
  return Action(rb);
}

int Action::rb() const {
  if (is_sleep()) throw DomainError("Action::rb: Sleep has no RB");
  return rb_;
}

std::string Action::to_string() const {
  return is_sleep() ? std::string("sleep") : "access:" + std::to_string(rb_ + 1);
}

void ObservationModel::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("observation.epsilon must be in [0,1]");
  if (!(phi >= 0.0 && phi <= 1.0)) throw ConfigError("observation.phi must be in [0,1]");
  if (tie_phi_to_epsilon && epsilon != phi)
    throw ConfigError("observation.phi must equal observation.epsilon while tie_phi_to_epsilon is set");
}

bool ObservationModel::observes(Action a, int rb) const {
  return (!a.is_sleep() && a.rb() == rb) || broadcast_sensing;
}

double ObservationModel::noise(Action a, int rb) const {
  return (!a.is_sleep() && a.rb() == rb) ? epsilon : phi;
}

double reading_likelihood(Reading reading, RbState state, double noise, SensingLaw law) {
  if (reading == Reading::none) return 1.0;
  const bool correct = static_cast<int>(reading) == static_cast<int>(state);
  if (law == SensingLaw::symmetric) return correct ? 1.0 - noise : noise;
  if (state == RbState::idle) return correct ? 1.0 : 0.0;
  return correct ? 1.0 - noise : noise;
}

Reading read_rb(RbState state, double noise, SensingLaw law, double u) {
  const Reading truth = state == RbState::idle ? Reading::idle : Reading::busy;
  const Reading flipped = state == RbState::idle ? Reading::busy : Reading::idle;
  if (law == SensingLaw::busy_as_idle && state == RbState::idle) return truth;
  return u < noise ? flipped : truth;
}

Reading observe(RbState true_next, Action a, int rb, const ObservationModel& obs, Rng& rng) {
  if (!obs.observes(a, rb)) return Reading::none;
  return read_rb(true_next, obs.noise(a, rb), obs.law, uniform01(rng));
}

namespace {

void check_belief(const Belief& b) {
  for (double p : b)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("belief entry outside [0,1]");
}

}  // namespace

Belief stationary_belief(int rbs, const RbMarkov& markov) {
  return Belief(static_cast<std::size_t>(rbs), markov.stationary_idle());
}

Belief propagate(const Belief& belief, const RbMarkov& markov) {
  Belief out(belief.size());
  for (std::size_t r = 0; r < belief.size(); ++r) out[r] = markov.propagate_idle(belief[r]);
  return out;
}

double belief_update_rb(double prior, Reading reading, double noise, SensingLaw law,
                        const RbMarkov& markov) {
  const double pred = markov.propagate_idle(prior);
  if (reading == Reading::none) return pred;
  const double li = reading_likelihood(reading, RbState::idle, noise, law);
  const double lb = reading_likelihood(reading, RbState::busy, noise, law);
  if (li == lb) {
    if (li == 0.0) throw BeliefUpdateError("belief_update: impossible reading");
    return pred;
  }
  const double num = pred * li;
  const double den = num + (1.0 - pred) * lb;
  if (!(den > 0.0)) throw BeliefUpdateError("belief_update: reading has zero probability");
  return std::clamp(num / den, 0.0, 1.0);
}

Belief belief_update(const Belief& belief, Action a, const Observation& obs,
                     const RbMarkov& markov, const ObservationModel& model) {
  check_belief(belief);
  if (obs.size() != belief.size()) throw DomainError("belief_update: observation length mismatch");
  Belief out(belief.size());
  for (std::size_t r = 0; r < belief.size(); ++r) {
    const int ri = static_cast<int>(r);
    const Reading seen = model.observes(a, ri) ? obs[r] : Reading::none;
    out[r] = belief_update_rb(belief[r], seen, model.noise(a, ri), model.law, markov);
  }
  return out;
}

Belief belief_update_or_propagate(const Belief& belief, Action a, const Observation& obs,
                                  const RbMarkov& markov, const ObservationModel& model) {
  check_belief(belief);
  Belief out(belief.size());
  for (std::size_t r = 0; r < belief.size(); ++r) {
    const int ri = static_cast<int>(r);
    const Reading seen = model.observes(a, ri) ? obs[r] : Reading::none;
    try {
      out[r] = belief_update_rb(belief[r], seen, model.noise(a, ri), model.law, markov);
    } catch (const BeliefUpdateError&) {
      out[r] = markov.propagate_idle(belief[r]);
    }
  }
  return out;
}

double immediate_reward(Action a, double realized_rate) {
  if (realized_rate < 0.0) throw DomainError("immediate_reward: negative rate");
  return a.is_sleep() ? 0.0 : realized_rate;
}

double best_rb_reward(std::span<const double> rates) {
  if (rates.empty()) throw DomainError("best_rb_reward: empty rate vector");
  return *std::max_element(rates.begin(), rates.end());
}

double slot_weight(int slot, int horizon, double beta) {
  const int e = horizon - slot - 1;
  return e == 0 ? 1.0 : std::pow(beta, e);
}

double total_discounted_reward(std::span<const double> per_slot, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("total_discounted_reward: beta outside [0,1]");
  const int k_total = static_cast<int>(per_slot.size());
  double sum = 0.0;
  for (int k = 0; k < k_total; ++k) sum += slot_weight(k, k_total, beta) * per_slot[k];
  return sum;
}

void PomdpModel::validate() const {
  obs.validate();
  if (horizon < 1) throw ConfigError("pomdp: horizon must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("pomdp: discount must be in [0,1]");
  if (rates.empty()) throw ConfigError("pomdp: at least one RB is required");
  for (const auto& row : rates)
    if (!(row.idle >= 0.0) || !(row.busy >= 0.0) || !std::isfinite(row.idle) ||
        !std::isfinite(row.busy))
      throw ConfigError("pomdp: rate table entries must be finite and >= 0");
}

void SolverOptions::validate() const {
  if (grid_resolution < 2) throw ConfigError("solver.grid_resolution must be >= 2");
  if (grid_resolution > 65535) throw ConfigError("solver.grid_resolution must be <= 65535");
  if (max_exact_rbs < 1 || max_exact_rbs > 16) throw ConfigError("solver.max_exact_rbs must be in [1,16]");
  if (max_alpha_vectors < 1) throw ConfigError("solver.max_alpha_vectors must be >= 1");
  if (max_observation_branches < 1) throw ConfigError("solver.max_observation_branches must be >= 1");
}

Action act(const Policy& policy, const Belief& belief, int slot) { return policy.act(belief, slot); }

}  // namespace m2msim
