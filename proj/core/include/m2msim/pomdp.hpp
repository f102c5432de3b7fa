#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "m2msim/channel.hpp"
#include "m2msim/rng.hpp"

namespace m2msim {

// Sleep, or Access of one RB. RB indices are 0-based in code; text forms
// ("access:1") are 1-based like the model's action set.
class Action {
 public:
  static constexpr Action sleep() { return Action(-1); }
  static Action access(int rb);

  bool is_sleep() const { return rb_ < 0; }
  int rb() const;
  int code() const { return rb_ + 1; }  // 0 = Sleep, r+1 = Access(r)
  std::string to_string() const;

  friend bool operator==(const Action&, const Action&) = default;

 private:
  constexpr explicit Action(int rb) : rb_(rb) {}
  int rb_;
};

enum class Reading : std::uint8_t { idle = 0, busy = 1, none = 2 };

enum class SensingLaw : std::uint8_t {
  symmetric,     // either state is misread with the given probability
  busy_as_idle,  // only busy RBs are misread (as idle)
};

struct ObservationModel {
  double epsilon = 0.1;  // misread probability on the accessed RB
  double phi = 0.1;      // misread probability on every other RB
  SensingLaw law = SensingLaw::symmetric;
  bool broadcast_sensing = true;  // RBs not accessed are still observed, with phi
  bool tie_phi_to_epsilon = true;

  void validate() const;
  bool observes(Action a, int rb) const;
  double noise(Action a, int rb) const;
  // Observations do not depend on the action.
  bool passive() const { return broadcast_sensing && epsilon == phi; }

  friend bool operator==(const ObservationModel&, const ObservationModel&) = default;
};

double reading_likelihood(Reading reading, RbState state, double noise, SensingLaw law);
// Deterministic inverse-CDF reading for a uniform draw u in [0, 1).
Reading read_rb(RbState state, double noise, SensingLaw law, double u);

Reading observe(RbState true_next, Action a, int rb, const ObservationModel& obs, Rng& rng);

// Per-RB probability of being idle.
using Belief = std::vector<double>;
using Observation = std::vector<Reading>;

Belief stationary_belief(int rbs, const RbMarkov& markov);
Belief propagate(const Belief& belief, const RbMarkov& markov);

// Bayes update for one RB; throws BeliefUpdateError if the reading is impossible.
double belief_update_rb(double prior, Reading reading, double noise, SensingLaw law,
                        const RbMarkov& markov);
Belief belief_update(const Belief& belief, Action a, const Observation& obs,
                     const RbMarkov& markov, const ObservationModel& model);
// As belief_update, but RBs whose reading is impossible fall back to prior propagation.
Belief belief_update_or_propagate(const Belief& belief, Action a, const Observation& obs,
                                  const RbMarkov& markov, const ObservationModel& model);

double immediate_reward(Action a, double realized_rate);
double best_rb_reward(std::span<const double> rates);
double slot_weight(int slot, int horizon, double beta);
double total_discounted_reward(std::span<const double> per_slot, double beta);

struct RateRow {
  double idle;
  double busy;
  friend bool operator==(const RateRow&, const RateRow&) = default;
};

struct PomdpModel {
  RbMarkov markov;
  ObservationModel obs;
  int horizon = 1;
  double discount = 0.9;
  std::vector<RateRow> rates;  // one row per RB

  int rbs() const { return static_cast<int>(rates.size()); }
  void validate() const;
};

enum class SolverMode : std::uint8_t { exact, grid };

struct SolverOptions {
  SolverMode mode = SolverMode::grid;
  int grid_resolution = 101;
  int max_exact_rbs = 8;
  std::size_t max_alpha_vectors = 20000;
  std::size_t max_observation_branches = 4096;

  void validate() const;
  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

namespace detail {
struct PolicyImpl;
}

class Policy {
 public:
  const PomdpModel& model() const;
  SolverMode mode() const;

  Action act(const Belief& belief, int slot) const;
  // Immediate rewards from a slot-specific rate table (the device's own
  // channel knowledge); the continuation still uses the model's table.
  Action act(const Belief& belief, int slot, std::span<const RateRow> immediate) const;
  // Indexed by Action::code().
  std::vector<double> action_values(const Belief& belief, int slot,
                                    std::span<const RateRow> immediate = {}) const;
  double value(const Belief& belief, int slot) const;

  std::size_t alpha_count(int slot) const;  // exact mode only
  void dump(std::ostream& os) const;

 private:
  friend Policy solve(const PomdpModel&, const SolverOptions&);
  explicit Policy(std::shared_ptr<detail::PolicyImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::PolicyImpl> impl_;
};

Policy solve(const PomdpModel& model, const SolverOptions& options = {});
Action act(const Policy& policy, const Belief& belief, int slot);

}  // namespace m2msim
