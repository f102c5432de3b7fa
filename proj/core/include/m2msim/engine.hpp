#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "m2msim/channel.hpp"
#include "m2msim/controller.hpp"
#include "m2msim/pomdp.hpp"
#include "m2msim/slicing.hpp"

namespace m2msim {

enum class Scheme : std::uint8_t {
  pomdp,    // belief-based planner
  random,   // uniform RB, always access
  perfect,  // knows the true RB states and slot gains
};

enum class Contention : std::uint8_t {
  sinr,  // devices on one RB interfere with each other
  hard,  // two or more devices on one RB all get rate 0
  none,  // devices never interfere with each other
};

std::string to_string(Scheme s);
std::string to_string(Contention c);
Scheme parse_scheme(std::string_view s);
Contention parse_contention(std::string_view s);

struct ScenarioConfig {
  CellTopology topology;
  Timebase timebase;
  std::vector<VirtualNetwork> slices;
  RadioParams radio;  // bandwidth_hz is the default for slices
  RbMarkov rb_markov{0.9, 0.1, 0.95, 0.05};
  ObservationModel observation;
  double discount = 0.9;
  ControllerParams controller;
  bool controller_enabled = true;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::pomdp;
  Contention contention = Contention::sinr;
  SolverOptions solver;
  bool slot_csi = true;  // planners see this slot's gains on their own RBs
  bool record_slots = false;

  void validate() const;
  std::vector<double> weights() const;
  RadioParams slice_radio(int slice) const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// The five-slice reference scenario with every gap-filling default set.
ScenarioConfig paper_default_scenario();

struct SlotRecord {
  int period;  // 1-based
  int slot;    // 0-based
  int slice;   // 1-based
  int device;  // global, 0-based
  Action action = Action::sleep();
  int physical_rb = -1;
  RbState rb_state = RbState::idle;
  Reading observation = Reading::none;  // reading of the chosen RB after the transition
  double own_gain = 0.0;
  double interference_w = 0.0;
  double rate = 0.0;
  double reward = 0.0;

  friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

struct PeriodRecord {
  int period;  // 1-based
  int slice;   // 1-based
  SliceMetrics metrics;
  double filtered_rate;
  double delta_raw;
  int delta_applied;
  int access_rbs;  // R_l in effect during the period
  int data_rbs;    // data phase during the period
  bool degenerate;

  friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<PeriodRecord> periods;       // period-major, slice-minor
  std::vector<double> period_mean_reward;  // discounted reward per device, per period
  double mean_discounted_reward = 0.0;
  Allocation final_allocation;
  double final_max_abs_gap = 0.0;
  std::vector<SlotRecord> slots;  // only when record_slots

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  // Advance one slot of the current period.
  std::vector<SlotRecord> run_slot();
  // Finish the current period and apply the controller.
  std::vector<PeriodRecord> run_period();
  RunSummary run();

  int period() const;  // 1-based index of the period in progress
  int slot() const;
  bool done() const;
  const Allocation& allocation() const;
  const std::vector<RbState>& rb_states() const;
  const ScenarioConfig& config() const;

 private:
  struct State;
  std::unique_ptr<State> s_;
};

RunSummary run_simulation(const ScenarioConfig& config);

enum class SweepAxis : std::uint8_t { rbs, epsilon, beta, omega, mu, devices };

std::string to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view name);
ScenarioConfig apply_axis(ScenarioConfig config, SweepAxis axis, double value);

struct SweepRow {
  double axis_value;
  std::uint64_t seed;
  RunSummary summary;
};

// One run per (value, seed), value-major. Runs are independent and may use
// up to `threads` workers (0 = hardware concurrency).
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, SweepAxis axis, std::span<const double> values,
                                std::span<const std::uint64_t> seeds, unsigned threads = 0);

}  // namespace m2msim
