#pragma once

#include <span>
#include <vector>

#include "m2msim/channel.hpp"

namespace m2msim {

struct ControllerParams {
  double omega = 0.8;
  double mu = 2.0;
  // Rates enter the adjustment law in these units (bit/s per unit).
  double rate_unit_bps = 1e7;

  void validate() const;
  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

double smooth(double q_prev, double c_now, double omega);
double delta_rbs(double e_now, double e_prev, double q_sum, const ControllerParams& params);

struct Allocation {
  std::vector<int> access;  // R_l per slice
  int data = 0;             // data-phase RBs

  int access_total() const;
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct AllocationStep {
  Allocation next;
  std::vector<int> applied;  // R_l[new] - R_l[old]
  bool trimmed = false;      // increases were cut to fit the pool or the access cap
};

// Round, clamp to [1, R], release decreases to the data phase, then grant
// increases from it while the access phase stays within its cap.
AllocationStep apply_allocation(const Allocation& prev, std::span<const double> deltas,
                                const CellTopology& topology);

struct ControllerTick {
  std::vector<double> filtered;   // Q_l
  std::vector<double> control_gap;
  std::vector<double> delta_raw;  // real-valued δR_l
  AllocationStep step;
  bool warmup = false;
};

// Per-period feedback loop. The first tick only initializes the filter.
class Controller {
 public:
  Controller(ControllerParams params, std::vector<double> weights, Allocation initial,
             CellTopology topology);

  ControllerTick tick(std::span<const double> obtained_rates);
  const Allocation& allocation() const { return allocation_; }
  const std::vector<double>& filtered() const { return filtered_; }

 private:
  ControllerParams params_;
  std::vector<double> desired_;
  Allocation allocation_;
  CellTopology topology_;
  std::vector<double> filtered_;
  std::vector<double> prev_gap_;
  bool started_ = false;
};

// Linear plant C[y+1] = C[y] + mu_plant * δR[y] with real-valued δR and no
// clamping. Returns xi[y] = Q/ΣQ for every period y.
struct LinearLoopScenario {
  std::vector<double> initial_rates;             // C[0], already in controller units
  std::vector<std::vector<double>> targets;      // xi'[y] per period
  double plant_mu = 2.0;
};

std::vector<std::vector<double>> closed_loop_reference(const ControllerParams& params,
                                                       const LinearLoopScenario& scenario);

}  // namespace m2msim
