#include "m2msim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "m2msim/error.hpp"

namespace m2msim {

void ControllerParams::validate() const {
  if (!(omega > 0.0 && omega < 1.0)) throw ConfigError("controller.omega must be in (0,1)");
  if (!(mu > 0.0)) throw ConfigError("controller.mu must be > 0");
  if (!(rate_unit_bps > 0.0)) throw ConfigError("controller.rate_unit_bps must be > 0");
}

double smooth(double q_prev, double c_now, double omega) { return omega * q_prev + (1.0 - omega) * c_now; }

double delta_rbs(double e_now, double e_prev, double q_sum, const ControllerParams& params) {
  return q_sum / (params.mu * (1.0 - params.omega)) * (e_now - params.omega * e_prev);
}

int Allocation::access_total() const { return std::accumulate(access.begin(), access.end(), 0); }

AllocationStep apply_allocation(const Allocation& prev, std::span<const double> deltas,
                                const CellTopology& topology) {
  const int n = static_cast<int>(prev.access.size());
  if (topology.total_rbs < n)
    throw ConfigError("topology.total_rbs (" + std::to_string(topology.total_rbs) + ") is below the slice count");
  if (static_cast<int>(deltas.size()) != n) throw DomainError("apply_allocation: one delta per slice required");
  const int cap = topology.access_rbs;
  if (prev.access_total() + prev.data != topology.total_rbs || prev.access_total() > cap ||
      std::any_of(prev.access.begin(), prev.access.end(), [](int r) { return r < 1; }))
    throw DomainError("apply_allocation: previous allocation is infeasible");

  AllocationStep out;
  out.next = prev;
  auto& r = out.next.access;
  std::vector<int> inc(n, 0);
  for (int l = 0; l < n; ++l) {
    const double d = std::round(deltas[l]);  // halves away from zero
    const double target = std::clamp(static_cast<double>(r[l]) + d, 1.0, static_cast<double>(cap));
    const int t = static_cast<int>(target);
    if (t < r[l]) {
      out.next.data += r[l] - t;
      r[l] = t;
    } else {
      inc[l] = t - r[l];
    }
  }
  const int wanted = std::accumulate(inc.begin(), inc.end(), 0);
  const int avail = std::min(out.next.data, cap - out.next.access_total());
  if (wanted > avail) {
    out.trimmed = true;
    std::vector<int> grant(n);
    std::vector<long long> rem(n);
    int given = 0;
    for (int l = 0; l < n; ++l) {
      const long long num = static_cast<long long>(inc[l]) * avail;
      grant[l] = static_cast<int>(num / wanted);
      rem[l] = num % wanted;
      given += grant[l];
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (int i = 0; given < avail && i < n; ++i) {
      if (rem[order[i]] == 0) break;
      ++grant[order[i]];
      ++given;
    }
    inc = grant;
  }
  for (int l = 0; l < n; ++l) {
    r[l] += inc[l];
    out.next.data -= inc[l];
  }
  out.applied.resize(n);
  for (int l = 0; l < n; ++l) out.applied[l] = r[l] - prev.access[l];
  return out;
}

Controller::Controller(ControllerParams params, std::vector<double> weights, Allocation initial,
                       CellTopology topology)
    : params_(params), allocation_(std::move(initial)), topology_(topology) {
  params_.validate();
  if (weights.size() != allocation_.access.size())
    throw ConfigError("controller: one weight per slice required");
  const double x_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double x : weights) desired_.push_back(x / x_sum);
}

ControllerTick Controller::tick(std::span<const double> obtained_rates) {
  const std::size_t n = desired_.size();
  if (obtained_rates.size() != n) throw DomainError("controller: one rate per slice required");
  ControllerTick out;
  if (!started_) {
    filtered_.assign(obtained_rates.begin(), obtained_rates.end());
    prev_gap_.assign(n, 0.0);
    started_ = true;
    out.warmup = true;
    out.filtered = filtered_;
    out.control_gap.assign(n, 0.0);
    out.delta_raw.assign(n, 0.0);
    out.step = AllocationStep{allocation_, std::vector<int>(n, 0), false};
    return out;
  }
  for (std::size_t l = 0; l < n; ++l) filtered_[l] = smooth(filtered_[l], obtained_rates[l], params_.omega);
  const double q_sum = std::accumulate(filtered_.begin(), filtered_.end(), 0.0);
  out.control_gap.resize(n);
  out.delta_raw.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double xi = q_sum > 0.0 ? filtered_[l] / q_sum : 0.0;
    out.control_gap[l] = desired_[l] - xi;
    out.delta_raw[l] = delta_rbs(out.control_gap[l], prev_gap_[l], q_sum / params_.rate_unit_bps, params_);
  }
  out.step = apply_allocation(allocation_, out.delta_raw, topology_);
  allocation_ = out.step.next;
  prev_gap_ = out.control_gap;
  out.filtered = filtered_;
  return out;
}

std::vector<std::vector<double>> closed_loop_reference(const ControllerParams& params,
                                                       const LinearLoopScenario& scenario) {
  params.validate();
  const std::size_t n = scenario.initial_rates.size();
  std::vector<double> c = scenario.initial_rates;
  std::vector<double> q = c;
  std::vector<double> e_prev(n, 0.0);
  std::vector<std::vector<double>> xi_out;
  for (const auto& target : scenario.targets) {
    if (target.size() != n) throw DomainError("closed_loop_reference: target length mismatch");
    const double q_sum = std::accumulate(q.begin(), q.end(), 0.0);
    std::vector<double> xi(n);
    for (std::size_t l = 0; l < n; ++l) xi[l] = q[l] / q_sum;
    for (std::size_t l = 0; l < n; ++l) {
      const double e = target[l] - xi[l];
      c[l] += scenario.plant_mu * delta_rbs(e, e_prev[l], q_sum, params);
      e_prev[l] = e;
    }
    for (std::size_t l = 0; l < n; ++l) q[l] = smooth(q[l], c[l], params.omega);
    xi_out.push_back(std::move(xi));
  }
  return xi_out;
}

}  // namespace m2msim
