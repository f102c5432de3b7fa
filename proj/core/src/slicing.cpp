#include "m2msim/slicing.hpp"

#include <string>

#include "m2msim/error.hpp"

namespace m2msim {

void validate_slices(std::span<const VirtualNetwork> slices, const CellTopology& topology) {
  if (slices.empty()) throw ConfigError("slices: at least one slice is required");
  int devices = 0;
  int access = 0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    const std::string at = "slices[" + std::to_string(i) + "]";
    if (s.id != static_cast<int>(i) + 1) throw ConfigError(at + ".id must be " + std::to_string(i + 1));
    if (s.devices < 1 || s.devices > topology.devices)
      throw ConfigError(at + ".devices must be in [1, topology.devices]");
    if (s.access_rbs < 1 || s.access_rbs > topology.access_rbs)
      throw ConfigError(at + ".access_rbs must be in [1, topology.access_rbs]");
    if (!(s.weight > 0.0)) throw ConfigError(at + ".weight must be > 0");
    if (!(s.bandwidth_hz > 0.0)) throw ConfigError(at + ".bandwidth_hz must be > 0");
    if (i > 0 && s.weight > slices[i - 1].weight)
      throw ConfigError(at + ".weight must not exceed the previous slice's weight");
    devices += s.devices;
    access += s.access_rbs;
  }
  if (devices != topology.devices) throw ConfigError("slices: device counts must sum to topology.devices");
  if (access > topology.access_rbs) throw ConfigError("slices: access_rbs must sum to at most topology.access_rbs");
}

double period_average_rate(std::span<const double> slot_rates, const Timebase& timebase) {
  if (static_cast<int>(slot_rates.size()) != timebase.slots_per_period)
    throw DomainError("period_average_rate: expected " + std::to_string(timebase.slots_per_period) +
                      " slots, got " + std::to_string(slot_rates.size()));
  double sum = 0.0;
  for (double r : slot_rates) sum += r * timebase.slot_duration;
  return sum / timebase.period_length();
}

RatioSet ratios(std::span<const double> obtained, std::span<const double> weights) {
  if (obtained.empty() || obtained.size() != weights.size())
    throw DomainError("ratios: obtained and weight vectors must be non-empty and equal length");
  const std::size_t n = obtained.size();
  double c_sum = 0.0, x_sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    if (!(weights[l] > 0.0)) throw DomainError("ratios: weights must be > 0");
    if (!(obtained[l] >= 0.0)) throw DomainError("ratios: obtained rates must be >= 0");
    c_sum += obtained[l];
    x_sum += weights[l];
  }
  RatioSet out;
  out.xi.resize(n);
  out.xi_star.resize(n);
  out.gap.resize(n);
  out.degenerate = !(c_sum > 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    out.xi[l] = out.degenerate ? 0.0 : obtained[l] / c_sum;
    out.xi_star[l] = weights[l] / x_sum;
    out.gap[l] = out.xi_star[l] - out.xi[l];
  }
  return out;
}

std::vector<SliceMetrics> slice_metrics(std::span<const double> obtained, std::span<const double> weights) {
  const auto r = ratios(obtained, weights);
  std::vector<SliceMetrics> out(obtained.size());
  for (std::size_t l = 0; l < out.size(); ++l)
    out[l] = {obtained[l], r.xi[l], r.xi_star[l], r.gap[l]};
  return out;
}

}  // namespace m2msim
