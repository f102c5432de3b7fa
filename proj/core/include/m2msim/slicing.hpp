#pragma once

#include <span>
#include <vector>

#include "m2msim/channel.hpp"

namespace m2msim {

struct VirtualNetwork {
  int id = 1;  // 1-based
  int devices = 1;
  int access_rbs = 1;  // initial R_l
  double weight = 1.0;
  double bandwidth_hz = 10e6;  // per RB

  friend bool operator==(const VirtualNetwork&, const VirtualNetwork&) = default;
};

void validate_slices(std::span<const VirtualNetwork> slices, const CellTopology& topology);

struct SliceMetrics {
  double obtained_rate = 0.0;  // C_l, bit/s
  double obtained_ratio = 0.0;
  double desired_ratio = 0.0;
  double gap = 0.0;

  friend bool operator==(const SliceMetrics&, const SliceMetrics&) = default;
};

struct RatioSet {
  std::vector<double> xi;
  std::vector<double> xi_star;
  std::vector<double> gap;
  bool degenerate = false;  // no traffic at all: xi set to 0
};

// Time average over a period of per-slot summed slice rates.
double period_average_rate(std::span<const double> slot_rates, const Timebase& timebase);

RatioSet ratios(std::span<const double> obtained, std::span<const double> weights);

std::vector<SliceMetrics> slice_metrics(std::span<const double> obtained, std::span<const double> weights);

}  // namespace m2msim
