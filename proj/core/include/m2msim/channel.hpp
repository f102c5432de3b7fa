#pragma once

#include <cstdint>
#include <span>

#include "m2msim/rng.hpp"

namespace m2msim {

enum class RbState : std::uint8_t { idle = 0, busy = 1 };

struct Timebase {
  double slot_duration = 1e-3;  // seconds
  int slots_per_period = 20;
  int periods = 30;

  double period_length() const { return slot_duration * slots_per_period; }
  void validate() const;

  friend bool operator==(const Timebase&, const Timebase&) = default;
};

class RbMarkov {
 public:
  RbMarkov(double p_idle_idle, double p_idle_busy, double p_busy_idle, double p_busy_busy);

  double p_idle_idle() const { return p_[0][0]; }
  double p_idle_busy() const { return p_[0][1]; }
  double p_busy_idle() const { return p_[1][0]; }
  double p_busy_busy() const { return p_[1][1]; }
  double prob(RbState from, RbState to) const;

  // Long-run fraction of time idle. For a chain that never leaves its
  // starting state this returns 1/2.
  double stationary_idle() const;
  // P(idle next) given P(idle now).
  double propagate_idle(double p_idle) const;

  RbState next(RbState from, double u) const;

  friend bool operator==(const RbMarkov&, const RbMarkov&) = default;

 private:
  double p_[2][2];
};

struct RadioParams {
  double bandwidth_hz = 10e6;
  double tx_power_w = 0.1;
  double noise_power_w = 0.01;

  void validate() const;
  friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

struct CellTopology {
  int total_rbs = 25;
  int access_rbs = 25;  // cap on the access phase
  int data_rbs = 0;
  int devices = 50;

  void validate() const;
  friend bool operator==(const CellTopology&, const CellTopology&) = default;
};

struct Interferer {
  double power_w;
  double gain;
};

RbState evolve_rb(RbState state, const RbMarkov& markov, Rng& rng);

// Power gain h = g^2 with g ~ N(0, 1).
double sample_gain(Rng& rng);

// Shannon rate in bit/s. An idle RB must come with an empty interferer set.
double rate(RbState state, double own_gain, std::span<const Interferer> interferers,
            const RadioParams& radio);

}  // namespace m2msim
