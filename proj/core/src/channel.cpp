#include "m2msim/channel.hpp"

#include <cmath>
#include <random>
#include <string>

#include "m2msim/error.hpp"

namespace m2msim {

namespace {

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void Timebase::validate() const {
  if (!(slot_duration > 0.0)) throw ConfigError("timebase.slot_duration must be > 0");
  if (slots_per_period < 1) throw ConfigError("timebase.slots_per_period must be >= 1");
  if (periods < 1) throw ConfigError("timebase.periods must be >= 1");
}

RbMarkov::RbMarkov(double p_idle_idle, double p_idle_busy, double p_busy_idle,
                   double p_busy_busy)
    : p_{{p_idle_idle, p_idle_busy}, {p_busy_idle, p_busy_busy}} {
  for (int i = 0; i < 2; ++i) {
    const char* row = i == 0 ? "idle" : "busy";
    if (!is_prob(p_[i][0]) || !is_prob(p_[i][1]))
      throw ConfigError(std::string("rb_markov: ") + row + " row has an entry outside [0,1]");
    if (std::abs(p_[i][0] + p_[i][1] - 1.0) > 1e-12)
      throw ConfigError(std::string("rb_markov: ") + row + " row does not sum to 1");
  }
}

double RbMarkov::prob(RbState from, RbState to) const {
  return p_[static_cast<int>(from)][static_cast<int>(to)];
}

double RbMarkov::stationary_idle() const {
  const double leave = p_[0][1] + p_[1][0];
  if (leave == 0.0) return 0.5;
  return p_[1][0] / leave;
}

double RbMarkov::propagate_idle(double p_idle) const {
  return p_idle * p_[0][0] + (1.0 - p_idle) * p_[1][0];
}

RbState RbMarkov::next(RbState from, double u) const {
  return u < prob(from, RbState::idle) ? RbState::idle : RbState::busy;
}

void RadioParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("radio.bandwidth_hz must be > 0");
  if (!(tx_power_w >= 0.0)) throw ConfigError("radio.tx_power must be >= 0");
  if (!(noise_power_w > 0.0)) throw ConfigError("radio.noise_power_w must be > 0");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

void CellTopology::validate() const {
  if (access_rbs < 1) throw ConfigError("topology.access_rbs must be >= 1");
  if (data_rbs < 0) throw ConfigError("topology.data_rbs must be >= 0");
  if (access_rbs + data_rbs != total_rbs)
    throw ConfigError("topology: access_rbs + data_rbs must equal total_rbs");
  if (devices < 1) throw ConfigError("topology.devices must be >= 1");
}

RbState evolve_rb(RbState state, const RbMarkov& markov, Rng& rng) {
  return markov.next(state, uniform01(rng));
}

double sample_gain(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double x = g(rng);
  return x * x;
}

double rate(RbState state, double own_gain, std::span<const Interferer> interferers,
            const RadioParams& radio) {
  if (own_gain < 0.0) throw DomainError("rate: negative gain");
  if (radio.tx_power_w < 0.0) throw DomainError("rate: negative power");
  if (state == RbState::idle && !interferers.empty())
    throw DomainError("rate: idle RB with interferers");
  double interference = 0.0;
  for (const auto& i : interferers) {
    if (i.power_w < 0.0 || i.gain < 0.0) throw DomainError("rate: negative interferer term");
    interference += i.power_w * i.gain;
  }
  const double sinr = radio.tx_power_w * own_gain / (interference + radio.noise_power_w);
  return radio.bandwidth_hz * std::log2(1.0 + sinr);
}

}  // namespace m2msim
