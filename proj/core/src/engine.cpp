#include "m2msim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "m2msim/error.hpp"
#include "m2msim/rng.hpp"

namespace m2msim {

namespace {

enum Stream : std::uint64_t { initial_states = 0, gains = 1, readings = 2, choices = 3, transitions = 4 };

template <class E>
E parse_enum(std::string_view s, std::initializer_list<std::pair<std::string_view, E>> table, const char* what) {
  std::string valid;
  for (const auto& [name, v] : table) {
    if (name == s) return v;
    valid += valid.empty() ? "" : ", ";
    valid += name;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "' (valid: " + valid + ")");
}

RateRow mean_gain_row(const RadioParams& radio) {
  // One background interferer of unit mean gain when the RB is busy.
  const double p = radio.tx_power_w, n0 = radio.noise_power_w, b = radio.bandwidth_hz;
  return {b * std::log2(1.0 + p / n0), b * std::log2(1.0 + p / (p + n0))};
}

RateRow gain_row(const RadioParams& radio, double h) {
  const double p = radio.tx_power_w, n0 = radio.noise_power_w, b = radio.bandwidth_hz;
  return {b * std::log2(1.0 + p * h / n0), b * std::log2(1.0 + p * h / (p + n0))};
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::pomdp: return "pomdp";
    case Scheme::random: return "random";
    case Scheme::perfect: return "perfect";
  }
  return "?";
}

std::string to_string(Contention c) {
  switch (c) {
    case Contention::sinr: return "sinr";
    case Contention::hard: return "hard";
    case Contention::none: return "none";
  }
  return "?";
}

Scheme parse_scheme(std::string_view s) {
  return parse_enum<Scheme>(s, {{"pomdp", Scheme::pomdp}, {"random", Scheme::random}, {"perfect", Scheme::perfect}},
                            "scheme");
}

Contention parse_contention(std::string_view s) {
  return parse_enum<Contention>(
      s, {{"sinr", Contention::sinr}, {"hard", Contention::hard}, {"none", Contention::none}}, "contention");
}

void ScenarioConfig::validate() const {
  topology.validate();
  timebase.validate();
  radio.validate();
  validate_slices(slices, topology);
  if (topology.total_rbs < static_cast<int>(slices.size()))
    throw ConfigError("topology.total_rbs must be at least the number of slices");
  observation.validate();
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must be in [0,1]");
  controller.validate();
  solver.validate();
}

std::vector<double> ScenarioConfig::weights() const {
  std::vector<double> w;
  for (const auto& s : slices) w.push_back(s.weight);
  return w;
}

RadioParams ScenarioConfig::slice_radio(int slice) const {
  RadioParams r = radio;
  r.bandwidth_hz = slices.at(slice).bandwidth_hz;
  return r;
}

ScenarioConfig paper_default_scenario() {
  ScenarioConfig c;
  c.topology = {25, 25, 0, 50};
  c.timebase = {1e-3, 20, 30};
  c.slices = {{1, 30, 5, 3.0, 10e6}, {2, 5, 5, 1.5, 7.5e6}, {3, 5, 5, 1.5, 7.5e6}, {4, 5, 5, 1.5, 7.5e6},
              {5, 5, 5, 1.0, 5e6}};
  c.radio = {10e6, dbm_to_watt(20.0), 0.01};
  c.observation = {0.1, 0.1, SensingLaw::symmetric, true, true};
  return c;
}

struct Simulation::State {
  ScenarioConfig cfg;
  int slices = 0;
  Allocation alloc;
  std::vector<int> offset;
  std::vector<RbState> states;

  struct Device {
    int slice;
    int local;  // index within its slice
    std::vector<double> belief;
  };
  std::vector<Device> devices;
  std::vector<std::map<int, Policy>> policy_cache;  // per slice, keyed by R_l
  std::vector<RateRow> mean_rows;
  std::optional<Controller> controller;

  int period = 1;
  int slot = 0;
  std::vector<std::vector<double>> slot_rate;  // [slice][slot]
  std::vector<double> device_reward;
  RunSummary summary;

  const Policy& policy(int l) {
    const int r = alloc.access[l];
    auto it = policy_cache[l].find(r);
    if (it == policy_cache[l].end()) {
      PomdpModel m{cfg.rb_markov, cfg.observation, cfg.timebase.slots_per_period, cfg.discount,
                   std::vector<RateRow>(r, mean_rows[l])};
      it = policy_cache[l].emplace(r, solve(m, cfg.solver)).first;
    }
    return it->second;
  }

  void layout() {
    offset.assign(slices, 0);
    for (int l = 1; l < slices; ++l) offset[l] = offset[l - 1] + alloc.access[l - 1];
  }
};

Simulation::Simulation(ScenarioConfig config) : s_(std::make_unique<State>()) {
  config.validate();
  auto& s = *s_;
  s.cfg = std::move(config);
  const auto& c = s.cfg;
  s.slices = static_cast<int>(c.slices.size());
  for (const auto& sl : c.slices) s.alloc.access.push_back(sl.access_rbs);
  s.alloc.data = c.topology.total_rbs - s.alloc.access_total();
  s.layout();

  auto rng = make_rng(c.seed, {initial_states});
  const double pi0 = c.rb_markov.stationary_idle();
  s.states.resize(c.topology.total_rbs);
  for (auto& st : s.states) st = uniform01(rng) < pi0 ? RbState::idle : RbState::busy;

  for (int l = 0; l < s.slices; ++l)
    for (int n = 0; n < c.slices[l].devices; ++n)
      s.devices.push_back({l, n, stationary_belief(s.alloc.access[l], c.rb_markov)});

  s.policy_cache.resize(s.slices);
  for (int l = 0; l < s.slices; ++l) s.mean_rows.push_back(mean_gain_row(c.slice_radio(l)));
  if (c.scheme == Scheme::pomdp)
    for (int l = 0; l < s.slices; ++l) s.policy(l);
  if (c.controller_enabled) s.controller.emplace(c.controller, c.weights(), s.alloc, c.topology);

  s.slot_rate.assign(s.slices, std::vector<double>(c.timebase.slots_per_period, 0.0));
  s.device_reward.assign(s.devices.size(), 0.0);
  s.summary.seed = c.seed;
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

int Simulation::period() const { return s_->period; }
int Simulation::slot() const { return s_->slot; }
bool Simulation::done() const { return s_->period > s_->cfg.timebase.periods; }
const Allocation& Simulation::allocation() const { return s_->alloc; }
const std::vector<RbState>& Simulation::rb_states() const { return s_->states; }
const ScenarioConfig& Simulation::config() const { return s_->cfg; }

std::vector<SlotRecord> Simulation::run_slot() {
  if (done()) throw DomainError("run_slot: simulation already finished");
  auto& s = *s_;
  const auto& c = s.cfg;
  const int y = s.period, k = s.slot;
  const std::size_t nd = s.devices.size();
  const int nrb = c.topology.total_rbs;
  const auto yy = static_cast<std::uint64_t>(y), kk = static_cast<std::uint64_t>(k);

  // Every stream draws the same amount regardless of decisions, so schemes
  // run with one seed see the same channel.
  std::vector<double> gain(nd * nrb), bg(nrb);
  {
    auto rng = make_rng(c.seed, {gains, yy, kk});
    for (auto& g : gain) g = sample_gain(rng);
    for (auto& g : bg) g = sample_gain(rng);
  }
  std::vector<double> u_choice(nd);
  {
    auto rng = make_rng(c.seed, {choices, yy, kk});
    for (auto& u : u_choice) u = uniform01(rng);
  }
  auto h = [&](std::size_t d, int rb) { return gain[d * nrb + rb]; };

  std::vector<Action> action(nd, Action::sleep());
  std::vector<int> phys(nd, -1);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto& dev = s.devices[d];
    const int l = dev.slice;
    const int r = s.alloc.access[l];
    const int off = s.offset[l];
    const RadioParams radio = c.slice_radio(l);
    auto slice_rb = [&](int i) { return (i + dev.local) % r; };  // device-specific tie order
    int local = -1;
    switch (c.scheme) {
      case Scheme::pomdp: {
        Belief b(r);
        std::vector<RateRow> rows;
        for (int i = 0; i < r; ++i) b[i] = dev.belief[slice_rb(i)];
        if (c.slot_csi)
          for (int i = 0; i < r; ++i) rows.push_back(gain_row(radio, h(d, off + slice_rb(i))));
        const Action a = s.policy(l).act(b, k, rows);
        if (!a.is_sleep()) local = slice_rb(a.rb());
        break;
      }
      case Scheme::random:
        local = std::min(r - 1, static_cast<int>(u_choice[d] * r));
        break;
      case Scheme::perfect: {
        std::vector<double> v(r);
        for (int i = 0; i < r; ++i) {
          const int rb = off + slice_rb(i);
          const RateRow row = c.slot_csi ? gain_row(radio, h(d, rb)) : s.mean_rows[l];
          v[i] = s.states[rb] == RbState::idle ? row.idle : row.busy;
        }
        const double best = best_rb_reward(v);
        for (int i = 0; i < r && local < 0; ++i)
          if (v[i] >= best) local = slice_rb(i);
        break;
      }
    }
    if (local >= 0) {
      action[d] = Action::access(local);
      phys[d] = off + local;
    }
  }

  std::vector<std::vector<std::size_t>> users(nrb);
  for (std::size_t d = 0; d < nd; ++d)
    if (phys[d] >= 0) users[phys[d]].push_back(d);

  std::vector<SlotRecord> out(nd);
  const double w = slot_weight(k, c.timebase.slots_per_period, c.discount);
  for (std::size_t d = 0; d < nd; ++d) {
    auto& rec = out[d];
    const int l = s.devices[d].slice;
    rec.period = y;
    rec.slot = k;
    rec.slice = l + 1;
    rec.device = static_cast<int>(d);
    rec.action = action[d];
    rec.physical_rb = phys[d];
    if (phys[d] < 0) continue;
    const int rb = phys[d];
    rec.rb_state = s.states[rb];
    rec.own_gain = h(d, rb);
    std::vector<Interferer> itf;
    const double p = c.radio.tx_power_w;
    if (c.contention == Contention::sinr)
      for (auto o : users[rb])
        if (o != d) itf.push_back({p, h(o, rb)});
    if (s.states[rb] == RbState::busy) itf.push_back({p, bg[rb]});
    for (const auto& i : itf) rec.interference_w += i.power_w * i.gain;
    if (c.contention == Contention::hard && users[rb].size() > 1) {
      rec.rate = 0.0;
    } else {
      rec.rate = rate(itf.empty() ? RbState::idle : RbState::busy, rec.own_gain, itf, c.slice_radio(l));
    }
    rec.reward = immediate_reward(action[d], rec.rate);
    s.device_reward[d] += w * rec.reward;
    s.slot_rate[l][k] += rec.rate;
  }

  {
    auto rng = make_rng(c.seed, {transitions, yy, kk});
    for (auto& st : s.states) st = c.rb_markov.next(st, uniform01(rng));
  }

  {
    auto rng = make_rng(c.seed, {readings, yy, kk});
    std::vector<double> u(nd * nrb);
    for (auto& x : u) x = uniform01(rng);
    const auto& om = c.observation;
    for (std::size_t d = 0; d < nd; ++d) {
      auto& dev = s.devices[d];
      const int l = dev.slice;
      const int r = s.alloc.access[l];
      const int off = s.offset[l];
      Observation obs(r, Reading::none);
      for (int i = 0; i < r; ++i)
        if (om.observes(action[d], i))
          obs[i] = read_rb(s.states[off + i], om.noise(action[d], i), om.law, u[d * nrb + off + i]);
      if (!action[d].is_sleep()) out[d].observation = obs[action[d].rb()];
      if (c.scheme == Scheme::pomdp)
        dev.belief = belief_update_or_propagate(dev.belief, action[d], obs, c.rb_markov, om);
    }
  }

  if (c.record_slots) s.summary.slots.insert(s.summary.slots.end(), out.begin(), out.end());
  ++s.slot;
  return out;
}

std::vector<PeriodRecord> Simulation::run_period() {
  if (done()) throw DomainError("run_period: simulation already finished");
  auto& s = *s_;
  const auto& c = s.cfg;
  while (s.slot < c.timebase.slots_per_period) run_slot();

  std::vector<double> obtained(s.slices);
  for (int l = 0; l < s.slices; ++l) obtained[l] = period_average_rate(s.slot_rate[l], c.timebase);
  const auto weights = c.weights();
  const auto ratio = ratios(obtained, weights);
  const Allocation during = s.alloc;

  std::vector<double> filtered = obtained, delta_raw(s.slices, 0.0);
  std::vector<int> applied(s.slices, 0);
  if (s.controller) {
    const auto t = s.controller->tick(obtained);
    filtered = t.filtered;
    delta_raw = t.delta_raw;
    applied = t.step.applied;
    s.alloc = t.step.next;
  }

  std::vector<PeriodRecord> out;
  for (int l = 0; l < s.slices; ++l)
    out.push_back({s.period, l + 1, {obtained[l], ratio.xi[l], ratio.xi_star[l], ratio.gap[l]}, filtered[l],
                   delta_raw[l], applied[l], during.access[l], during.data, ratio.degenerate});
  s.summary.periods.insert(s.summary.periods.end(), out.begin(), out.end());
  s.summary.period_mean_reward.push_back(
      std::accumulate(s.device_reward.begin(), s.device_reward.end(), 0.0) / static_cast<double>(s.devices.size()));

  if (s.alloc != during) {
    const auto old_offset = s.offset;
    s.layout();
    const double pi0 = c.rb_markov.stationary_idle();
    for (auto& dev : s.devices) {
      const int l = dev.slice;
      std::vector<double> b(s.alloc.access[l], pi0);
      for (int i = 0; i < s.alloc.access[l]; ++i) {
        const int j = s.offset[l] + i - old_offset[l];
        if (j >= 0 && j < during.access[l]) b[i] = dev.belief[j];
      }
      dev.belief = std::move(b);
    }
    if (c.scheme == Scheme::pomdp)
      for (int l = 0; l < s.slices; ++l) s.policy(l);
  }

  for (auto& v : s.slot_rate) std::fill(v.begin(), v.end(), 0.0);
  std::fill(s.device_reward.begin(), s.device_reward.end(), 0.0);
  s.slot = 0;
  ++s.period;
  return out;
}

RunSummary Simulation::run() {
  while (!done()) run_period();
  auto& s = *s_;
  auto& sum = s.summary;
  const auto& pr = sum.period_mean_reward;
  sum.mean_discounted_reward = std::accumulate(pr.begin(), pr.end(), 0.0) / static_cast<double>(pr.size());
  sum.final_allocation = s.alloc;
  sum.final_max_abs_gap = 0.0;
  for (std::size_t i = sum.periods.size() - s.slices; i < sum.periods.size(); ++i)
    sum.final_max_abs_gap = std::max(sum.final_max_abs_gap, std::abs(sum.periods[i].metrics.gap));
  return sum;
}

RunSummary run_simulation(const ScenarioConfig& config) { return Simulation(config).run(); }

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::rbs: return "rbs";
    case SweepAxis::epsilon: return "epsilon";
    case SweepAxis::beta: return "beta";
    case SweepAxis::omega: return "omega";
    case SweepAxis::mu: return "mu";
    case SweepAxis::devices: return "devices";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  return parse_enum<SweepAxis>(name,
                               {{"rbs", SweepAxis::rbs},
                                {"epsilon", SweepAxis::epsilon},
                                {"beta", SweepAxis::beta},
                                {"omega", SweepAxis::omega},
                                {"mu", SweepAxis::mu},
                                {"devices", SweepAxis::devices}},
                               "axis");
}

namespace {

int as_count(double v, const char* axis) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e6)
    throw ConfigError(std::string("axis ") + axis + ": value must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

ScenarioConfig apply_axis(ScenarioConfig c, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::rbs: {
      const int b = as_count(value, "rbs");
      for (auto& s : c.slices) s.access_rbs = b;
      break;
    }
    case SweepAxis::epsilon:
      c.observation.epsilon = value;
      if (c.observation.tie_phi_to_epsilon) c.observation.phi = value;
      break;
    case SweepAxis::beta: c.discount = value; break;
    case SweepAxis::omega: c.controller.omega = value; break;
    case SweepAxis::mu: c.controller.mu = value; break;
    case SweepAxis::devices: {
      const int n = as_count(value, "devices");
      const int old = c.topology.devices;
      const int ns = static_cast<int>(c.slices.size());
      if (n < ns) throw ConfigError("axis devices: need at least one device per slice");
      // Largest-remainder scaling of the slice sizes, at least one each.
      std::vector<int> share(ns);
      std::vector<long long> rem(ns);
      int given = 0;
      for (int l = 0; l < ns; ++l) {
        const long long num = static_cast<long long>(c.slices[l].devices) * n;
        share[l] = std::max(1, static_cast<int>(num / old));
        rem[l] = num % old;
        given += share[l];
      }
      std::vector<int> order(ns);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
      for (int i = 0; given < n; i = (i + 1) % ns, ++given) ++share[order[i]];
      while (given > n) {
        const auto big = std::max_element(share.begin(), share.end()) - share.begin();
        --share[big];
        --given;
      }
      for (int l = 0; l < ns; ++l) c.slices[l].devices = share[l];
      c.topology.devices = n;
      break;
    }
  }
  c.validate();
  return c;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, SweepAxis axis, std::span<const double> values,
                                std::span<const std::uint64_t> seeds, unsigned threads) {
  std::vector<ScenarioConfig> jobs;
  std::vector<SweepRow> rows;
  for (double v : values) {
    const auto cfg = apply_axis(base, axis, v);
    for (auto seed : seeds) {
      jobs.push_back(cfg);
      jobs.back().seed = seed;
      rows.push_back({v, seed, {}});
    }
  }
  if (jobs.empty()) return rows;
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        rows[i].summary = run_simulation(jobs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace m2msim
