#include <doctest.h>

#include <cmath>
#include <m2msim/engine.hpp>
#include <m2msim/error.hpp>
#include <numeric>

using namespace m2msim;

namespace {

ScenarioConfig small(int periods = 4) {
  auto c = paper_default_scenario();
  c.timebase.periods = periods;
  return c;
}

// One slice, one RB that is always idle, `devices` devices.
ScenarioConfig lone_rb(int devices) {
  ScenarioConfig c;
  c.topology = {1, 1, 0, devices};
  c.timebase = {1e-3, 3, 2};
  c.slices = {{1, devices, 1, 1.0, 1e6}};
  c.radio = {1e6, 0.1, 0.01};
  c.rb_markov = RbMarkov(1.0, 0.0, 1.0, 0.0);
  c.controller_enabled = false;
  return c;
}

}  // namespace

TEST_CASE("one device on an idle RB gets the idle-branch rate") {
  Simulation sim(lone_rb(1));
  const auto recs = sim.run_slot();
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].action == Action::access(0));
  CHECK(recs[0].rb_state == RbState::idle);
  CHECK(recs[0].interference_w == 0.0);
  CHECK(recs[0].rate == doctest::Approx(1e6 * std::log2(1.0 + 0.1 * recs[0].own_gain / 0.01)));
  CHECK(recs[0].reward > 0.0);
}

TEST_CASE("two devices on one idle RB interfere through the busy branch") {
  for (auto scheme : {Scheme::pomdp, Scheme::random, Scheme::perfect}) {
    auto cfg = lone_rb(2);
    cfg.scheme = scheme;
    Simulation sim(cfg);
    const auto recs = sim.run_slot();
    REQUIRE(recs.size() == 2);
    for (int d = 0; d < 2; ++d) {
      const auto& me = recs[d];
      const auto& other = recs[1 - d];
      CHECK(me.physical_rb == 0);
      CHECK(me.interference_w == doctest::Approx(0.1 * other.own_gain));
      CHECK(me.rate == doctest::Approx(1e6 * std::log2(1.0 + 0.1 * me.own_gain / (0.1 * other.own_gain + 0.01))));
    }
  }
}

TEST_CASE("hard collisions zero the rate") {
  auto cfg = lone_rb(2);
  cfg.contention = Contention::hard;
  Simulation sim(cfg);
  for (const auto& r : sim.run_slot()) {
    CHECK(r.rate == 0.0);
    CHECK(r.reward == 0.0);
  }
}

TEST_CASE("sleeping devices earn nothing") {
  auto cfg = lone_rb(3);
  cfg.radio.tx_power_w = 0.0;  // every access pays 0, so the planner sleeps
  cfg.record_slots = true;
  const auto sum = run_simulation(cfg);
  for (const auto& r : sum.slots) {
    CHECK(r.action.is_sleep());
    CHECK(r.reward == 0.0);
  }
  for (const auto& p : sum.periods) {
    CHECK(p.metrics.obtained_rate == 0.0);
    CHECK(p.degenerate);
    CHECK(p.metrics.gap == doctest::Approx(p.metrics.desired_ratio));
  }
}

TEST_CASE("runs are deterministic") {
  auto cfg = small(3);
  cfg.record_slots = true;
  cfg.seed = 42;
  CHECK(run_simulation(cfg) == run_simulation(cfg));
  auto other = cfg;
  other.seed = 43;
  CHECK_FALSE(run_simulation(cfg) == run_simulation(other));
}

TEST_CASE("disabled controller keeps allocations fixed") {
  auto cfg = small(5);
  cfg.controller_enabled = false;
  const auto sum = run_simulation(cfg);
  for (const auto& p : sum.periods) {
    CHECK(p.access_rbs == 5);
    CHECK(p.delta_applied == 0);
  }
  CHECK(sum.final_allocation.access == std::vector<int>{5, 5, 5, 5, 5});
}

TEST_CASE("period accounting closes against slot records") {
  auto cfg = small(4);
  cfg.record_slots = true;
  const auto sum = run_simulation(cfg);
  const int slices = 5, k = cfg.timebase.slots_per_period;
  std::vector<double> c(4 * slices, 0.0);
  std::vector<double> reward(4, 0.0);
  for (const auto& r : sum.slots) {
    c[(r.period - 1) * slices + r.slice - 1] += r.rate / k;
    reward[r.period - 1] += slot_weight(r.slot, k, cfg.discount) * r.reward / cfg.topology.devices;
    CHECK((r.reward == 0.0) == (r.action.is_sleep() || r.rate == 0.0));
  }
  for (std::size_t i = 0; i < sum.periods.size(); ++i)
    CHECK(sum.periods[i].metrics.obtained_rate == doctest::Approx(c[i]).epsilon(1e-12));
  for (int y = 0; y < 4; ++y) CHECK(sum.period_mean_reward[y] == doctest::Approx(reward[y]).epsilon(1e-12));
}

TEST_CASE("conservation and zero-sum gaps every period") {
  for (auto seed : {1ULL, 2ULL, 3ULL}) {
    auto cfg = small(8);
    cfg.seed = seed;
    const auto sum = run_simulation(cfg);
    for (std::size_t i = 0; i < sum.periods.size(); i += 5) {
      int access = 0;
      double gaps = 0.0;
      for (int l = 0; l < 5; ++l) {
        access += sum.periods[i + l].access_rbs;
        gaps += sum.periods[i + l].metrics.gap;
      }
      CHECK(access + sum.periods[i].data_rbs == 25);
      CHECK(std::abs(gaps) < 1e-9);
    }
    CHECK(sum.final_allocation.access_total() + sum.final_allocation.data == 25);
  }
}

TEST_CASE("a single RB per slice leaves no decision to make") {
  for (auto seed : {5ULL, 6ULL}) {
    auto cfg = apply_axis(small(3), SweepAxis::rbs, 1);
    cfg.controller_enabled = false;
    cfg.seed = seed;
    auto rnd = cfg;
    rnd.scheme = Scheme::random;
    CHECK(run_simulation(cfg).mean_discounted_reward == run_simulation(rnd).mean_discounted_reward);
  }
}

TEST_CASE("without contention the omniscient baseline bounds the planner") {
  for (double eps : {0.1, 0.4}) {
    auto cfg = apply_axis(small(3), SweepAxis::epsilon, eps);
    cfg.contention = Contention::none;
    cfg.controller_enabled = false;
    auto perfect = cfg;
    perfect.scheme = Scheme::perfect;
    for (auto seed : {1ULL, 2ULL}) {
      cfg.seed = perfect.seed = seed;
      CHECK(run_simulation(perfect).mean_discounted_reward >= run_simulation(cfg).mean_discounted_reward);
    }
  }
}

TEST_CASE("without contention reward falls as sensing gets noisier") {
  // An isolated device per slice, one-sided misreads, paired seeds.
  auto base = small(6);
  base.contention = Contention::none;
  base.controller_enabled = false;
  base.observation.law = SensingLaw::busy_as_idle;
  base.slot_csi = false;
  std::vector<double> eps{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  const auto rows = run_sweep(base, SweepAxis::epsilon, eps, seeds, 1);
  std::vector<double> mean(eps.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) mean[i / seeds.size()] += rows[i].summary.mean_discounted_reward;
  for (std::size_t i = 1; i < mean.size(); ++i) CHECK(mean[i] <= mean[i - 1]);
}

TEST_CASE("sweeps") {
  auto base = small(2);
  const std::vector<double> eps{0.1, 0.2, 0.3};
  const std::vector<std::uint64_t> seeds{7, 8};
  const auto rows = run_sweep(base, SweepAxis::epsilon, eps, seeds, 2);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].axis_value == 0.1);
  CHECK(rows[1].seed == 8);
  CHECK(rows[5].axis_value == 0.3);
  auto serial = run_sweep(base, SweepAxis::epsilon, eps, seeds, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].summary == serial[i].summary);
  CHECK(run_sweep(base, SweepAxis::beta, std::vector<double>{}, seeds).empty());
  CHECK_THROWS_WITH_AS(parse_axis("bogus"), doctest::Contains("rbs, epsilon, beta, omega, mu, devices"),
                       ConfigError);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::rbs, 6), ConfigError);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::epsilon, 1.5), ConfigError);
}

TEST_CASE("devices axis scales slices proportionally") {
  const auto c = apply_axis(paper_default_scenario(), SweepAxis::devices, 100);
  std::vector<int> n;
  for (const auto& s : c.slices) n.push_back(s.devices);
  CHECK(n == std::vector<int>{60, 10, 10, 10, 10});
  const auto d = apply_axis(paper_default_scenario(), SweepAxis::devices, 7);
  int total = 0;
  for (const auto& s : d.slices) {
    CHECK(s.devices >= 1);
    total += s.devices;
  }
  CHECK(total == 7);
}

TEST_CASE("step-by-step driving matches a full run") {
  auto cfg = small(2);
  Simulation sim(cfg);
  CHECK(sim.period() == 1);
  sim.run_slot();
  CHECK(sim.slot() == 1);
  const auto first = sim.run_period();
  CHECK(first.size() == 5);
  CHECK(sim.period() == 2);
  const auto whole = run_simulation(cfg);
  for (int l = 0; l < 5; ++l) CHECK(first[l] == whole.periods[l]);
  sim.run_period();
  CHECK(sim.done());
  CHECK_THROWS_AS(sim.run_slot(), DomainError);
}

TEST_CASE("configuration errors surface before simulating") {
  auto cfg = small(2);
  cfg.slices[0].devices = 29;
  CHECK_THROWS_AS(Simulation{cfg}, ConfigError);
  cfg = small(2);
  cfg.discount = 1.5;
  CHECK_THROWS_AS(Simulation{cfg}, ConfigError);
  cfg = small(2);
  cfg.observation.epsilon = 0.3;
  CHECK_THROWS_WITH_AS(Simulation{cfg}, doctest::Contains("observation.phi"), ConfigError);
}
