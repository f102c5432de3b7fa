#include <doctest.h>

#include <cmath>
#include <m2msim/error.hpp>
#include <m2msim/pomdp.hpp>
#include <sstream>

#include "oracle.hpp"

using namespace m2msim;

namespace {

const RbMarkov paper_chain(0.9, 0.1, 0.95, 0.05);

ObservationModel noise(double eps, SensingLaw law = SensingLaw::symmetric) {
  ObservationModel o;
  o.epsilon = o.phi = eps;
  o.law = law;
  return o;
}

PomdpModel model(int k, double beta, double eps, std::vector<RateRow> rows,
                 SensingLaw law = SensingLaw::symmetric) {
  return {paper_chain, noise(eps, law), k, beta, std::move(rows)};
}

SolverOptions exact() {
  SolverOptions o;
  o.mode = SolverMode::exact;
  return o;
}

SolverOptions grid(int res) {
  SolverOptions o;
  o.mode = SolverMode::grid;
  o.grid_resolution = res;
  return o;
}

}  // namespace

TEST_CASE("observe follows the misread law") {
  Rng rng = make_rng(1);
  const Action a = Action::access(0);
  for (int i = 0; i < 200; ++i) CHECK(observe(RbState::idle, a, 0, noise(0.0), rng) == Reading::idle);
  for (int i = 0; i < 200; ++i) CHECK(observe(RbState::idle, a, 0, noise(1.0), rng) == Reading::busy);
  int idle = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) idle += observe(RbState::idle, a, 0, noise(0.3), rng) == Reading::idle;
  CHECK(std::abs(idle / double(n) - 0.7) < 0.01);

  // One-sided law: an idle RB is never misread; a busy one reads idle w.p. epsilon.
  for (int i = 0; i < 200; ++i)
    CHECK(observe(RbState::idle, a, 0, noise(0.9, SensingLaw::busy_as_idle), rng) == Reading::idle);
  idle = 0;
  for (int i = 0; i < n; ++i)
    idle += observe(RbState::busy, a, 0, noise(0.3, SensingLaw::busy_as_idle), rng) == Reading::idle;
  CHECK(std::abs(idle / double(n) - 0.3) < 0.01);
}

TEST_CASE("observe respects the sensing scope") {
  Rng rng = make_rng(2);
  ObservationModel o = noise(0.0);
  o.broadcast_sensing = false;
  CHECK(observe(RbState::busy, Action::access(0), 1, o, rng) == Reading::none);
  CHECK(observe(RbState::busy, Action::sleep(), 0, o, rng) == Reading::none);
  CHECK(observe(RbState::busy, Action::access(1), 1, o, rng) == Reading::busy);
  o.broadcast_sensing = true;
  CHECK(observe(RbState::busy, Action::sleep(), 0, o, rng) == Reading::busy);
}

TEST_CASE("belief_update examples") {
  const RbMarkov identity(1.0, 0.0, 0.0, 1.0);
  for (double prior : {0.0, 0.3, 1.0}) {
    if (prior == 0.0) {
      CHECK_THROWS_AS(belief_update({prior}, Action::access(0), {Reading::idle}, identity, noise(0.0)),
                      BeliefUpdateError);
      continue;
    }
    CHECK(belief_update({prior}, Action::access(0), {Reading::idle}, identity, noise(0.0))[0] == 1.0);
  }
  // Uninformative reading: hand Bayes gives 0.9*0.6 + 0.95*0.4.
  CHECK(belief_update({0.6}, Action::access(0), {Reading::busy}, paper_chain, noise(0.5))[0] ==
        doctest::Approx(0.92).epsilon(1e-15));
  const RbMarkov sticky(1.0, 0.0, 0.95, 0.05);
  for (double eps : {0.05, 0.5, 0.99})
    for (auto r : {Reading::idle, Reading::busy})
      CHECK(belief_update({1.0}, Action::access(0), {r}, sticky, noise(eps))[0] == 1.0);
}

TEST_CASE("impossible reading falls back to prior propagation") {
  const RbMarkov always_idle(1.0, 0.0, 1.0, 0.0);
  CHECK_THROWS_AS(belief_update({0.5}, Action::access(0), {Reading::busy}, always_idle, noise(0.0)),
                  BeliefUpdateError);
  CHECK(belief_update_or_propagate({0.5}, Action::access(0), {Reading::busy}, always_idle, noise(0.0))[0] == 1.0);
}

TEST_CASE("belief stays in [0,1] over random trajectories") {
  Rng rng = make_rng(77);
  for (auto law : {SensingLaw::symmetric, SensingLaw::busy_as_idle}) {
    Belief b{0.5, 0.5, 0.5};
    for (int i = 0; i < 10000; ++i) {
      const ObservationModel o = noise(uniform01(rng), law);
      const Action a = i % 4 == 0 ? Action::sleep() : Action::access(i % 3);
      Observation obs(3);
      for (auto& r : obs) r = uniform01(rng) < 0.5 ? Reading::idle : Reading::busy;
      b = belief_update_or_propagate(b, a, obs, paper_chain, o);
      for (double p : b) REQUIRE((p >= 0.0 && p <= 1.0));
    }
  }
}

TEST_CASE("epsilon 0.5 equals prior propagation exactly") {
  Rng rng = make_rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Belief b{uniform01(rng), uniform01(rng)};
    const Observation obs{uniform01(rng) < 0.5 ? Reading::idle : Reading::busy,
                          uniform01(rng) < 0.5 ? Reading::idle : Reading::busy};
    const auto got = belief_update(b, Action::access(1), obs, paper_chain, noise(0.5));
    for (int r = 0; r < 2; ++r) CHECK(got[r] == b[r] * 0.9 + (1.0 - b[r]) * 0.95);
  }
}

TEST_CASE("reward helpers") {
  CHECK(immediate_reward(Action::sleep(), 5.0) == 0.0);
  CHECK(immediate_reward(Action::access(0), 3.2) == 3.2);
  CHECK(immediate_reward(Action::access(0), 0.0) == 0.0);
  const std::vector<double> a{1.0, 4.0, 2.0}, b{2.0, 2.0, 2.0}, c{7.7};
  CHECK(best_rb_reward(a) == 4.0);
  CHECK(best_rb_reward(b) == 2.0);
  CHECK(best_rb_reward(c) == 7.7);
  CHECK_THROWS_AS(best_rb_reward(std::vector<double>{}), DomainError);
  const std::vector<double> r{5, 7, 9}, f{4, 4, 4};
  CHECK(total_discounted_reward(r, 0.0) == 9.0);
  CHECK(total_discounted_reward(r, 1.0) == 21.0);
  CHECK(total_discounted_reward(f, 0.5) == doctest::Approx(7.0));
}

TEST_CASE("action codes") {
  CHECK(Action::sleep().code() == 0);
  CHECK(Action::access(2).code() == 3);
  CHECK(Action::access(0).to_string() == "access:1");
  CHECK_THROWS_AS(Action::sleep().rb(), DomainError);
}

TEST_CASE("single slot never sleeps when an access pays") {
  const auto m = model(1, 0.9, 0.1, {{1.0, 0.0}, {0.5, 0.5}});
  for (auto opt : {exact(), grid(101)}) {
    const auto p = solve(m, opt);
    for (double x : {0.0, 0.2, 1.0})
      for (double y : {0.0, 0.7, 1.0}) CHECK_FALSE(p.act({x, y}, 0).is_sleep());
  }
}

TEST_CASE("exact solver matches the history oracle") {
  const std::vector<RateRow> rows{{1.0, 0.25}, {0.8, 0.4}};
  for (auto law : {SensingLaw::symmetric, SensingLaw::busy_as_idle})
    for (int rbs = 1; rbs <= 2; ++rbs)
      for (int k = 1; k <= 4; ++k)
        for (double eps : {0.0, 0.1, 0.3, 0.5})
          for (double beta : {0.0, 0.5, 1.0}) {
            const auto m = model(k, beta, eps, {rows.begin(), rows.begin() + rbs}, law);
            const auto p = solve(m, exact());
            for (double x : {0.0, 0.35, 1.0})
              for (double y : {0.1, 0.9}) {
                const Belief b = rbs == 1 ? Belief{x} : Belief{x, y};
                CHECK(p.value(b, 0) == doctest::Approx(oracle::history_value(m, b)).epsilon(1e-11));
              }
          }
}

TEST_CASE("paper chain, 2 RBs, K=3, beta 0.9, eps 0.1 at the uniform belief") {
  const auto m = model(3, 0.9, 0.1, {{1.0, 0.2}, {1.0, 0.2}});
  const auto p = solve(m, exact());
  CHECK(std::abs(p.value({0.5, 0.5}, 0) - oracle::history_value(m, {0.5, 0.5})) < 1e-9);
  CHECK(p.act({0.5, 0.5}, 0) == Action::access(0));
}

TEST_CASE("action values agree with the oracle's continuation") {
  const auto m = model(3, 0.9, 0.2, {{1.0, 0.1}, {0.7, 0.3}});
  const auto p = solve(m, exact());
  const Belief b{0.4, 0.8};
  const auto q = p.action_values(b, 0);
  CHECK(*std::max_element(q.begin(), q.end()) == doctest::Approx(oracle::history_value(m, b)).epsilon(1e-12));
}

TEST_CASE("symmetric model breaks ties at the lowest index") {
  const auto m = model(3, 0.9, 0.5, {{1.0, 0.2}, {1.0, 0.2}});
  for (auto opt : {exact(), grid(101)}) {
    const auto p = solve(m, opt);
    CHECK(p.act({0.5, 0.5}, 0) == Action::access(0));
    CHECK(p.act({0.3, 0.3}, 1) == Action::access(0));
    CHECK(p.value({0.2, 0.7}, 0) == doctest::Approx(p.value({0.7, 0.2}, 0)).epsilon(1e-12));
  }
}

TEST_CASE("act examples") {
  const auto m = model(2, 0.9, 0.1, {{1.0, 0.0}, {3.0, 0.0}, {1.0, 0.0}});
  const auto p = solve(m, exact());
  CHECK(p.act({0.2, 1.0, 0.2}, 0) == Action::access(1));
  const auto zero = solve(model(2, 0.9, 0.1, {{0.0, 0.0}, {0.0, 0.0}}), exact());
  CHECK(zero.act({0.5, 0.5}, 0).is_sleep());
  CHECK(act(zero, {1.0, 1.0}, 1).is_sleep());
}

TEST_CASE("slot-specific rates steer the immediate choice") {
  const auto m = model(2, 0.9, 0.1, {{1.0, 0.1}, {1.0, 0.1}});
  for (auto opt : {exact(), grid(101)}) {
    const auto p = solve(m, opt);
    const std::vector<RateRow> csi{{0.5, 0.05}, {2.0, 0.2}};
    CHECK(p.act({0.9, 0.9}, 0, csi) == Action::access(1));
    CHECK(p.act({0.9, 0.9}, 0) == Action::access(0));
  }
}

TEST_CASE("exact value dominates every open-loop sequence") {
  const auto m = model(3, 0.8, 0.2, {{1.0, 0.3}, {0.9, 0.5}});
  const auto p = solve(m, exact());
  Rng rng = make_rng(4);
  for (const Belief b : {Belief{0.5, 0.5}, Belief{0.9, 0.1}, Belief{0.0, 1.0}}) {
    const double v = p.value(b, 0);
    for (int a0 = 0; a0 < 3; ++a0)
      for (int a1 = 0; a1 < 3; ++a1)
        for (int a2 = 0; a2 < 3; ++a2) {
          const std::vector<int> seq{a0, a1, a2};
          CHECK(v >= oracle::open_loop_value(m, b, seq) - 1e-12);
          // Monte Carlo estimate of the same sequence, well inside its noise band.
          double sum = 0.0;
          const int n = 4000;
          for (int i = 0; i < n; ++i) {
            RbState s[2];
            for (int r = 0; r < 2; ++r) s[r] = uniform01(rng) < b[r] ? RbState::idle : RbState::busy;
            for (int k = 0; k < 3; ++k) {
              if (seq[k] > 0) {
                const auto& row = m.rates[seq[k] - 1];
                sum += slot_weight(k, 3, 0.8) * (s[seq[k] - 1] == RbState::idle ? row.idle : row.busy);
              }
              for (auto& x : s) x = evolve_rb(x, paper_chain, rng);
            }
          }
          CHECK(v >= sum / n - 0.05);
        }
  }
}

TEST_CASE("grid value converges toward the exact value") {
  for (double eps : {0.1, 0.3}) {
    const auto m = model(3, 0.9, eps, {{1.0, 0.2}, {0.8, 0.4}});
    const auto ex = solve(m, exact());
    for (const Belief b : {Belief{0.5, 0.5}, Belief{0.33, 0.71}}) {
      const double truth = ex.value(b, 0);
      double prev = 1e300;
      for (int res : {11, 101, 1001}) {
        const double err = std::abs(solve(m, grid(res)).value(b, 0) - truth);
        CHECK(err <= prev + 1e-6);
        prev = err;
      }
      CHECK(prev < 1e-3);
    }
  }
}

TEST_CASE("optimal value is non-increasing in epsilon") {
  const std::vector<RateRow> rows{{1.0, 0.1}, {0.9, 0.2}};
  for (int k : {2, 4}) {
    const Belief b{0.5, 0.6};
    double prev = 1e300;
    for (double eps = 0.0; eps <= 0.5 + 1e-12; eps += 0.05) {
      const double v = solve(model(k, 0.9, eps, rows), exact()).value(b, 0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    prev = 1e300;
    for (double eps = 0.0; eps <= 1.0 + 1e-12; eps += 0.1) {
      const double v = solve(model(k, 0.9, std::min(eps, 1.0), rows, SensingLaw::busy_as_idle), exact()).value(b, 0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("solver caps raise errors that point at grid mode") {
  SolverOptions o = exact();
  o.max_exact_rbs = 3;
  const auto m4 = model(2, 0.9, 0.1, std::vector<RateRow>(4, {1.0, 0.1}));
  CHECK_THROWS_WITH_AS(solve(m4, o), doctest::Contains("grid"), SolverError);
  SolverOptions tiny = exact();
  tiny.max_alpha_vectors = 2;
  CHECK_THROWS_WITH_AS(solve(model(4, 0.9, 0.1, {{1.0, 0.2}, {0.8, 0.4}}), tiny), doctest::Contains("grid"),
                       SolverError);
  // Action-dependent sensing over many RBs needs 2^R branches.
  auto big = model(3, 0.9, 0.1, std::vector<RateRow>(20, {1.0, 0.1}));
  big.obs.tie_phi_to_epsilon = false;
  big.obs.phi = 0.3;
  CHECK_THROWS_AS(solve(big, grid(101)), SolverError);
  // With action-independent sensing the greedy decision needs no tables.
  const auto passive = model(20, 0.9, 0.1, std::vector<RateRow>(21, {1.0, 0.1}));
  Belief b(21, 0.5);
  b[7] = 0.9;
  CHECK(solve(passive, grid(101)).act(b, 0) == Action::access(7));
}

TEST_CASE("grid and exact agree on decisions without broadcast sensing") {
  auto m = model(3, 0.9, 0.1, {{1.0, 0.2}, {0.8, 0.4}});
  m.obs.broadcast_sensing = false;
  const auto ex = solve(m, exact());
  CHECK(ex.value({0.5, 0.5}, 0) == doctest::Approx(oracle::history_value(m, {0.5, 0.5})).epsilon(1e-12));
  const auto gr = solve(m, grid(1001));
  CHECK(gr.value({0.5, 0.5}, 0) == doctest::Approx(ex.value({0.5, 0.5}, 0)).epsilon(1e-3));
}

TEST_CASE("policy dump lists every slot") {
  const auto p = solve(model(2, 0.9, 0.1, {{1.0, 0.2}}), exact());
  std::ostringstream os;
  p.dump(os);
  const auto text = os.str();
  CHECK(text.find("mode exact") != std::string::npos);
  CHECK(text.find("slot 0 vectors") != std::string::npos);
  CHECK(text.find("slot 1 vectors") != std::string::npos);
  CHECK(text.rfind("end\n") == text.size() - 4);
  CHECK(p.alpha_count(0) >= 1);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(solve(model(0, 0.9, 0.1, {{1, 0}})), ConfigError);
  CHECK_THROWS_AS(solve(model(1, 1.5, 0.1, {{1, 0}})), ConfigError);
  CHECK_THROWS_AS(solve(model(1, 0.9, 0.1, {})), ConfigError);
  auto m = model(1, 0.9, 0.1, {{1, 0}});
  m.obs.phi = 0.2;
  CHECK_THROWS_AS(solve(m), ConfigError);
  m.obs.tie_phi_to_epsilon = false;
  CHECK_NOTHROW(solve(m));
}
