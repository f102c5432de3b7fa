#include "m2msim/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace m2msim {

namespace {

using Joint = std::vector<double>;

double joint_value(const PomdpModel& m, const Joint& b, int slot) {
  if (slot >= m.horizon) return 0.0;
  const int nr = m.rbs();
  const std::size_t ns = b.size();
  auto bit = [](std::size_t s, int r) { return static_cast<int>((s >> r) & 1U); };
  const double w = slot_weight(slot, m.horizon, m.discount);

  double best = -1.0;
  for (int code = 0; code <= nr; ++code) {
    const Action a = code == 0 ? Action::sleep() : Action::access(code - 1);
    double q = 0.0;
    if (!a.is_sleep()) {
      const auto& row = m.rates[a.rb()];
      for (std::size_t s = 0; s < ns; ++s) q += b[s] * w * (bit(s, a.rb()) ? row.busy : row.idle);
    }
    // Predicted joint state after the transition.
    Joint pred(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (b[s] == 0.0) continue;
      for (std::size_t t = 0; t < ns; ++t) {
        double p = b[s];
        for (int r = 0; r < nr; ++r)
          p *= m.markov.prob(static_cast<RbState>(bit(s, r)), static_cast<RbState>(bit(t, r)));
        pred[t] += p;
      }
    }
    // Every combination of readings; unobserved RBs read `none`.
    std::vector<int> sensed;
    for (int r = 0; r < nr; ++r)
      if (m.obs.observes(a, r)) sensed.push_back(r);
    for (std::size_t o = 0; o < (std::size_t{1} << sensed.size()); ++o) {
      Joint post(ns, 0.0);
      double total = 0.0;
      for (std::size_t t = 0; t < ns; ++t) {
        double lik = 1.0;
        for (std::size_t j = 0; j < sensed.size(); ++j)
          lik *= reading_likelihood(static_cast<Reading>((o >> j) & 1U), static_cast<RbState>(bit(t, sensed[j])),
                                    m.obs.noise(a, sensed[j]), m.obs.law);
        post[t] = pred[t] * lik;
        total += post[t];
      }
      if (total <= 0.0) continue;
      for (auto& x : post) x /= total;
      q += total * joint_value(m, post, slot + 1);
    }
    best = std::max(best, q);
  }
  return best;
}

std::vector<Belief> sample_beliefs(int rbs) {
  std::vector<Belief> out;
  if (rbs == 1) {
    for (int i = 0; i < 25; ++i) out.push_back({i / 24.0});
  } else {
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) out.push_back({i / 4.0, j / 4.0});
  }
  return out;
}

}  // namespace

double reference_value(const PomdpModel& model, const Belief& belief, int slot) {
  model.validate();
  const int nr = model.rbs();
  Joint b(std::size_t{1} << nr, 1.0);
  for (std::size_t s = 0; s < b.size(); ++s)
    for (int r = 0; r < nr; ++r) b[s] *= ((s >> r) & 1U) ? 1.0 - belief[r] : belief[r];
  return joint_value(model, b, slot);
}

CheckResult verify_pomdp_oracle(double tolerance) {
  CheckResult res{"pomdp-oracle", true, 0.0, ""};
  const RbMarkov markov(0.9, 0.1, 0.95, 0.05);
  const std::vector<RateRow> rows{{1.0, 0.25}, {0.8, 0.4}};
  int instances = 0;
  std::ostringstream worst_at;
  for (int rbs = 1; rbs <= 2; ++rbs)
    for (int k = 1; k <= 4; ++k)
      for (double eps : {0.0, 0.1, 0.3, 0.5})
        for (double beta : {0.0, 0.5, 1.0}) {
          ObservationModel obs;
          obs.epsilon = obs.phi = eps;
          PomdpModel m{markov, obs, k, beta, std::vector<RateRow>(rows.begin(), rows.begin() + rbs)};
          SolverOptions opt;
          opt.mode = SolverMode::exact;
          const Policy p = solve(m, opt);
          for (const auto& b : sample_beliefs(rbs)) {
            const double got = p.value(b, 0);
            const double want = reference_value(m, b);
            const double dev = std::abs(got - want);
            if (dev > res.worst) {
              res.worst = dev;
              worst_at.str("");
              worst_at << "R=" << rbs << " K=" << k << " eps=" << eps << " beta=" << beta << " solver=" << got
                       << " oracle=" << want;
            }
          }
          ++instances;
        }
  res.pass = res.worst < tolerance;
  std::ostringstream d;
  d << instances << " instances x 25 beliefs, max |solver - oracle| = " << res.worst;
  if (!res.pass) d << " at " << worst_at.str();
  res.detail = d.str();
  return res;
}

CheckResult verify_deadbeat(double plant_mu_scale, double tolerance) {
  CheckResult res{"deadbeat", true, 0.0, ""};
  const int periods = 12, step_at = 4;
  std::ostringstream worst_at;
  for (int slices : {2, 5})
    for (double omega : {0.5, 0.8})
      for (double mu : {1.0, 2.0}) {
        std::vector<double> before(slices), after(slices), start(slices);
        double sb = 0.0, sa = 0.0;
        for (int l = 0; l < slices; ++l) {
          before[l] = slices - l;
          after[l] = 1.0 + l;
          sb += before[l];
          sa += after[l];
        }
        for (int l = 0; l < slices; ++l) {
          before[l] /= sb;
          after[l] /= sa;
          start[l] = 10.0 * before[l];  // matched start
        }
        LinearLoopScenario sc{start, {}, mu * plant_mu_scale};
        for (int y = 0; y < periods; ++y) sc.targets.push_back(y < step_at ? before : after);
        const auto xi = closed_loop_reference({omega, mu, 1.0}, sc);
        for (int y = 0; y < periods; ++y) {
          if (y == step_at) continue;  // the one period of delay
          for (int l = 0; l < slices; ++l) {
            const double dev = std::abs(xi[y][l] - sc.targets[y][l]);
            if (dev > res.worst) {
              res.worst = dev;
              worst_at.str("");
              worst_at << "L=" << slices << " omega=" << omega << " mu=" << mu << " period=" << y
                       << " slice=" << l + 1 << " xi=" << xi[y][l] << " target=" << sc.targets[y][l];
            }
          }
        }
      }
  res.pass = res.worst < tolerance;
  std::ostringstream d;
  d << "8 loops, step at period " << step_at << ", max |xi - target| after one period = " << res.worst;
  if (!res.pass) d << " at " << worst_at.str();
  res.detail = d.str();
  return res;
}

}  // namespace m2msim
