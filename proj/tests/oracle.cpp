#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using namespace m2msim;

namespace {

int state_of(std::size_t s, int r) { return static_cast<int>((s >> r) & 1U); }

double trans(const PomdpModel& m, std::size_t s, std::size_t t) {
  double p = 1.0;
  for (int r = 0; r < m.rbs(); ++r) {
    const int a = state_of(s, r), b = state_of(t, r);
    const double pi = a == 0 ? m.markov.p_idle_idle() : m.markov.p_busy_idle();
    p *= b == 0 ? pi : 1.0 - pi;
  }
  return p;
}

// P(reading | state) written out case by case.
double lik(const PomdpModel& m, int reading, int state, double noise) {
  if (m.obs.law == SensingLaw::symmetric) return reading == state ? 1.0 - noise : noise;
  if (state == 0) return reading == 0 ? 1.0 : 0.0;
  return reading == 0 ? noise : 1.0 - noise;
}

double weight(const PomdpModel& m, int k) {
  const int e = m.horizon - k - 1;
  double w = 1.0;
  for (int i = 0; i < e; ++i) w *= m.discount;
  return w;
}

double rec(const PomdpModel& m, const std::vector<double>& f, int k) {
  if (k == m.horizon) return 0.0;
  const int nr = m.rbs();
  const std::size_t ns = f.size();
  double best = -1e300;
  for (int code = 0; code <= nr; ++code) {
    double q = 0.0;
    if (code > 0)
      for (std::size_t s = 0; s < ns; ++s) {
        const auto& row = m.rates[code - 1];
        q += f[s] * weight(m, k) * (state_of(s, code - 1) == 0 ? row.idle : row.busy);
      }
    std::vector<int> seen;
    std::vector<double> noise;
    for (int r = 0; r < nr; ++r) {
      const bool accessed = code == r + 1;
      if (accessed || m.obs.broadcast_sensing) {
        seen.push_back(r);
        noise.push_back(accessed ? m.obs.epsilon : m.obs.phi);
      }
    }
    for (std::size_t o = 0; o < (std::size_t{1} << seen.size()); ++o) {
      std::vector<double> g(ns, 0.0);
      double mass = 0.0;
      for (std::size_t t = 0; t < ns; ++t) {
        double l = 1.0;
        for (std::size_t j = 0; j < seen.size(); ++j)
          l *= lik(m, static_cast<int>((o >> j) & 1U), state_of(t, seen[j]), noise[j]);
        for (std::size_t s = 0; s < ns; ++s) g[t] += f[s] * trans(m, s, t) * l;
        mass += g[t];
      }
      if (mass > 0.0) q += rec(m, g, k + 1);
    }
    best = std::max(best, q);
  }
  return best;
}

std::vector<double> joint_of(const Belief& b) {
  std::vector<double> f(std::size_t{1} << b.size(), 1.0);
  for (std::size_t s = 0; s < f.size(); ++s)
    for (std::size_t r = 0; r < b.size(); ++r) f[s] *= state_of(s, static_cast<int>(r)) ? 1.0 - b[r] : b[r];
  return f;
}

}  // namespace

double history_value(const PomdpModel& m, const Belief& b) { return rec(m, joint_of(b), 0); }

double open_loop_value(const PomdpModel& m, const Belief& b, const std::vector<int>& codes) {
  std::vector<double> p = b;
  double v = 0.0;
  for (int k = 0; k < m.horizon; ++k) {
    if (codes[k] > 0) {
      const int r = codes[k] - 1;
      v += weight(m, k) * (p[r] * m.rates[r].idle + (1.0 - p[r]) * m.rates[r].busy);
    }
    for (auto& x : p) x = x * m.markov.p_idle_idle() + (1.0 - x) * m.markov.p_busy_idle();
  }
  return v;
}

}  // namespace oracle
