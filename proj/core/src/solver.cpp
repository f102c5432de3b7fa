#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>

#include "lp.hpp"
#include "m2msim/error.hpp"
#include "m2msim/pomdp.hpp"

namespace m2msim {

namespace detail {

using Vec = std::vector<double>;

struct Alpha {
  Vec v;
  Action action = Action::sleep();
};

struct PolicyImpl {
  PolicyImpl(PomdpModel m, SolverOptions o) : model(std::move(m)), options(o) {}

  PomdpModel model;
  SolverOptions options;
  int rbs = 0;
  std::vector<Action> actions;
  std::vector<std::vector<Alpha>> gamma;  // exact mode, slots 0..K

  std::vector<int> group;  // exchangeable-RB class of each RB
  mutable std::mutex memo_mutex;
  mutable std::vector<std::unordered_map<std::string, double>> memo;  // grid mode, slots 0..K-1
};

namespace {

// Per-RB reading probabilities and posteriors for one action.
struct Branch {
  int rb;
  double p[2];
  double post[2];
};

std::vector<Branch> branches(const PolicyImpl& pi, const Belief& b, Action a) {
  const auto& m = pi.model;
  std::vector<Branch> out;
  for (int r = 0; r < pi.rbs; ++r) {
    if (!m.obs.observes(a, r)) continue;
    const double noise = m.obs.noise(a, r);
    const double pred = m.markov.propagate_idle(b[r]);
    Branch br{r, {0, 0}, {pred, pred}};
    for (int o = 0; o < 2; ++o) {
      const Reading seen = static_cast<Reading>(o);
      const double li = reading_likelihood(seen, RbState::idle, noise, m.obs.law);
      const double lb = reading_likelihood(seen, RbState::busy, noise, m.obs.law);
      br.p[o] = pred * li + (1.0 - pred) * lb;
      if (li != lb && br.p[o] > 0.0) br.post[o] = std::clamp(pred * li / br.p[o], 0.0, 1.0);
    }
    out.push_back(br);
  }
  return out;
}

std::size_t max_sensed(const PomdpModel& m, const std::vector<Action>& actions) {
  std::size_t best = 0;
  for (auto a : actions) {
    std::size_t n = 0;
    for (int r = 0; r < m.rbs(); ++r) n += m.obs.observes(a, r) ? 1 : 0;
    best = std::max(best, n);
  }
  return best;
}

void check_branching(const PolicyImpl& pi) {
  const std::size_t n = max_sensed(pi.model, pi.actions);
  if (n >= 63 || (std::size_t{1} << n) > pi.options.max_observation_branches)
    throw SolverError("observation branching 2^" + std::to_string(n) + " exceeds solver.max_observation_branches (" +
                      std::to_string(pi.options.max_observation_branches) + ")");
}

double expected_rate(const RateRow& row, double p_idle) {
  return p_idle * row.idle + (1.0 - p_idle) * row.busy;
}

Vec joint(const Belief& b) {
  Vec out(std::size_t{1} << b.size(), 1.0);
  for (std::size_t s = 0; s < out.size(); ++s)
    for (std::size_t r = 0; r < b.size(); ++r) out[s] *= ((s >> r) & 1U) ? 1.0 - b[r] : b[r];
  return out;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double exact_value(const PolicyImpl& pi, const Belief& b, int slot) {
  const Vec jb = joint(b);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& al : pi.gamma[slot]) best = std::max(best, dot(al.v, jb));
  return best;
}

std::string grid_key(const PolicyImpl& pi, const Belief& b) {
  const int res = pi.options.grid_resolution;
  std::vector<std::uint16_t> idx(b.size());
  for (std::size_t r = 0; r < b.size(); ++r)
    idx[r] = static_cast<std::uint16_t>(std::lround(std::clamp(b[r], 0.0, 1.0) * (res - 1)));
  // Exchangeable RBs are interchangeable; sort their indices within each class.
  for (int g = 0; g < pi.rbs; ++g) {
    std::vector<std::uint16_t> members;
    for (int r = 0; r < pi.rbs; ++r)
      if (pi.group[r] == g) members.push_back(idx[r]);
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    std::size_t j = 0;
    for (int r = 0; r < pi.rbs; ++r)
      if (pi.group[r] == g) idx[r] = members[j++];
  }
  return std::string(reinterpret_cast<const char*>(idx.data()), idx.size() * sizeof(std::uint16_t));
}

Belief key_belief(const PolicyImpl& pi, const std::string& key) {
  const double step = 1.0 / (pi.options.grid_resolution - 1);
  Belief b(pi.rbs);
  for (int r = 0; r < pi.rbs; ++r) {
    std::uint16_t v;
    std::memcpy(&v, key.data() + r * sizeof(v), sizeof(v));
    b[r] = v == pi.options.grid_resolution - 1 ? 1.0 : v * step;
  }
  return b;
}

double value_at(const PolicyImpl& pi, const Belief& b, int slot);

double grid_value(const PolicyImpl& pi, const Belief& b, int slot) {
  if (slot >= pi.model.horizon) return 0.0;
  const std::string key = grid_key(pi, b);
  {
    std::lock_guard lock(pi.memo_mutex);
    auto it = pi.memo[slot].find(key);
    if (it != pi.memo[slot].end()) return it->second;
  }
  const Belief snapped = key_belief(pi, key);
  double best = -std::numeric_limits<double>::infinity();
  for (auto a : pi.actions) {
    const double w = slot_weight(slot, pi.model.horizon, pi.model.discount);
    const double imm = a.is_sleep() ? 0.0 : w * expected_rate(pi.model.rates[a.rb()], snapped[a.rb()]);
    double cont = 0.0;
    if (slot + 1 < pi.model.horizon) {
      const auto br = branches(pi, snapped, a);
      const std::size_t n = std::size_t{1} << br.size();
      Belief next = propagate(snapped, pi.model.markov);
      for (std::size_t o = 0; o < n; ++o) {
        double p = 1.0;
        for (std::size_t j = 0; j < br.size() && p > 0.0; ++j) {
          const int bit = (o >> j) & 1U;
          p *= br[j].p[bit];
          next[br[j].rb] = br[j].post[bit];
        }
        if (p > 0.0) cont += p * grid_value(pi, next, slot + 1);
      }
    }
    best = std::max(best, imm + cont);
  }
  std::lock_guard lock(pi.memo_mutex);
  pi.memo[slot].emplace(key, best);
  return best;
}

double value_at(const PolicyImpl& pi, const Belief& b, int slot) {
  if (slot >= pi.model.horizon) return 0.0;
  return pi.options.mode == SolverMode::exact ? exact_value(pi, b, slot) : grid_value(pi, b, slot);
}

double continuation(const PolicyImpl& pi, const Belief& b, int slot, Action a) {
  if (slot + 1 >= pi.model.horizon) return 0.0;
  const auto br = branches(pi, b, a);
  if (br.size() >= 63 || (std::size_t{1} << br.size()) > pi.options.max_observation_branches)
    throw SolverError("value query needs 2^" + std::to_string(br.size()) +
                      " observation branches, above solver.max_observation_branches");
  const std::size_t n = std::size_t{1} << br.size();
  Belief next = propagate(b, pi.model.markov);
  double cont = 0.0;
  for (std::size_t o = 0; o < n; ++o) {
    double p = 1.0;
    for (std::size_t j = 0; j < br.size() && p > 0.0; ++j) {
      const int bit = (o >> j) & 1U;
      p *= br[j].p[bit];
      next[br[j].rb] = br[j].post[bit];
    }
    if (p > 0.0) cont += p * value_at(pi, next, slot + 1);
  }
  return cont;
}

// ---- exact backup -------------------------------------------------------

double scale_of(const std::vector<Vec>& vs) {
  double s = 1.0;
  for (const auto& v : vs)
    for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

bool lex_greater(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<Vec> prune(std::vector<Vec> in) {
  if (in.size() <= 1) return in;
  const double tol = 1e-12 * scale_of(in);
  // Pointwise dominance and duplicates.
  std::vector<char> keep(in.size(), 0);
  for (std::size_t i = 0; i < in.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < in.size() && !dominated; ++j) {
      if (i == j) continue;
      bool ge = true, strict = false;
      for (std::size_t s = 0; s < in[i].size(); ++s) {
        if (in[j][s] < in[i][s] - tol) { ge = false; break; }
        if (in[j][s] > in[i][s] + tol) strict = true;
      }
      dominated = ge && (strict || j < i);
    }
    keep[i] = !dominated;
  }
  std::vector<Vec> f;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (keep[i]) f.push_back(std::move(in[i]));
  if (f.size() <= 1) return f;

  std::vector<Vec> w;
  const std::size_t ns = f.front().size();
  // Seed with the best vector at each corner of the simplex.
  for (std::size_t s = 0; s < ns && !f.empty(); ++s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
      if (f[i][s] > f[best][s] || (f[i][s] == f[best][s] && lex_greater(f[i], f[best]))) best = i;
    w.push_back(std::move(f[best]));
    f.erase(f.begin() + static_cast<std::ptrdiff_t>(best));
  }
  Vec witness;
  while (!f.empty()) {
    if (!detail::find_witness(f.back(), w, tol, witness)) {
      f.pop_back();
      continue;
    }
    std::size_t best = 0;
    double bv = dot(f[0], witness);
    for (std::size_t i = 1; i < f.size(); ++i) {
      const double v = dot(f[i], witness);
      if (v > bv || (v == bv && lex_greater(f[i], f[best]))) { bv = v; best = i; }
    }
    w.push_back(std::move(f[best]));
    f.erase(f.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return w;
}

void check_alpha_cap(const PolicyImpl& pi, std::size_t n, int slot) {
  if (n > pi.options.max_alpha_vectors)
    throw SolverError("exact solver exceeded solver.max_alpha_vectors (" +
                      std::to_string(pi.options.max_alpha_vectors) + ") at slot " + std::to_string(slot) +
                      "; use solver.mode=grid for this instance");
}

// g(s) = sum_{s'} T(s,s') O(o|a,s') alpha(s')
Vec project(const PolicyImpl& pi, const Vec& alpha, const std::vector<int>& sensed,
            const std::vector<double>& noise, std::size_t o) {
  const auto& m = pi.model;
  Vec h = alpha;
  for (std::size_t s = 0; s < h.size(); ++s) {
    double lik = 1.0;
    for (std::size_t j = 0; j < sensed.size(); ++j) {
      const auto seen = static_cast<Reading>((o >> j) & 1U);
      const auto st = static_cast<RbState>((s >> sensed[j]) & 1U);
      lik *= reading_likelihood(seen, st, noise[j], m.obs.law);
    }
    h[s] *= lik;
  }
  const double pii = m.markov.p_idle_idle(), pib = m.markov.p_idle_busy();
  const double pbi = m.markov.p_busy_idle(), pbb = m.markov.p_busy_busy();
  for (int r = 0; r < pi.rbs; ++r) {
    const std::size_t bit = std::size_t{1} << r;
    for (std::size_t s = 0; s < h.size(); ++s) {
      if (s & bit) continue;
      const double h0 = h[s], h1 = h[s | bit];
      h[s] = pii * h0 + pib * h1;
      h[s | bit] = pbi * h0 + pbb * h1;
    }
  }
  return h;
}

void solve_exact(PolicyImpl& pi) {
  const int k_total = pi.model.horizon;
  const std::size_t ns = std::size_t{1} << pi.rbs;
  pi.gamma.assign(k_total + 1, {});
  pi.gamma[k_total].push_back(Alpha{Vec(ns, 0.0), Action::sleep()});
  for (int k = k_total - 1; k >= 0; --k) {
    const double w = slot_weight(k, k_total, pi.model.discount);
    std::vector<Vec> next;
    for (const auto& al : pi.gamma[k + 1]) next.push_back(al.v);
    std::vector<Alpha> all;
    for (auto a : pi.actions) {
      Vec reward(ns, 0.0);
      if (!a.is_sleep()) {
        const auto& row = pi.model.rates[a.rb()];
        for (std::size_t s = 0; s < ns; ++s) reward[s] = w * (((s >> a.rb()) & 1U) ? row.busy : row.idle);
      }
      std::vector<int> sensed;
      std::vector<double> noise;
      for (int r = 0; r < pi.rbs; ++r)
        if (pi.model.obs.observes(a, r)) {
          sensed.push_back(r);
          noise.push_back(pi.model.obs.noise(a, r));
        }
      std::vector<Vec> acc{reward};
      const std::size_t outcomes = std::size_t{1} << sensed.size();
      for (std::size_t o = 0; o < outcomes; ++o) {
        std::vector<Vec> proj;
        proj.reserve(next.size());
        for (const auto& v : next) proj.push_back(project(pi, v, sensed, noise, o));
        proj = prune(std::move(proj));
        check_alpha_cap(pi, acc.size() * proj.size(), k);
        std::vector<Vec> sum;
        sum.reserve(acc.size() * proj.size());
        for (const auto& x : acc)
          for (const auto& y : proj) {
            Vec z(ns);
            for (std::size_t s = 0; s < ns; ++s) z[s] = x[s] + y[s];
            sum.push_back(std::move(z));
          }
        acc = prune(std::move(sum));
      }
      for (auto& v : acc) all.push_back(Alpha{std::move(v), a});
    }
    check_alpha_cap(pi, all.size(), k);
    std::vector<Vec> vs;
    for (const auto& al : all) vs.push_back(al.v);
    const auto kept = prune(vs);
    // Re-attach action tags; kept vectors are copies of entries in `all`.
    for (const auto& v : kept)
      for (const auto& al : all)
        if (al.v == v) {
          pi.gamma[k].push_back(al);
          break;
        }
  }
}

}  // namespace

}  // namespace detail

Policy solve(const PomdpModel& model, const SolverOptions& options) {
  model.validate();
  options.validate();
  auto pi = std::make_shared<detail::PolicyImpl>(model, options);
  pi->rbs = model.rbs();
  pi->actions.push_back(Action::sleep());
  for (int r = 0; r < pi->rbs; ++r) pi->actions.push_back(Action::access(r));
  pi->group.resize(pi->rbs);
  for (int r = 0; r < pi->rbs; ++r) {
    pi->group[r] = r;
    for (int q = 0; q < r; ++q)
      if (model.rates[q] == model.rates[r]) {
        pi->group[r] = pi->group[q];
        break;
      }
  }
  if (options.mode == SolverMode::exact) {
    if (pi->rbs > options.max_exact_rbs)
      throw SolverError("exact solver supports at most solver.max_exact_rbs=" +
                        std::to_string(options.max_exact_rbs) + " RBs (got " + std::to_string(pi->rbs) +
                        "); use solver.mode=grid");
    detail::check_branching(*pi);
    detail::solve_exact(*pi);
  } else {
    // With action-independent observations act() never needs the recursion.
    if (!model.obs.passive() && model.horizon > 1) detail::check_branching(*pi);
    pi->memo.resize(model.horizon);
  }
  return Policy(std::move(pi));
}

const PomdpModel& Policy::model() const { return impl_->model; }
SolverMode Policy::mode() const { return impl_->options.mode; }

namespace {

void check_query(const detail::PolicyImpl& pi, const Belief& b, int slot) {
  if (slot < 0 || slot >= pi.model.horizon) throw DomainError("policy: slot outside [0, K)");
  if (static_cast<int>(b.size()) != pi.rbs) throw DomainError("policy: belief length differs from RB count");
  for (double p : b)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("policy: belief entry outside [0,1]");
}

std::vector<double> q_values(const detail::PolicyImpl& pi, const Belief& b, int slot,
                             std::span<const RateRow> immediate, bool with_continuation) {
  if (!immediate.empty() && static_cast<int>(immediate.size()) != pi.rbs)
    throw DomainError("policy: immediate rate table length differs from RB count");
  const auto rates = immediate.empty() ? std::span<const RateRow>(pi.model.rates) : immediate;
  const double w = slot_weight(slot, pi.model.horizon, pi.model.discount);
  std::vector<double> q(pi.actions.size(), 0.0);
  for (std::size_t i = 0; i < pi.actions.size(); ++i) {
    const Action a = pi.actions[i];
    if (!a.is_sleep()) q[i] = w * detail::expected_rate(rates[a.rb()], b[a.rb()]);
    if (with_continuation) q[i] += detail::continuation(pi, b, slot, a);
  }
  return q;
}

Action pick(const std::vector<double>& q) {
  double best_access = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < q.size(); ++i) best_access = std::max(best_access, q[i]);
  const double tol = 1e-12 * std::max({1.0, std::abs(best_access), std::abs(q[0])});
  if (q[0] >= best_access - tol) return Action::sleep();
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] >= best_access - tol) return Action::access(static_cast<int>(i) - 1);
  return Action::sleep();
}

}  // namespace

Action Policy::act(const Belief& belief, int slot) const { return act(belief, slot, {}); }

Action Policy::act(const Belief& belief, int slot, std::span<const RateRow> immediate) const {
  check_query(*impl_, belief, slot);
  const bool cont = !impl_->model.obs.passive();
  return pick(q_values(*impl_, belief, slot, immediate, cont));
}

std::vector<double> Policy::action_values(const Belief& belief, int slot,
                                          std::span<const RateRow> immediate) const {
  check_query(*impl_, belief, slot);
  return q_values(*impl_, belief, slot, immediate, true);
}

double Policy::value(const Belief& belief, int slot) const {
  if (slot == impl_->model.horizon) return 0.0;
  check_query(*impl_, belief, slot);
  if (impl_->options.mode == SolverMode::exact) return detail::exact_value(*impl_, belief, slot);
  const auto q = q_values(*impl_, belief, slot, {}, true);
  return *std::max_element(q.begin(), q.end());
}

std::size_t Policy::alpha_count(int slot) const {
  if (impl_->options.mode != SolverMode::exact) throw DomainError("alpha_count: policy is not exact");
  return impl_->gamma.at(slot).size();
}

void Policy::dump(std::ostream& os) const {
  const auto& pi = *impl_;
  const auto& m = pi.model;
  os.precision(17);
  os << "m2msim-policy 1\n"
     << "mode " << (pi.options.mode == SolverMode::exact ? "exact" : "grid") << '\n'
     << "rbs " << pi.rbs << '\n'
     << "horizon " << m.horizon << '\n'
     << "discount " << m.discount << '\n'
     << "epsilon " << m.obs.epsilon << " phi " << m.obs.phi << '\n';
  for (int r = 0; r < pi.rbs; ++r) os << "rate " << r + 1 << ' ' << m.rates[r].idle << ' ' << m.rates[r].busy << '\n';
  if (pi.options.mode == SolverMode::exact) {
    // Alpha entries are indexed by joint state; bit r set means RB r+1 busy.
    for (int k = 0; k < m.horizon; ++k) {
      os << "slot " << k << " vectors " << pi.gamma[k].size() << '\n';
      for (const auto& al : pi.gamma[k]) {
        os << "  " << al.action.to_string() << " |";
        for (double x : al.v) os << ' ' << x;
        os << '\n';
      }
    }
  } else {
    std::lock_guard lock(pi.memo_mutex);
    os << "resolution " << pi.options.grid_resolution << '\n';
    for (int k = 0; k < m.horizon; ++k) {
      std::vector<std::pair<Belief, double>> rows;
      for (const auto& [key, v] : pi.memo[k]) rows.emplace_back(detail::key_belief(pi, key), v);
      std::sort(rows.begin(), rows.end());
      os << "slot " << k << " points " << rows.size() << '\n';
      for (const auto& [b, v] : rows) {
        os << " ";
        for (double p : b) os << ' ' << p;
        os << " | " << v << '\n';
      }
    }
  }
  os << "end\n";
}

}  // namespace m2msim
