#include "lp.hpp"

#include <cstddef>
#include <limits>

namespace m2msim::detail {

// max delta  s.t.  delta - b.(alpha - w) <= 0 for every w,  sum(b) <= 1,  b, delta >= 0.
// The origin is feasible, so a single-phase tableau simplex with Bland's rule suffices.
bool find_witness(std::span<const double> alpha, const std::vector<std::vector<double>>& others,
                  double tol, std::vector<double>& witness) {
  const std::size_t s = alpha.size();
  if (others.empty()) {
    witness.assign(s, 1.0 / static_cast<double>(s));
    return true;
  }
  const std::size_t m = others.size() + 1;
  const std::size_t nvar = s + 1;
  const std::size_t ncol = nvar + m + 1;  // variables, slacks, rhs
  std::vector<double> t((m + 1) * ncol, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return t[i * ncol + j]; };
  std::vector<std::size_t> basis(m);

  for (std::size_t i = 0; i < others.size(); ++i) {
    for (std::size_t j = 0; j < s; ++j) at(i, j) = others[i][j] - alpha[j];
    at(i, s) = 1.0;
    at(i, nvar + i) = 1.0;
    basis[i] = nvar + i;
  }
  const std::size_t last = m - 1;
  for (std::size_t j = 0; j < s; ++j) at(last, j) = 1.0;
  at(last, nvar + last) = 1.0;
  at(last, ncol - 1) = 1.0;
  basis[last] = nvar + last;
  at(m, s) = -1.0;  // objective row holds -c

  const double eps = 1e-13;
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t enter = ncol;
    for (std::size_t j = 0; j + 1 < ncol; ++j)
      if (at(m, j) < -eps) { enter = j; break; }
    if (enter == ncol) break;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a <= eps) continue;
      const double ratio = at(i, ncol - 1) / a;
      if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave < m && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == m) break;  // unbounded cannot happen with sum(b) <= 1
    const double piv = at(leave, enter);
    for (std::size_t j = 0; j < ncol; ++j) at(leave, j) /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncol; ++j) at(i, j) -= f * at(leave, j);
    }
    basis[leave] = enter;
  }

  std::vector<double> x(nvar, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < nvar) x[basis[i]] = at(i, ncol - 1);
  const double delta = x[s];
  if (delta <= tol) return false;
  double total = 0.0;
  for (std::size_t j = 0; j < s; ++j) total += x[j];
  if (total <= 0.0) return false;
  witness.resize(s);
  for (std::size_t j = 0; j < s; ++j) witness[j] = x[j] / total;
  return true;
}

}  // namespace m2msim::detail
