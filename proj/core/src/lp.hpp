#pragma once

#include <span>
#include <vector>

namespace m2msim::detail {

// Is `alpha` strictly better than every vector in `others` somewhere on the
// belief simplex? On success `witness` receives such a belief.
bool find_witness(std::span<const double> alpha, const std::vector<std::vector<double>>& others,
                  double tol, std::vector<double>& witness);

}  // namespace m2msim::detail
