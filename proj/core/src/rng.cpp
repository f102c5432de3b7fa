#include "m2msim/rng.hpp"

#include <vector>

namespace m2msim {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (coords.size() + 1));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto c : coords) push(c);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace m2msim
