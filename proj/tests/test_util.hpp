#pragma once

#include <string>
#include <vector>

#include "modesim/network.hpp"
#include "modesim/types.hpp"

namespace testutil {

// Ring of 40 agents whose attribute counts over {"1",...,"10"} are
// [5, 6, 7, 16, 1, 1, 1, 1, 1, 1]; the mode is "4" with frequency 16.
inline std::vector<std::string> block_labels(const std::vector<long>& histogram,
                                             const std::vector<std::string>& universe) {
  std::vector<std::string> labels;
  for (std::size_t u = 0; u < histogram.size(); ++u) {
    for (long c = 0; c < histogram[u]; ++c) labels.push_back(universe[u]);
  }
  return labels;
}

inline std::vector<std::string> decimal_universe(int size) {
  std::vector<std::string> universe;
  for (int i = 1; i <= size; ++i) universe.push_back(std::to_string(i));
  return universe;
}

inline const std::vector<long>& reference_histogram() {
  static const std::vector<long> hist{5, 6, 7, 16, 1, 1, 1, 1, 1, 1};
  return hist;
}

inline modesim::NetworkTimeline reference_ring(int n_bar = 50) {
  const auto universe = decimal_universe(10);
  return modesim::build_ring(40, block_labels(reference_histogram(), universe), universe, n_bar);
}

// Random connected graph with random attributes drawn from a small universe.
inline modesim::NetworkTimeline random_network(std::uint64_t seed, int max_n, int max_omega,
                                               int n_bar = 0) {
  modesim::Rng rng(seed);
  const int n = static_cast<int>(modesim::uniform_int(rng, 3, max_n));
  const int omega = static_cast<int>(modesim::uniform_int(rng, 2, max_omega));
  const int extra = static_cast<int>(modesim::uniform_int(rng, 0, n));
  const auto universe = decimal_universe(omega);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(universe[static_cast<std::size_t>(modesim::uniform_int(rng, 0, omega - 1))]);
  }
  return modesim::build_random_connected(n, extra, seed * 77 + 13, labels, universe, n_bar);
}

}  // namespace testutil
