#pragma once

// Random instance generators and brute-force oracles shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "prefgame/preference.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline std::vector<double> normal_vector(Rng& rng, std::size_t n,
                                         double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline prefgame::PreferenceScoreMatrix random_game(Rng& rng, std::size_t n,
                                                   double scale = 1.0) {
  return prefgame::PreferenceScoreMatrix::from_upper(
      n, normal_vector(rng, n * (n - 1) / 2, scale));
}

// Independent construction of a zero-row-sum skew matrix: C = A - rowmean
// terms built directly on the dense matrix, without the library's
// decomposition.
inline std::vector<double> dense_cyclic_part(const prefgame::PreferenceScoreMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) mean[i] += m(i, j);
    mean[i] /= static_cast<double>(n);
  }
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = m(i, j) - (mean[i] - mean[j]);
    }
  }
  return c;
}

inline prefgame::PreferenceScoreMatrix random_cyclic(Rng& rng, std::size_t n,
                                                     double scale = 1.0) {
  const auto c = dense_cyclic_part(random_game(rng, n, scale));
  std::vector<double> upper;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(c[i * n + j]);
  }
  return prefgame::PreferenceScoreMatrix::from_upper(n, upper);
}

inline prefgame::TabularPolicy random_policy(Rng& rng, std::size_t n,
                                             bool strictly_positive = true) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  for (double& x : w) x = e(rng) + (strictly_positive ? 1e-3 : 0.0);
  if (!strictly_positive) w[uniform_size(rng, 0, n - 1)] += 1.0;
  return prefgame::TabularPolicy::from_weights(w);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline prefgame::PreferenceScoreMatrix rps() {
  const double upper[] = {1.0, -1.0, 1.0};
  return prefgame::PreferenceScoreMatrix::from_upper(3, upper);
}

// Largest number of pairs any strict scalar ranking satisfies, by
// enumerating all orderings. pairs are (winner, loser).
inline std::size_t best_ranking_agreement(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t best = 0;
  do {
    std::vector<std::size_t> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;
    std::size_t ok = 0;
    for (auto [w, l] : pairs) ok += rank[w] < rank[l];
    best = std::max(best, ok);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace testing
