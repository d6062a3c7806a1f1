#pragma once

// Transitive/cyclic split of a finite preference game under the uniform
// distribution over responses:
//
//   M = T + C,  T(i, j) = f[i] - f[j],  sum_j C(i, j) = 0 for every i.
//
// The potential f is the mean score of each response against the uniform
// population, recentered to mean zero. The split is unique.

#include <vector>

#include "prefgame/preference.hpp"

namespace prefgame {

struct Decomposition {
  std::vector<double> potential;     // f, mean zero
  PreferenceScoreMatrix transitive;  // f[i] - f[j]
  PreferenceScoreMatrix cyclic;      // M - T, zero row sums

  // T + C.
  PreferenceScoreMatrix reconstruct() const;
};

Decomposition decompose(const PreferenceScoreMatrix& m);

// Rebuilds T from f and pairs it with the given cyclic part, as read back
// from the serialized form.
Decomposition make_decomposition(std::vector<double> potential,
                                 PreferenceScoreMatrix cyclic);

// ||T||_F^2 / (||T||_F^2 + ||C||_F^2). Throws DomainError on the zero game.
double transitivity_fraction(const PreferenceScoreMatrix& m);

// <A, B>_F.
double frobenius_inner(const PreferenceScoreMatrix& a,
                       const PreferenceScoreMatrix& b);

}  // namespace prefgame
