#pragma once

// Pairwise preference primitives: logit scores, win probabilities, and
// tabular policies over a finite response set.
//
// Scores are the canonical representation. A score s(i, j) is the logit of
// the probability that response i is preferred to response j, so
// P(i > j) = sigmoid(s(i, j)) and s is skew-symmetric.

#include <cstddef>
#include <span>
#include <vector>

namespace prefgame {

// sigmoid(s). Throws DomainError for non-finite s.
double score_to_prob(double s);

// log(p / (1 - p)). Throws DomainError unless 0 < p < 1. Hard labels are
// rejected rather than clamped.
double prob_to_score(double p);

// Skew-symmetric n x n matrix of logit scores, stored dense row-major. Only
// the strict upper triangle is ever taken from the caller; the lower
// triangle is its exact negation and the diagonal is zero.
class PreferenceScoreMatrix {
 public:
  static constexpr double kSkewTolerance = 1e-12;

  PreferenceScoreMatrix() = default;

  // n x n zero game.
  explicit PreferenceScoreMatrix(std::size_t n);

  // `upper` holds the strict upper triangle row-major: (0,1), (0,2), ...,
  // (0,n-1), (1,2), ... and must have n(n-1)/2 finite entries.
  static PreferenceScoreMatrix from_upper(std::size_t n,
                                          std::span<const double> upper);

  // Validating constructor for a full row-major matrix. Rejects entries
  // that are non-finite or violate skew-symmetry by more than
  // kSkewTolerance.
  static PreferenceScoreMatrix from_full(std::size_t n,
                                         std::span<const double> full);

  // Pure potential game M(i, j) = f[i] - f[j].
  static PreferenceScoreMatrix from_potential(std::span<const double> f);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  std::span<const double> data() const { return data_; }
  std::vector<double> upper() const;

  // Largest |entry|.
  double max_abs() const;
  double frobenius_squared() const;
  bool is_zero() const;

  // alpha * a + beta * b, entrywise. Shapes must match.
  static PreferenceScoreMatrix combine(double alpha,
                                       const PreferenceScoreMatrix& a,
                                       double beta,
                                       const PreferenceScoreMatrix& b);

  friend bool operator==(const PreferenceScoreMatrix&,
                         const PreferenceScoreMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// P(i > j) for every pair, derived from a score matrix. p(i, j) + p(j, i)
// is exactly 1 as stored.
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(const PreferenceScoreMatrix& scores);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Probability vector over n responses.
class TabularPolicy {
 public:
  static constexpr double kSumTolerance = 1e-12;

  TabularPolicy() = default;

  // Validates: finite, non-negative, sums to 1 within kSumTolerance.
  explicit TabularPolicy(std::vector<double> probs);

  static TabularPolicy uniform(std::size_t n);
  static TabularPolicy point_mass(std::size_t n, std::size_t i);
  // Normalizes non-negative weights with a positive sum.
  static TabularPolicy from_weights(std::vector<double> weights);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }

  double entropy() const;
  bool strictly_positive() const;

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

 private:
  std::vector<double> p_;
};

// sigmoid(M) - 1/2 as a dense row-major matrix. It is skew-symmetric, which
// lets the expected payoff of a policy against itself cancel exactly.
std::vector<double> centered_payoff(const PreferenceScoreMatrix& m);

// (sigmoid(M) - 1/2) pi for every response: the advantage of each pure
// response over a tie against pi.
std::vector<double> win_advantages(const PreferenceScoreMatrix& m,
                                   const TabularPolicy& pi);

// P(y_i > pi) = sum_j pi[j] sigmoid(M(i, j)).
double win_prob_vs_policy(const PreferenceScoreMatrix& m, std::size_t i,
                          const TabularPolicy& pi);

// P(pi > pi') = pi^T sigmoid(M) pi'. Evaluated as 1/2 plus the
// skew-symmetric part so that policy_vs_policy(m, p, p) == 0.5 exactly and
// swapping the arguments negates the deviation from 1/2 exactly.
double policy_vs_policy(const PreferenceScoreMatrix& m, const TabularPolicy& pi,
                        const TabularPolicy& other);

}  // namespace prefgame
