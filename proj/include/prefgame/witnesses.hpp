#pragma once

// What a rank-2d skew-symmetric model can and cannot represent.
//
// An embedding of item i is a point z_il = L_il (cos phi_il, sin phi_il) in
// each of d planes, and the bilinear score becomes
//
//   s(i, j) = sum_l L_il L_jl sin(phi_jl - phi_il).
//
// With a single plane the dominant item must see every cycle item within an
// open half-turn, which rules out a cycle around it. Two planes are enough:
// one carries the cycle and the other carries the dominance.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace prefgame {

// Scores at or below this are not a strict preference.
inline constexpr double kStrictMargin = 1e-9;

class PlanarEmbedding {
 public:
  PlanarEmbedding() = default;
  PlanarEmbedding(std::size_t items, std::size_t subspaces);

  // Polar coordinates; magnitudes must be >= 0. Angles are wrapped into
  // [0, 2 pi).
  void set(std::size_t item, std::size_t subspace, double magnitude,
           double angle);
  // Cartesian coordinates (x, y) in one plane.
  void set_cartesian(std::size_t item, std::size_t subspace, double x,
                     double y);

  std::size_t items() const { return items_; }
  std::size_t subspaces() const { return subspaces_; }
  double magnitude(std::size_t item, std::size_t subspace) const;
  double angle(std::size_t item, std::size_t subspace) const;

  // (x_1, y_1, ..., x_d, y_d) for one item.
  std::vector<double> cartesian(std::size_t item) const;

 private:
  std::size_t index(std::size_t item, std::size_t subspace) const;

  std::size_t items_ = 0;
  std::size_t subspaces_ = 0;
  std::vector<double> magnitude_;
  std::vector<double> angle_;
};

// sum_l L_il L_jl sin(phi_jl - phi_il).
double geometric_score(const PlanarEmbedding& e, std::size_t i, std::size_t j);

// All pairwise scores, row-major.
std::vector<double> score_table(const PlanarEmbedding& e);

// Required strict preferences: +1 means row beats column, -1 the reverse,
// 0 unconstrained.
class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(std::size_t n);
  // Throws DomainError unless entries are in {-1, 0, 1}, the diagonal is 0
  // and entry (i, j) = -entry (j, i).
  SignPattern(std::size_t n, std::vector<int> entries);

  // Rock-paper-scissors style cycle on n items, item i beating item i+1.
  static SignPattern cycle(std::size_t n);
  // Regular tournament of the construction below: i beats j when
  // (j - i) mod n is in [1, (n-1)/2]. For even n the antipodal pairs are left
  // unconstrained. When `dominant` is set, item n beats every cycle item.
  static SignPattern rotational(std::size_t n, bool dominant);

  std::size_t size() const { return n_; }
  int operator()(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }
  // Sets (i, j) to `sign` and (j, i) to its negation.
  void require(std::size_t i, std::size_t j, int sign);
  std::size_t constraint_count() const;  // pairs i < j with nonzero sign

 private:
  std::size_t n_ = 0;
  std::vector<int> entries_;
};

struct PatternCheck {
  std::size_t satisfied = 0;
  std::size_t total = 0;
  double min_margin = 0.0;  // min over constraints of sign * score
  double accuracy() const {
    return total == 0 ? 1.0 : static_cast<double>(satisfied) / total;
  }
  bool ok() const { return satisfied == total; }
};

// Counts constraints with sign * score > kStrictMargin.
PatternCheck check_pattern(const PlanarEmbedding& e, const SignPattern& p);

// Cycle items 0..n-1 at angles 2 pi i / n in the first plane (unit length)
// and at angle 0 in the second; dominant item n at length 0 in the first
// plane and angle -pi/2 in the second. Then s(n, i) = 1 for every i.
// Throws DomainError for n < 3.
PlanarEmbedding build_dominant_cycle_d2(std::size_t n);

struct SemicircleReport {
  bool feasible = false;
  std::optional<double> witness;  // angle of a dominant item
  double margin = 0.0;            // min_i sin(theta_i - witness)
};

// Whether a unit dominant item in one plane can beat every item at the given
// angles, i.e. whether the angles fit in an open half-turn. The witness sits
// a quarter turn behind the midpoint of the occupied arc. Throws DomainError
// on an empty or non-finite input.
SemicircleReport d1_dominant_feasible(std::span<const double> angles);

struct HardCycleReport {
  std::size_t n = 0;
  std::size_t subspaces = 0;
  double max_min_score = 0.0;  // max over phase of min_i sin(theta_i + phase)
  double best_phase = 0.0;
  bool feasible = false;
  // Largest normalized min-score found over random dominant embeddings in
  // all d planes, as a numerical check that every candidate collapses to a
  // single sinusoid.
  double sampled_max_min = 0.0;
};

// The hard cycle puts item i at angle 2 pi i / n in every plane with unit
// length. Any dominant then scores A sin(theta_i + phase) against item i.
// Throws DomainError for n < 2 or d < 1.
HardCycleReport hard_cycle_infeasibility(std::size_t n, std::size_t subspaces,
                                         std::uint64_t seed = 0,
                                         std::size_t samples = 2000);

struct CapacitySearchConfig {
  std::size_t restarts = 16;
  std::size_t iterations = 3000;
  double learning_rate = 0.5;
  double temperature = 0.05;
  std::uint64_t seed = 0;
};

struct CapacityResult {
  double accuracy = 0.0;
  PatternCheck check;
  PlanarEmbedding embedding;
  std::size_t best_restart = 0;
};

// Multi-restart gradient search for an embedding satisfying as many strict
// signs as possible. Points are kept in the unit ball and fitted with a
// logistic surrogate. Deterministic for a given seed.
CapacityResult pattern_capacity_search(const SignPattern& pattern,
                                       std::size_t subspaces,
                                       const CapacitySearchConfig& config = {});

}  // namespace prefgame
