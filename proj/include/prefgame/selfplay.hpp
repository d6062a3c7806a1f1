#pragma once

// Tabular self-play by multiplicative weights against a preference oracle:
//
//   pi_{t+1}(y) ∝ pi_t(y) exp(eta * P_t(y > pi_t)).
//
// The oracle is either a fixed game or the blend
//
//   s_t = (1 + lambda / t^p) T + (1 - lambda / t^p) C,    p = 1/2 by default,
//
// of a transitive part T and a cyclic part C, which tends to T + C. The
// mixture of the iterates is tracked and its duality gap under T + C is
// reported.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prefgame/preference.hpp"

namespace prefgame {

class OracleSchedule {
 public:
  enum class Kind { kStatic, kHrc };

  static constexpr double kDefaultExponent = 0.5;

  // A fixed game.
  static OracleSchedule fixed(PreferenceScoreMatrix m);

  // The blended schedule. Checks that `transitive` is a potential game and
  // `cyclic` has zero row sums (DomainError otherwise, ShapeError on a size
  // mismatch).
  static OracleSchedule hrc(PreferenceScoreMatrix transitive,
                            PreferenceScoreMatrix cyclic, double lambda,
                            double exponent = kDefaultExponent);

  Kind kind() const { return kind_; }
  std::size_t size() const { return limit_.size(); }
  double lambda() const { return lambda_; }
  double exponent() const { return exponent_; }
  const PreferenceScoreMatrix& transitive() const { return transitive_; }
  const PreferenceScoreMatrix& cyclic() const { return cyclic_; }

  // s_t; DomainError for t < 1.
  PreferenceScoreMatrix score(std::size_t t) const;
  // The limit game T + C (or the fixed game).
  const PreferenceScoreMatrix& limit() const { return limit_; }

  // Coefficients (1 + lambda / t^p, 1 - lambda / t^p); (1, 1) when static.
  std::pair<double, double> coefficients(std::size_t t) const;

  // Human-readable notes, e.g. a coefficient turning negative early on.
  std::vector<std::string> warnings() const;

 private:
  Kind kind_ = Kind::kStatic;
  PreferenceScoreMatrix transitive_;
  PreferenceScoreMatrix cyclic_;
  PreferenceScoreMatrix limit_;
  double lambda_ = 0.0;
  double exponent_ = kDefaultExponent;
};

enum class Estimation { kExact, kMonteCarlo };

std::string_view estimation_name(Estimation e);
Estimation parse_estimation(std::string_view name);

struct SolverConfig {
  std::optional<double> eta;  // unset: log-prior step ||log pi_0||_inf / sqrt(T)
  std::size_t iterations = 1000;
  Estimation estimation = Estimation::kExact;
  std::size_t samples = 64;  // K for the Monte Carlo estimator
  std::uint64_t seed = 0;
  // 0 checkpoints at powers of two; k > 0 checkpoints every k steps. The
  // final iteration is always a checkpoint.
  std::size_t checkpoint_stride = 0;

  // Throws DomainError on T = 0, K = 0 with Monte Carlo, or eta <= 0.
  void validate() const;
};

// The step used by a run of `config` from `start`.
double resolve_eta(const SolverConfig& config, const TabularPolicy& start);

// Estimated P(y_i > pi) for every i.
std::vector<double> preference_vs_policy(const PreferenceScoreMatrix& m,
                                         const TabularPolicy& pi,
                                         Estimation estimation,
                                         std::size_t samples,
                                         std::mt19937_64* rng);

// One multiplicative-weights step. Returns `pi` unchanged when every
// response ties. Throws StateError on a policy containing NaN, DomainError
// on eta <= 0, ShapeError on a size mismatch. `rng` is required for Monte
// Carlo estimation.
TabularPolicy sppo_step(const TabularPolicy& pi, const PreferenceScoreMatrix& m,
                        double eta, Estimation estimation = Estimation::kExact,
                        std::size_t samples = 0,
                        std::mt19937_64* rng = nullptr);

// 2 (max_i P(y_i > pi) - 1/2), never negative.
double duality_gap(const PreferenceScoreMatrix& m, const TabularPolicy& pi);

struct Checkpoint {
  std::size_t t = 0;
  TabularPolicy policy;   // pi_t, the iterate played at step t
  TabularPolicy mixture;  // (1/t) sum_{i <= t} pi_i
  double gap = 0.0;       // of the mixture, under the limit game
  double last_iterate_gap = 0.0;
  double epsilon = 0.0;        // max |s_limit - s_t|
  double epsilon_bound = 0.0;  // |lambda| / t^p * (||T|| + ||C||)
  double entropy = 0.0;        // of pi_t
};

struct TrajectoryReport {
  double eta = 0.0;
  std::vector<Checkpoint> checkpoints;
  TabularPolicy final_policy;
  TabularPolicy final_mixture;
  double final_gap = 0.0;
  // gap * sqrt(t) at every checkpoint.
  std::vector<double> scaled_gaps;
};

// Requires a strictly positive start of the right size.
TrajectoryReport run(const OracleSchedule& schedule, const SolverConfig& config,
                     const TabularPolicy& start);

struct EpsilonReport {
  std::vector<double> epsilon;  // t = 1..T
  std::vector<double> bound;    // |lambda| / t^p * C'
  double average = 0.0;
  double average_bound = 0.0;   // 2 |lambda| C' / sqrt(T)
  double scale = 0.0;           // C' = ||T||_inf + ||C||_inf
  bool within_pointwise = true;
  bool within_average = true;
};

// Oracle error of the schedule over t = 1..T. DomainError for a static
// schedule or T = 0.
EpsilonReport epsilon_schedule_check(const OracleSchedule& schedule,
                                     std::size_t iterations);

struct NashOracleConfig {
  double tolerance = 1e-3;
  std::size_t max_iterations = 20'000'000;
  // Refine the fictitious-play estimate by solving for an exact equilibrium
  // on its leading supports.
  bool polish = true;
};

// Symmetric equilibrium of the game with payoff sigmoid(M) - 1/2, by
// fictitious play followed by an exact solve on the supports it suggests.
// Throws OracleError carrying the best policy when neither reaches the
// tolerance, DomainError above 50 actions.
TabularPolicy nash_oracle(const PreferenceScoreMatrix& m,
                          const NashOracleConfig& config = {});

}  // namespace prefgame
