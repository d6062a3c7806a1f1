#include "prefgame/selfplay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include <Eigen/Dense>

#include "prefgame/decomposition.hpp"
#include "prefgame/errors.hpp"
#include "prefgame/kernels.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {

namespace {

constexpr double kStructureTolerance = 1e-9;
constexpr std::size_t kMaxOracleActions = 50;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double decay(std::size_t t, double exponent) {
  const double td = static_cast<double>(t);
  return exponent == 0.5 ? std::sqrt(td) : std::pow(td, exponent);
}

double payoff_gap(const std::vector<double>& g, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> adv(n);
  kernels::matvec(g, n, n, x, adv);
  return std::max(0.0, 2.0 * *std::max_element(adv.begin(), adv.end()));
}

// Exact equilibria on candidate supports. Actions are ranked by `weights`;
// for each prefix S the system (G x)_S = 0, sum x = 1 is solved and kept
// when x is non-negative. Returns the candidate with the smallest gap, or
// nothing.
std::optional<std::pair<std::vector<double>, double>> polish_support(
    const std::vector<double>& g, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  std::optional<std::pair<std::vector<double>, double>> best;
  for (std::size_t k = 1; k <= n; ++k) {
    Eigen::MatrixXd a(k + 1, k);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) a(r, c) = g[order[r] * n + order[c]];
    }
    a.row(k).setOnes();
    b(k) = 1.0;
    const Eigen::VectorXd xs = a.colPivHouseholderQr().solve(b);
    if (!xs.allFinite() || xs.minCoeff() < -1e-12) continue;
    std::vector<double> x(n, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += x[order[c]] = std::max(0.0, xs(c));
    if (!(total > 0.0)) continue;
    for (double& v : x) v /= total;
    const double gap = payoff_gap(g, x);
    if (!best || gap < best->second) best.emplace(std::move(x), gap);
  }
  return best;
}

bool is_power_of_two(std::size_t t) { return t != 0 && (t & (t - 1)) == 0; }

}  // namespace

OracleSchedule OracleSchedule::fixed(PreferenceScoreMatrix m) {
  OracleSchedule s;
  s.kind_ = Kind::kStatic;
  s.limit_ = std::move(m);
  return s;
}

OracleSchedule OracleSchedule::hrc(PreferenceScoreMatrix transitive,
                                   PreferenceScoreMatrix cyclic, double lambda,
                                   double exponent) {
  if (transitive.size() != cyclic.size()) {
    throw ShapeError("transitive and cyclic parts differ in size");
  }
  if (!std::isfinite(lambda) || !std::isfinite(exponent) || exponent <= 0.0) {
    throw DomainError("schedule needs finite lambda and a positive exponent");
  }
  const std::size_t n = transitive.size();

  const auto f = decompose(transitive).potential;
  const auto rebuilt = PreferenceScoreMatrix::from_potential(f);
  const double t_scale = std::max(1.0, transitive.max_abs());
  if (kernels::max_abs_diff(rebuilt.data(), transitive.data()) >
      kStructureTolerance * t_scale) {
    throw DomainError("transitive part is not a potential game");
  }
  const double c_scale = std::max(1.0, cyclic.max_abs()) * std::max<double>(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(kernels::sum(cyclic.row(i))) > kStructureTolerance * c_scale) {
      throw DomainError("cyclic part has a nonzero row sum at row " +
                        std::to_string(i));
    }
  }

  OracleSchedule s;
  s.kind_ = Kind::kHrc;
  s.limit_ = PreferenceScoreMatrix::combine(1.0, transitive, 1.0, cyclic);
  s.transitive_ = std::move(transitive);
  s.cyclic_ = std::move(cyclic);
  s.lambda_ = lambda;
  s.exponent_ = exponent;
  return s;
}

std::pair<double, double> OracleSchedule::coefficients(std::size_t t) const {
  if (t < 1) throw DomainError("schedule time starts at 1");
  if (kind_ == Kind::kStatic) return {1.0, 1.0};
  const double shift = lambda_ / decay(t, exponent_);
  return {1.0 + shift, 1.0 - shift};
}

PreferenceScoreMatrix OracleSchedule::score(std::size_t t) const {
  const auto [a, b] = coefficients(t);
  if (kind_ == Kind::kStatic) return limit_;
  return PreferenceScoreMatrix::combine(a, transitive_, b, cyclic_);
}

std::vector<std::string> OracleSchedule::warnings() const {
  std::vector<std::string> out;
  if (kind_ != Kind::kHrc) return out;
  // |lambda| / t^p > 1 exactly while t < |lambda|^(1/p).
  if (std::abs(lambda_) > 1.0) {
    const double until = std::pow(std::abs(lambda_), 1.0 / exponent_);
    out.push_back(std::string(lambda_ > 0 ? "cyclic" : "transitive") +
                  " coefficient is negative for t < " + std::to_string(until));
  }
  return out;
}

std::string_view estimation_name(Estimation e) {
  return e == Estimation::kExact ? "exact" : "monte_carlo";
}

Estimation parse_estimation(std::string_view name) {
  if (name == "exact") return Estimation::kExact;
  if (name == "monte_carlo") return Estimation::kMonteCarlo;
  throw DomainError("unknown estimation mode: " + std::string(name));
}

void SolverConfig::validate() const {
  if (iterations == 0) throw DomainError("iterations must be >= 1");
  if (estimation == Estimation::kMonteCarlo && samples == 0) {
    throw DomainError("Monte Carlo estimation needs samples >= 1");
  }
  if (eta && !(*eta > 0.0 && std::isfinite(*eta))) {
    throw DomainError("eta must be positive");
  }
}

double resolve_eta(const SolverConfig& config, const TabularPolicy& start) {
  if (config.eta) return *config.eta;
  double log_norm = 0.0;
  for (double p : start.probs()) log_norm = std::max(log_norm, -std::log(p));
  // A point-mass start has log-norm 0; fall back to the uniform prior.
  if (log_norm == 0.0) log_norm = std::log(static_cast<double>(start.size()));
  if (!(log_norm > 0.0) || !std::isfinite(log_norm)) {
    throw DomainError("cannot derive eta from this start policy");
  }
  return log_norm / std::sqrt(static_cast<double>(config.iterations));
}

std::vector<double> preference_vs_policy(const PreferenceScoreMatrix& m,
                                         const TabularPolicy& pi,
                                         Estimation estimation,
                                         std::size_t samples,
                                         std::mt19937_64* rng) {
  const std::size_t n = m.size();
  if (pi.size() != n) throw ShapeError("policy and game sizes differ");
  if (estimation == Estimation::kExact) {
    auto adv = win_advantages(m, pi);
    for (double& a : adv) a += 0.5;
    return adv;
  }
  if (samples == 0) throw DomainError("Monte Carlo estimation needs samples");
  if (rng == nullptr) throw DomainError("Monte Carlo estimation needs an rng");
  std::discrete_distribution<std::size_t> draw(pi.probs().begin(),
                                               pi.probs().end());
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t k = 0; k < samples; ++k) ++counts[draw(*rng)];
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (counts[j] != 0) s += static_cast<double>(counts[j]) * sigmoid(m(i, j));
    }
    out[i] = s / static_cast<double>(samples);
  }
  return out;
}

TabularPolicy sppo_step(const TabularPolicy& pi, const PreferenceScoreMatrix& m,
                        double eta, Estimation estimation, std::size_t samples,
                        std::mt19937_64* rng) {
  for (double p : pi.probs()) {
    if (std::isnan(p)) throw StateError("policy contains NaN");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw DomainError("eta must be positive");
  }
  const auto pref = preference_vs_policy(m, pi, estimation, samples, rng);
  const double top = *std::max_element(pref.begin(), pref.end());
  if (std::all_of(pref.begin(), pref.end(),
                  [&](double v) { return v == top; })) {
    return pi;
  }
  std::vector<double> w(pi.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = pi[i] * std::exp(eta * (pref[i] - top));
  }
  return TabularPolicy::from_weights(std::move(w));
}

double duality_gap(const PreferenceScoreMatrix& m, const TabularPolicy& pi) {
  if (pi.size() != m.size()) throw ShapeError("policy and game sizes differ");
  const auto adv = win_advantages(m, pi);
  const double best = *std::max_element(adv.begin(), adv.end());
  return std::max(0.0, 2.0 * best);
}

TrajectoryReport run(const OracleSchedule& schedule, const SolverConfig& config,
                     const TabularPolicy& start) {
  config.validate();
  const std::size_t n = schedule.size();
  if (start.size() != n) throw ShapeError("start policy and game sizes differ");
  if (!start.strictly_positive()) {
    throw DomainError("start policy must be strictly positive");
  }

  TrajectoryReport report;
  report.eta = resolve_eta(config, start);
  auto rng = substream(config.seed, "selfplay/estimator");
  const double scale =
      schedule.kind() == OracleSchedule::Kind::kHrc
          ? schedule.transitive().max_abs() + schedule.cyclic().max_abs()
          : 0.0;

  TabularPolicy pi = start;
  std::vector<double> mixture(n, 0.0);
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    const double inv_t = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < n; ++i) {
      mixture[i] += (pi[i] - mixture[i]) * inv_t;
    }
    const bool static_game = schedule.kind() == OracleSchedule::Kind::kStatic;
    const PreferenceScoreMatrix current =
        static_game ? PreferenceScoreMatrix() : schedule.score(t);
    const PreferenceScoreMatrix& m_t = static_game ? schedule.limit() : current;

    const bool checkpoint =
        t == config.iterations ||
        (config.checkpoint_stride == 0 ? is_power_of_two(t)
                                       : t % config.checkpoint_stride == 0);
    if (checkpoint) {
      Checkpoint c;
      c.t = t;
      c.policy = pi;
      c.mixture = TabularPolicy::from_weights(mixture);
      c.gap = duality_gap(schedule.limit(), c.mixture);
      c.last_iterate_gap = duality_gap(schedule.limit(), pi);
      c.epsilon = kernels::max_abs_diff(schedule.limit().data(), m_t.data());
      c.epsilon_bound = std::abs(schedule.lambda()) /
                        decay(t, schedule.exponent()) * scale;
      c.entropy = pi.entropy();
      report.scaled_gaps.push_back(c.gap * std::sqrt(static_cast<double>(t)));
      report.checkpoints.push_back(std::move(c));
    }
    if (t < config.iterations) {
      pi = sppo_step(pi, m_t, report.eta, config.estimation, config.samples,
                     &rng);
    }
  }
  report.final_policy = pi;
  report.final_mixture = report.checkpoints.back().mixture;
  report.final_gap = report.checkpoints.back().gap;
  return report;
}

EpsilonReport epsilon_schedule_check(const OracleSchedule& schedule,
                                     std::size_t iterations) {
  if (schedule.kind() != OracleSchedule::Kind::kHrc) {
    throw DomainError("epsilon check needs a blended schedule");
  }
  if (iterations == 0) throw DomainError("iterations must be >= 1");
  EpsilonReport r;
  const double lam = std::abs(schedule.lambda());
  r.scale = schedule.transitive().max_abs() + schedule.cyclic().max_abs();
  r.epsilon.reserve(iterations);
  r.bound.reserve(iterations);
  double total = 0.0;
  for (std::size_t t = 1; t <= iterations; ++t) {
    const auto s_t = schedule.score(t);
    const double eps = kernels::max_abs_diff(schedule.limit().data(), s_t.data());
    const double bound = lam / decay(t, schedule.exponent()) * r.scale;
    r.epsilon.push_back(eps);
    r.bound.push_back(bound);
    // Rounding in the blend can exceed an exact bound by a few ulps.
    if (eps > bound * (1.0 + 1e-12) + 1e-15) r.within_pointwise = false;
    total += eps;
  }
  r.average = total / static_cast<double>(iterations);
  r.average_bound = 2.0 * lam * r.scale / std::sqrt(static_cast<double>(iterations));
  r.within_average = r.average <= r.average_bound * (1.0 + 1e-12) + 1e-15;
  return r;
}

TabularPolicy nash_oracle(const PreferenceScoreMatrix& m,
                          const NashOracleConfig& config) {
  const std::size_t n = m.size();
  if (n == 0) throw DomainError("empty game");
  if (n > kMaxOracleActions) {
    throw DomainError("equilibrium oracle is limited to 50 actions");
  }
  const auto g = centered_payoff(m);

  // Fictitious play from a uniform prior of unit weight. `payoff` holds
  // G * counts, so the mixture's gap is 2 max(payoff) / total.
  std::vector<double> counts(n, 1.0 / static_cast<double>(n));
  std::vector<double> payoff(n, 0.0);
  kernels::matvec(g, n, n, counts, payoff);
  double total = 1.0;

  std::vector<double> best_counts = counts;
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<double> column(n);
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const auto top = std::max_element(payoff.begin(), payoff.end());
    const double gap = std::max(0.0, 2.0 * *top / total);
    if (gap < best_gap) {
      best_gap = gap;
      best_counts = counts;
    }
    if (gap <= config.tolerance) break;
    const std::size_t a = static_cast<std::size_t>(top - payoff.begin());
    // Column a of a skew matrix is minus row a.
    kernels::axpy(-1.0, {g.data() + a * n, n}, payoff);
    counts[a] += 1.0;
    total += 1.0;
  }
  // Fictitious play converges slowly; its support is then solved exactly.
  if (auto polished = config.polish ? polish_support(g, best_counts) : std::nullopt;
      polished && polished->second < best_gap) {
    best_counts = std::move(polished->first);
    best_gap = polished->second;
  }
  auto best = TabularPolicy::from_weights(best_counts);
  if (best_gap > config.tolerance) {
    throw OracleError("equilibrium oracle did not reach tolerance (gap " +
                          std::to_string(best_gap) + ")",
                      std::vector<double>(best.probs().begin(), best.probs().end()));
  }
  return best;
}

}  // namespace prefgame
