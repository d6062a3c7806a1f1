#include "prefgame/preference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prefgame/errors.hpp"
#include "prefgame/kernels.hpp"

namespace prefgame {

double score_to_prob(double s) {
  if (!std::isfinite(s)) throw DomainError("score_to_prob: non-finite score");
  return 1.0 / (1.0 + std::exp(-s));
}

double prob_to_score(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("prob_to_score: probability " + std::to_string(p) +
                      " is not strictly inside (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

PreferenceScoreMatrix::PreferenceScoreMatrix(std::size_t n)
    : n_(n), data_(n * n, 0.0) {}

PreferenceScoreMatrix PreferenceScoreMatrix::from_upper(
    std::size_t n, std::span<const double> upper) {
  if (upper.size() != n * (n - (n > 0 ? 1 : 0)) / 2) {
    throw ShapeError("upper triangle has " + std::to_string(upper.size()) +
                     " entries, expected " + std::to_string(n * (n - 1) / 2) +
                     " for n=" + std::to_string(n));
  }
  PreferenceScoreMatrix m(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double v = upper[k];
      if (!std::isfinite(v)) throw DomainError("score matrix entry not finite");
      m.data_[i * n + j] = v;
      m.data_[j * n + i] = -v;
    }
  }
  return m;
}

PreferenceScoreMatrix PreferenceScoreMatrix::from_full(
    std::size_t n, std::span<const double> full) {
  if (full.size() != n * n) {
    throw ShapeError("full matrix has " + std::to_string(full.size()) +
                     " entries, expected " + std::to_string(n * n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double a = full[i * n + j];
      const double b = full[j * n + i];
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("score matrix entry not finite");
      }
      if (std::fabs(a + b) > kSkewTolerance) {
        throw DomainError("score matrix not skew-symmetric at (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(full[i * n + j]);
  }
  return from_upper(n, upper);
}

PreferenceScoreMatrix PreferenceScoreMatrix::from_potential(
    std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(f[i] - f[j]);
  }
  return from_upper(n, upper);
}

std::vector<double> PreferenceScoreMatrix::upper() const {
  std::vector<double> out;
  out.reserve(n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(data_[i * n_ + j]);
  }
  return out;
}

double PreferenceScoreMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double PreferenceScoreMatrix::frobenius_squared() const {
  return kernels::dot(data_, data_);
}

bool PreferenceScoreMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return v == 0.0; });
}

PreferenceScoreMatrix PreferenceScoreMatrix::combine(
    double alpha, const PreferenceScoreMatrix& a, double beta,
    const PreferenceScoreMatrix& b) {
  if (a.n_ != b.n_) throw ShapeError("combine: matrix sizes differ");
  PreferenceScoreMatrix out(a.n_);
  kernels::blend(alpha, a.data_, beta, b.data_, out.data_);
  // The blend of two skew matrices is skew up to rounding; re-mirror so the
  // stored lower triangle is the exact negation of the upper one.
  for (std::size_t i = 0; i < out.n_; ++i) {
    out.data_[i * out.n_ + i] = 0.0;
    for (std::size_t j = i + 1; j < out.n_; ++j) {
      out.data_[j * out.n_ + i] = -out.data_[i * out.n_ + j];
    }
  }
  return out;
}

ProbabilityMatrix::ProbabilityMatrix(const PreferenceScoreMatrix& scores)
    : n_(scores.size()), data_(n_ * n_, 0.5) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double p = score_to_prob(scores(i, j));
      data_[i * n_ + j] = p;
      data_[j * n_ + i] = 1.0 - p;
    }
  }
}

TabularPolicy::TabularPolicy(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw DomainError("policy over an empty response set");
  double total = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v)) throw StateError("policy entry is not finite");
    if (v < 0.0) throw DomainError("policy entry is negative");
    total += v;
  }
  if (std::fabs(total - 1.0) > kSumTolerance) {
    throw DomainError("policy does not sum to 1 (sum = " +
                      std::to_string(total) + ")");
  }
}

TabularPolicy TabularPolicy::uniform(std::size_t n) {
  if (n == 0) throw DomainError("policy over an empty response set");
  return TabularPolicy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

TabularPolicy TabularPolicy::point_mass(std::size_t n, std::size_t i) {
  if (i >= n) throw DomainError("point mass index out of range");
  std::vector<double> p(n, 0.0);
  p[i] = 1.0;
  return TabularPolicy(std::move(p));
}

TabularPolicy TabularPolicy::from_weights(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw StateError("policy weight is not finite");
    if (w < 0.0) throw DomainError("policy weight is negative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("policy weights sum to zero");
  for (double& w : weights) w /= total;
  return TabularPolicy(std::move(weights));
}

double TabularPolicy::entropy() const {
  double h = 0.0;
  for (double v : p_) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

bool TabularPolicy::strictly_positive() const {
  return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
}

std::vector<double> centered_payoff(const PreferenceScoreMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // sigmoid(s) - 1/2 == tanh(s/2)/2, without cancellation near 0.
      const double v = 0.5 * std::tanh(0.5 * m(i, j));
      g[i * n + j] = v;
      g[j * n + i] = -v;
    }
  }
  return g;
}

namespace {

void check_sizes(const PreferenceScoreMatrix& m, const TabularPolicy& pi) {
  if (m.size() != pi.size()) {
    throw ShapeError("policy has " + std::to_string(pi.size()) +
                     " entries but the game has " + std::to_string(m.size()) +
                     " responses");
  }
}

}  // namespace

std::vector<double> win_advantages(const PreferenceScoreMatrix& m,
                                   const TabularPolicy& pi) {
  check_sizes(m, pi);
  const std::size_t n = m.size();
  const std::vector<double> g = centered_payoff(m);
  std::vector<double> adv(n);
  kernels::matvec(g, n, n, pi.probs(), adv);
  return adv;
}

double win_prob_vs_policy(const PreferenceScoreMatrix& m, std::size_t i,
                          const TabularPolicy& pi) {
  check_sizes(m, pi);
  if (i >= m.size()) throw ShapeError("response index out of range");
  double acc = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    acc += pi[j] * score_to_prob(m(i, j));
  }
  return acc;
}

double policy_vs_policy(const PreferenceScoreMatrix& m, const TabularPolicy& pi,
                        const TabularPolicy& other) {
  check_sizes(m, pi);
  check_sizes(m, other);
  const std::size_t n = m.size();
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = 0.5 * std::tanh(0.5 * m(i, j));
      dev += g * (pi[i] * other[j] - pi[j] * other[i]);
    }
  }
  return 0.5 + dev;
}

}  // namespace prefgame
