#include "prefgame/witnesses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "prefgame/errors.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// min_i sin(theta_i + phase) for theta_i = 2 pi i / n.
double hard_cycle_min(std::size_t n, double phase) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    m = std::min(m, std::sin(kTwoPi * static_cast<double>(i) / n + phase));
  }
  return m;
}

}  // namespace

PlanarEmbedding::PlanarEmbedding(std::size_t items, std::size_t subspaces)
    : items_(items),
      subspaces_(subspaces),
      magnitude_(items * subspaces, 0.0),
      angle_(items * subspaces, 0.0) {
  if (subspaces == 0) throw DomainError("embedding needs at least one plane");
}

std::size_t PlanarEmbedding::index(std::size_t item,
                                   std::size_t subspace) const {
  if (item >= items_ || subspace >= subspaces_) {
    throw DomainError("embedding index out of range");
  }
  return item * subspaces_ + subspace;
}

void PlanarEmbedding::set(std::size_t item, std::size_t subspace,
                          double magnitude, double angle) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude) ||
      !std::isfinite(angle)) {
    throw DomainError("embedding magnitude must be finite and >= 0");
  }
  const std::size_t k = index(item, subspace);
  magnitude_[k] = magnitude;
  angle_[k] = wrap_angle(angle);
}

void PlanarEmbedding::set_cartesian(std::size_t item, std::size_t subspace,
                                    double x, double y) {
  const double r = std::hypot(x, y);
  set(item, subspace, r, r > 0.0 ? std::atan2(y, x) : 0.0);
}

double PlanarEmbedding::magnitude(std::size_t item,
                                  std::size_t subspace) const {
  return magnitude_[index(item, subspace)];
}

double PlanarEmbedding::angle(std::size_t item, std::size_t subspace) const {
  return angle_[index(item, subspace)];
}

std::vector<double> PlanarEmbedding::cartesian(std::size_t item) const {
  std::vector<double> z(2 * subspaces_);
  for (std::size_t l = 0; l < subspaces_; ++l) {
    const std::size_t k = index(item, l);
    z[2 * l] = magnitude_[k] * std::cos(angle_[k]);
    z[2 * l + 1] = magnitude_[k] * std::sin(angle_[k]);
  }
  return z;
}

double geometric_score(const PlanarEmbedding& e, std::size_t i,
                       std::size_t j) {
  if (i >= e.items() || j >= e.items()) {
    throw DomainError("score index out of range");
  }
  if (i == j) return 0.0;
  double s = 0.0;
  for (std::size_t l = 0; l < e.subspaces(); ++l) {
    s += e.magnitude(i, l) * e.magnitude(j, l) *
         std::sin(e.angle(j, l) - e.angle(i, l));
  }
  return s;
}

std::vector<double> score_table(const PlanarEmbedding& e) {
  const std::size_t n = e.items();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = geometric_score(e, i, j);
      out[i * n + j] = s;
      out[j * n + i] = -s;
    }
  }
  return out;
}

SignPattern::SignPattern(std::size_t n) : n_(n), entries_(n * n, 0) {}

SignPattern::SignPattern(std::size_t n, std::vector<int> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n * n) {
    throw DomainError("sign pattern needs n*n entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (entries_[i * n + i] != 0) {
      throw DomainError("sign pattern diagonal must be 0");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const int s = entries_[i * n + j];
      if (s < -1 || s > 1) throw DomainError("sign entries must be -1, 0, 1");
      if (s != -entries_[j * n + i]) {
        throw DomainError("sign pattern is not antisymmetric at (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

void SignPattern::require(std::size_t i, std::size_t j, int sign) {
  if (i >= n_ || j >= n_ || i == j || sign < -1 || sign > 1) {
    throw DomainError("invalid sign requirement");
  }
  entries_[i * n_ + j] = sign;
  entries_[j * n_ + i] = -sign;
}

SignPattern SignPattern::cycle(std::size_t n) {
  if (n < 3) throw DomainError("a cycle needs at least 3 items");
  SignPattern p(n);
  for (std::size_t i = 0; i < n; ++i) p.require(i, (i + 1) % n, 1);
  return p;
}

SignPattern SignPattern::rotational(std::size_t n, bool dominant) {
  if (n < 3) throw DomainError("a cycle needs at least 3 items");
  SignPattern p(dominant ? n + 1 : n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t step = 1; 2 * step < n; ++step) {
      p.require(i, (i + step) % n, 1);
    }
  }
  if (dominant) {
    for (std::size_t i = 0; i < n; ++i) p.require(n, i, 1);
  }
  return p;
}

std::size_t SignPattern::constraint_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) c += entries_[i * n_ + j] != 0;
  }
  return c;
}

PatternCheck check_pattern(const PlanarEmbedding& e, const SignPattern& p) {
  if (e.items() != p.size()) {
    throw ShapeError("embedding and pattern sizes differ");
  }
  PatternCheck out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const int sign = p(i, j);
      if (sign == 0) continue;
      const double m = sign * geometric_score(e, i, j);
      ++out.total;
      if (m > kStrictMargin) ++out.satisfied;
      out.min_margin = std::min(out.min_margin, m);
    }
  }
  if (out.total == 0) out.min_margin = 0.0;
  return out;
}

PlanarEmbedding build_dominant_cycle_d2(std::size_t n) {
  if (n < 3) throw DomainError("dominant+cycle construction needs n >= 3");
  PlanarEmbedding e(n + 1, 2);
  for (std::size_t i = 0; i < n; ++i) {
    e.set(i, 0, 1.0, kTwoPi * static_cast<double>(i) / n);
    e.set(i, 1, 1.0, 0.0);
  }
  e.set(n, 0, 0.0, 0.0);
  e.set(n, 1, 1.0, -std::numbers::pi / 2.0);
  return e;
}

SemicircleReport d1_dominant_feasible(std::span<const double> angles) {
  if (angles.empty()) throw DomainError("need at least one angle");
  struct Point {
    double wrapped;
    double original;
  };
  std::vector<Point> pts;
  pts.reserve(angles.size());
  for (double a : angles) {
    if (!std::isfinite(a)) throw DomainError("angles must be finite");
    pts.push_back({wrap_angle(a), a});
  }
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.wrapped < b.wrapped; });

  // The occupied arc starts right after the widest empty gap.
  std::size_t start = 0;
  double widest = -1.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::size_t prev = (k + pts.size() - 1) % pts.size();
    double gap = pts[k].wrapped - pts[prev].wrapped;
    if (k == 0) gap += kTwoPi;
    if (gap > widest) {
      widest = gap;
      start = k;
    }
  }
  const double width = kTwoPi - widest;
  const double witness =
      pts[start].original + width / 2.0 - std::numbers::pi / 2.0;

  SemicircleReport report;
  report.margin = std::numeric_limits<double>::infinity();
  for (double a : angles) {
    report.margin = std::min(report.margin, std::sin(a - witness));
  }
  report.feasible = report.margin > kStrictMargin;
  if (report.feasible) report.witness = witness;
  return report;
}

HardCycleReport hard_cycle_infeasibility(std::size_t n, std::size_t subspaces,
                                         std::uint64_t seed,
                                         std::size_t samples) {
  if (n < 2) throw DomainError("hard cycle needs n >= 2");
  if (subspaces < 1) throw DomainError("hard cycle needs d >= 1");

  HardCycleReport report;
  report.n = n;
  report.subspaces = subspaces;

  constexpr std::size_t kGrid = 3600;
  const double step = kTwoPi / kGrid;
  double best = -std::numeric_limits<double>::infinity();
  double best_phase = 0.0;
  for (std::size_t k = 0; k < kGrid; ++k) {
    const double phase = step * static_cast<double>(k);
    const double v = hard_cycle_min(n, phase);
    if (v > best) {
      best = v;
      best_phase = phase;
    }
  }
  // Golden-section refinement inside the winning grid cell. The objective is
  // a min of sinusoids, unimodal on this scale.
  double lo = best_phase - step;
  double hi = best_phase + step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double a = hi - g * (hi - lo);
    const double b = lo + g * (hi - lo);
    if (hard_cycle_min(n, a) < hard_cycle_min(n, b)) {
      lo = a;
    } else {
      hi = b;
    }
  }
  const double mid = (lo + hi) / 2.0;
  if (hard_cycle_min(n, mid) > best) {
    best = hard_cycle_min(n, mid);
    best_phase = mid;
  }
  report.max_min_score = best;
  report.best_phase = wrap_angle(best_phase);
  report.feasible = best > kStrictMargin;

  // Random dominant candidates in all planes, scored against the hard cycle
  // and normalized by their amplitude.
  auto rng = substream(seed, "witness/hard-cycle");
  std::normal_distribution<double> normal(0.0, 1.0);
  double sampled = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    double a = 0.0;  // coefficient of cos(theta)
    double b = 0.0;  // coefficient of sin(theta)
    std::vector<double> x(subspaces), y(subspaces);
    for (std::size_t l = 0; l < subspaces; ++l) {
      x[l] = normal(rng);
      y[l] = normal(rng);
      a += -y[l];
      b += x[l];
    }
    // s(dominant, i) = sum_l (x_l sin(theta_i) - y_l cos(theta_i)).
    const double amplitude = std::hypot(a, b);
    if (amplitude == 0.0) continue;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = kTwoPi * static_cast<double>(i) / n;
      double score = 0.0;
      for (std::size_t l = 0; l < subspaces; ++l) {
        score += x[l] * std::sin(theta) - y[l] * std::cos(theta);
      }
      m = std::min(m, score / amplitude);
    }
    sampled = std::max(sampled, m);
  }
  report.sampled_max_min = samples == 0 ? 0.0 : sampled;
  return report;
}

CapacityResult pattern_capacity_search(const SignPattern& pattern,
                                       std::size_t subspaces,
                                       const CapacitySearchConfig& config) {
  if (subspaces < 1) throw DomainError("capacity search needs d >= 1");
  const std::size_t n = pattern.size();
  const std::size_t dim = 2 * subspaces;
  const double tau = config.temperature;
  if (!(tau > 0.0) || !(config.learning_rate > 0.0)) {
    throw DomainError("capacity search needs positive temperature and step");
  }

  struct Constraint {
    std::size_t i, j;
    double sign;
  };
  std::vector<Constraint> constraints;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pattern(i, j) != 0) constraints.push_back({i, j, double(pattern(i, j))});
    }
  }

  auto to_embedding = [&](const std::vector<double>& z) {
    PlanarEmbedding e(n, subspaces);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < subspaces; ++l) {
        e.set_cartesian(i, l, z[i * dim + 2 * l], z[i * dim + 2 * l + 1]);
      }
    }
    return e;
  };
  // Score of the Cartesian form: sum over planes of the 2-D cross product.
  auto score = [&](const std::vector<double>& z, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t l = 0; l < subspaces; ++l) {
      s += z[i * dim + 2 * l] * z[j * dim + 2 * l + 1] -
           z[i * dim + 2 * l + 1] * z[j * dim + 2 * l];
    }
    return s;
  };

  CapacityResult best;
  bool have_best = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(config.restarts, 1); ++r) {
    auto rng = substream(config.seed, "witness/capacity/" + std::to_string(r));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n * dim);
    for (double& v : z) v = normal(rng) / std::sqrt(static_cast<double>(dim));

    std::vector<double> grad(z.size());
    for (std::size_t it = 0; it < config.iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (const auto& c : constraints) {
        const double m = c.sign * score(z, c.i, c.j);
        // d/dm softplus(-m / tau)
        const double dm = -sigmoid(-m / tau) / tau;
        for (std::size_t l = 0; l < subspaces; ++l) {
          const std::size_t xi = c.i * dim + 2 * l, yi = xi + 1;
          const std::size_t xj = c.j * dim + 2 * l, yj = xj + 1;
          grad[xi] += dm * c.sign * z[yj];
          grad[yi] -= dm * c.sign * z[xj];
          grad[yj] += dm * c.sign * z[xi];
          grad[xj] -= dm * c.sign * z[yi];
        }
      }
      const double step =
          config.learning_rate * tau / std::max<std::size_t>(constraints.size(), 1);
      for (std::size_t k = 0; k < z.size(); ++k) z[k] -= step * grad[k];
      // Project every item back into the unit ball.
      for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) norm2 += z[i * dim + k] * z[i * dim + k];
        if (norm2 > 1.0) {
          const double inv = 1.0 / std::sqrt(norm2);
          for (std::size_t k = 0; k < dim; ++k) z[i * dim + k] *= inv;
        }
      }
    }

    PlanarEmbedding e = to_embedding(z);
    PatternCheck check = check_pattern(e, pattern);
    const bool better =
        !have_best || check.satisfied > best.check.satisfied ||
        (check.satisfied == best.check.satisfied &&
         check.min_margin > best.check.min_margin);
    if (better) {
      best.check = check;
      best.accuracy = check.accuracy();
      best.embedding = std::move(e);
      best.best_restart = r;
      have_best = true;
    }
  }
  return best;
}

}  // namespace prefgame
