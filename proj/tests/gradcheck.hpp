#pragma once

// Central finite-difference check of pair_loss_grad.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "prefgame/models.hpp"
#include "support.hpp"

namespace testing {

struct GradCheck {
  double relative_error = 0.0;  // ||g - g_fd|| / max(||g||, ||g_fd||, 1e-8)
  double analytic_norm = 0.0;
};

inline GradCheck finite_difference_check(const prefgame::PreferenceModel& model,
                                         const prefgame::PairDataset& data,
                                         bool train_weights, double step = 1e-6) {
  using namespace prefgame;
  const auto analytic =
      flatten_gradient(pair_loss_grad(model, data, train_weights).gradient, model);
  const auto base = flatten_parameters(model);
  // C1 and C2 sit right after the head parameters; without train_weights
  // they are constants and are left out of the comparison.
  std::size_t head_size = 0;
  if (model.reward) head_size += model.reward->weights.size();
  if (model.cyclic) {
    head_size += model.cyclic->projection.size() + model.cyclic->gate_weights.size() +
                 model.cyclic->gate_bias.size();
  }
  auto probe = model;
  std::vector<double> p = base;
  double diff2 = 0.0, a2 = 0.0, f2 = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const bool weight = k == head_size || k == head_size + 1;
    if (weight && !(train_weights && model.kind == ModelKind::kHrc)) continue;
    p[k] = base[k] + step;
    unflatten_parameters(p, probe);
    const double up = pair_loss(probe, data);
    p[k] = base[k] - step;
    unflatten_parameters(p, probe);
    const double down = pair_loss(probe, data);
    p[k] = base[k];
    const double fd = (up - down) / (2 * step);
    diff2 += (fd - analytic[k]) * (fd - analytic[k]);
    a2 += analytic[k] * analytic[k];
    f2 += fd * fd;
  }
  GradCheck r;
  r.analytic_norm = std::sqrt(a2);
  r.relative_error = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(f2), 1e-8});
  return r;
}

// A small mixed dataset: tabular ids with contexts, plus inline vectors.
inline prefgame::PairDataset random_pairs(Rng& rng, std::size_t items,
                                          std::size_t records, std::size_t dim,
                                          bool with_context) {
  using namespace prefgame;
  PairDataset data;
  for (std::size_t r = 0; r < records; ++r) {
    PairRecord rec;
    const std::size_t w = uniform_size(rng, 0, items - 1);
    std::size_t l = uniform_size(rng, 0, items - 2);
    if (l >= w) ++l;
    if (r % 3 == 2) {
      rec.winner.value = normal_vector(rng, dim);
      rec.loser.value = normal_vector(rng, dim);
    } else {
      rec.winner.id = "item" + std::to_string(w);
      rec.loser.id = "item" + std::to_string(l);
    }
    if (with_context) {
      if (r % 2 == 0) {
        rec.context = FeatureRef{"ctx" + std::to_string(r % 4), {}};
      } else {
        rec.context = FeatureRef{"", normal_vector(rng, dim)};
      }
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

// True when every table reward sits at least `margin` inside the clip.
inline bool clip_inactive(const prefgame::PreferenceModel& model, double margin) {
  if (!model.reward || !model.reward->clip) return true;
  for (std::size_t i = 0; i < model.items.size(); ++i) {
    const auto h = model.items.row(i);
    double a = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) a += model.reward->weights[k] * h[k];
    if (std::abs(a) > *model.reward->clip - margin) return false;
  }
  return true;
}

}  // namespace testing
