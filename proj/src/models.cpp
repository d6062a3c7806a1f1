#include "prefgame/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "prefgame/errors.hpp"
#include "prefgame/kernels.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

void require_dim(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw ShapeError(std::string(what) + " has length " +
                     std::to_string(v.size()) + ", expected " +
                     std::to_string(n));
  }
}

enum class Source { kZero, kItem, kContext, kInline };

struct Resolved {
  std::span<const double> value;
  Source source = Source::kZero;
  std::size_t index = 0;
};

class Resolver {
 public:
  explicit Resolver(const PreferenceModel& model)
      : model_(model), zero_(model.feature_dim, 0.0) {}

  Resolved context(const std::optional<FeatureRef>& ref) const {
    if (!ref) return {zero_, Source::kZero, 0};
    return resolve(*ref, model_.contexts, Source::kContext, "context");
  }
  Resolved item(const FeatureRef& ref) const {
    return resolve(ref, model_.items, Source::kItem, "item");
  }

 private:
  Resolved resolve(const FeatureRef& ref, const FeatureTable& table,
                   Source source, const char* what) const {
    if (ref.is_id()) {
      auto idx = table.find(ref.id);
      if (!idx) {
        throw DomainError(std::string("unknown ") + what + " id '" + ref.id +
                          "'");
      }
      return {table.row(*idx), source, *idx};
    }
    require_dim(ref.value, model_.feature_dim, what);
    return {ref.value, Source::kInline, 0};
  }

  const PreferenceModel& model_;
  std::vector<double> zero_;
};

// Forward pass of the cyclic head for one side of a pair.
struct Embedding {
  std::vector<double> u;  // W_c h
  std::vector<double> v;  // normalized (or u)
  double norm = 0.0;
};

Embedding embed_full(const CyclicHead& head, std::span<const double> h) {
  const std::size_t k = head.embedding_dim();
  Embedding e;
  e.u.resize(k);
  kernels::matvec(head.projection, k, h.size(), h, e.u);
  e.norm = std::sqrt(kernels::dot(e.u, e.u));
  e.v = e.u;
  if (head.unit_norm) {
    const double denom = std::max(e.norm, kNormEpsilon);
    for (double& x : e.v) x /= denom;
  }
  return e;
}

// dL/du from dL/dv through the optional normalization.
std::vector<double> backprop_norm(const CyclicHead& head, const Embedding& e,
                                  std::span<const double> dv) {
  std::vector<double> du(dv.begin(), dv.end());
  if (!head.unit_norm) return du;
  if (e.norm <= kNormEpsilon) {
    for (double& x : du) x /= kNormEpsilon;
    return du;
  }
  const double proj = kernels::dot(e.v, dv);
  for (std::size_t i = 0; i < du.size(); ++i) {
    du[i] = (dv[i] - e.v[i] * proj) / e.norm;
  }
  return du;
}

struct GateState {
  std::vector<double> pre;  // W_g x + b_g
  std::vector<double> lambda;
};

GateState gate_forward(const CyclicHead& head, std::span<const double> x) {
  GateState g;
  const std::size_t d = head.subspaces;
  g.lambda.assign(d, 1.0);
  if (!head.gating) return g;
  g.pre.resize(d);
  kernels::matvec(head.gate_weights, d, x.size(), x, g.pre);
  for (std::size_t k = 0; k < d; ++k) {
    g.pre[k] += head.gate_bias[k];
    g.lambda[k] = softplus(g.pre[k]);
  }
  return g;
}

// sum_k lambda_k^2 (a[2k] b[2k+1] - a[2k+1] b[2k])
double skew_form(std::span<const double> lambda, std::span<const double> a,
                 std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double q = lambda[k] * lambda[k];
    s += q * (a[2 * k] * b[2 * k + 1] - a[2 * k + 1] * b[2 * k]);
  }
  return s;
}

void add_to(std::map<std::size_t, std::vector<double>>& rows, std::size_t idx,
            double alpha, std::span<const double> v) {
  auto [it, inserted] = rows.try_emplace(idx);
  if (inserted) it->second.assign(v.size(), 0.0);
  kernels::axpy(alpha, v, it->second);
}

void accumulate_feature(ModelGradient& g, const Resolved& r, double alpha,
                        std::span<const double> v) {
  if (r.source == Source::kItem) add_to(g.items, r.index, alpha, v);
  if (r.source == Source::kContext) add_to(g.contexts, r.index, alpha, v);
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBt:
      return "bt";
    case ModelKind::kGpm:
      return "gpm";
    case ModelKind::kHrc:
      return "hrc";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "bt") return ModelKind::kBt;
  if (name == "gpm") return ModelKind::kGpm;
  if (name == "hrc") return ModelKind::kHrc;
  throw DomainError("unknown model kind '" + std::string(name) + "'");
}

double RewardHead::reward(std::span<const double> h, bool* active) const {
  require_dim(h, weights.size(), "feature vector");
  const double a = kernels::dot(weights, h);
  if (clip && std::fabs(a) >= *clip) {
    if (active) *active = false;
    return std::copysign(*clip, a);
  }
  if (active) *active = true;
  return a;
}

std::vector<double> CyclicHead::embed(std::span<const double> h) const {
  require_dim(h, projection.size() / embedding_dim(), "feature vector");
  return embed_full(*this, h).v;
}

std::vector<double> CyclicHead::gates(std::span<const double> context) const {
  if (gating) require_dim(context, gate_weights.size() / subspaces, "context");
  return gate_forward(*this, context).lambda;
}

std::optional<std::size_t> FeatureTable::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureTable::add(std::string id, std::vector<double> value) {
  if (value.size() != dim_) throw ShapeError("feature row has wrong length");
  if (index_.count(id)) throw DomainError("duplicate feature id '" + id + "'");
  const std::size_t idx = ids_.size();
  index_.emplace(id, idx);
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), value.begin(), value.end());
  return idx;
}

void PreferenceModel::validate() const {
  const bool needs_reward = kind != ModelKind::kGpm;
  const bool needs_cyclic = kind != ModelKind::kBt;
  if (needs_reward != reward.has_value() || needs_cyclic != cyclic.has_value()) {
    throw DomainError("model heads do not match kind " +
                      std::string(model_kind_name(kind)));
  }
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw DomainError("C1 and C2 must be positive");
  if (reward) {
    if (reward->weights.size() != feature_dim) {
      throw ShapeError("reward weights do not match feature_dim");
    }
    if (reward->clip && !(*reward->clip > 0.0)) {
      throw DomainError("clip bound must be positive");
    }
    if (kind == ModelKind::kHrc && !reward->clip) {
      throw DomainError("HRC requires a clip bound on the reward head");
    }
  }
  if (cyclic) {
    const std::size_t d = cyclic->subspaces;
    if (d == 0) throw DomainError("cyclic head needs at least one subspace");
    if (cyclic->projection.size() != 2 * d * feature_dim) {
      throw ShapeError("projection does not match 2d x feature_dim");
    }
    if (cyclic->gating && (cyclic->gate_weights.size() != d * feature_dim ||
                           cyclic->gate_bias.size() != d)) {
      throw ShapeError("gate parameters do not match d x feature_dim");
    }
  }
  if (items.dim() != feature_dim && !items.empty()) {
    throw ShapeError("item table dimension does not match feature_dim");
  }
  if (contexts.dim() != feature_dim && !contexts.empty()) {
    throw ShapeError("context table dimension does not match feature_dim");
  }
}

PreferenceModel make_model(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.feature_dim == 0) throw DomainError("feature_dim must be positive");
  auto rng = substream(seed, "model/init");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double m = static_cast<double>(spec.feature_dim);
  auto draw = [&](std::size_t count, double scale) {
    std::vector<double> v(count);
    for (double& x : v) x = scale == 0.0 ? 0.0 : scale * normal(rng);
    return v;
  };

  PreferenceModel model;
  model.kind = spec.kind;
  model.feature_dim = spec.feature_dim;
  model.c1 = spec.c1;
  model.c2 = spec.c2;
  model.tau = spec.tau;
  model.items = FeatureTable(spec.feature_dim);
  model.contexts = FeatureTable(spec.feature_dim);
  if (spec.kind != ModelKind::kGpm) {
    RewardHead head;
    head.weights = draw(spec.feature_dim, spec.init_scale / std::sqrt(m));
    head.clip = spec.clip;
    model.reward = std::move(head);
  }
  if (spec.kind != ModelKind::kBt) {
    CyclicHead head;
    head.subspaces = spec.subspaces;
    head.unit_norm = spec.unit_norm;
    head.gating = spec.gating;
    const double proj_scale = spec.init_scale == 0.0 ? 0.0 : 1.0 / std::sqrt(m);
    head.projection = draw(2 * spec.subspaces * spec.feature_dim, proj_scale);
    if (spec.gating) {
      head.gate_weights =
          draw(spec.subspaces * spec.feature_dim, 0.2 * spec.init_scale);
      head.gate_bias.assign(spec.subspaces, 0.0);
    }
    model.cyclic = std::move(head);
  }
  model.validate();
  return model;
}

double bt_score(const RewardHead& head, std::span<const double> h_w,
                std::span<const double> h_l) {
  return head.reward(h_w) - head.reward(h_l);
}

double gpm_score(const CyclicHead& head, std::span<const double> context,
                 std::span<const double> h_w, std::span<const double> h_l) {
  const std::size_t m = head.projection.size() / head.embedding_dim();
  require_dim(h_w, m, "winner features");
  require_dim(h_l, m, "loser features");
  if (head.gating) require_dim(context, m, "context");
  const auto vw = embed_full(head, h_w).v;
  const auto vl = embed_full(head, h_l).v;
  const auto gate = gate_forward(head, context);
  return skew_form(gate.lambda, vw, vl);
}

double model_score(const PreferenceModel& model,
                   std::span<const double> context,
                   std::span<const double> h_w, std::span<const double> h_l) {
  switch (model.kind) {
    case ModelKind::kBt:
      return bt_score(*model.reward, h_w, h_l);
    case ModelKind::kGpm:
      return gpm_score(*model.cyclic, context, h_w, h_l);
    case ModelKind::kHrc:
      return model.c1 * bt_score(*model.reward, h_w, h_l) +
             model.c2 * gpm_score(*model.cyclic, context, h_w, h_l);
  }
  return 0.0;
}

void PairDataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.winner.is_id() && r.winner.value.empty()) {
      throw DomainError("record " + std::to_string(i) + " has no winner");
    }
    if (!r.loser.is_id() && r.loser.value.empty()) {
      throw DomainError("record " + std::to_string(i) + " has no loser");
    }
    if (r.winner == r.loser) {
      throw DomainError("record " + std::to_string(i) +
                        " has the same winner and loser");
    }
  }
}

void ensure_features(PreferenceModel& model, const PairDataset& data,
                     std::uint64_t seed, double init_scale) {
  auto rng = substream(seed, "model/features");
  std::normal_distribution<double> normal(0.0, 1.0);
  if (model.items.dim() != model.feature_dim) {
    if (!model.items.empty()) throw ShapeError("item table has wrong width");
    model.items = FeatureTable(model.feature_dim);
  }
  if (model.contexts.dim() != model.feature_dim) {
    if (!model.contexts.empty()) throw ShapeError("context table has wrong width");
    model.contexts = FeatureTable(model.feature_dim);
  }
  auto add = [&](FeatureTable& table, const FeatureRef& ref) {
    if (!ref.is_id() || table.find(ref.id)) return;
    std::vector<double> v(model.feature_dim);
    for (double& x : v) x = init_scale * normal(rng);
    table.add(ref.id, std::move(v));
  };
  for (const auto& r : data.records) {
    if (r.context) add(model.contexts, *r.context);
    add(model.items, r.winner);
    add(model.items, r.loser);
  }
}

std::vector<double> record_scores(const PreferenceModel& model,
                                  const PairDataset& data) {
  Resolver resolve(model);
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& r : data.records) {
    out.push_back(model_score(model, resolve.context(r.context).value,
                              resolve.item(r.winner).value,
                              resolve.item(r.loser).value));
  }
  return out;
}

double pair_loss(const PreferenceModel& model, const PairDataset& batch) {
  if (batch.empty()) throw DomainError("pair_loss: empty batch");
  double total = 0.0;
  for (double s : record_scores(model, batch)) total += softplus(-s / model.tau);
  return total / static_cast<double>(batch.size());
}

double eval_accuracy(const PreferenceModel& model, const PairDataset& data) {
  if (data.empty()) throw DomainError("eval_accuracy: empty dataset");
  std::size_t correct = 0;
  for (double s : record_scores(model, data)) correct += s > 0.0 ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LossAndGradient pair_loss_grad(const PreferenceModel& model,
                               const PairDataset& batch, bool train_weights) {
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return pair_loss_grad(model, batch, all, train_weights);
}

LossAndGradient pair_loss_grad(const PreferenceModel& model,
                               const PairDataset& data,
                               std::span<const std::size_t> indices,
                               bool train_weights) {
  if (indices.empty()) throw DomainError("pair_loss_grad: empty batch");
  const std::size_t m = model.feature_dim;
  const double scale = 1.0 / static_cast<double>(indices.size());
  const bool hrc = model.kind == ModelKind::kHrc;

  LossAndGradient out;
  ModelGradient& g = out.gradient;
  if (model.reward) g.reward.assign(m, 0.0);
  if (model.cyclic) {
    g.projection.assign(model.cyclic->projection.size(), 0.0);
    if (model.cyclic->gating) {
      g.gate_weights.assign(model.cyclic->gate_weights.size(), 0.0);
      g.gate_bias.assign(model.cyclic->subspaces, 0.0);
    }
  }

  Resolver resolve(model);
  std::vector<double> scratch(m);
  for (std::size_t idx : indices) {
    const PairRecord& rec = data.records.at(idx);
    const Resolved x = resolve.context(rec.context);
    const Resolved hw = resolve.item(rec.winner);
    const Resolved hl = resolve.item(rec.loser);

    // Forward.
    double bt = 0.0, gpm = 0.0;
    bool active_w = false, active_l = false;
    if (model.reward) {
      bt = model.reward->reward(hw.value, &active_w) -
           model.reward->reward(hl.value, &active_l);
    }
    Embedding ew, el;
    GateState gate;
    if (model.cyclic) {
      require_dim(x.value, m, "context");
      ew = embed_full(*model.cyclic, hw.value);
      el = embed_full(*model.cyclic, hl.value);
      gate = gate_forward(*model.cyclic, x.value);
      gpm = skew_form(gate.lambda, ew.v, el.v);
    }
    double s = 0.0;
    switch (model.kind) {
      case ModelKind::kBt: s = bt; break;
      case ModelKind::kGpm: s = gpm; break;
      case ModelKind::kHrc: s = model.c1 * bt + model.c2 * gpm; break;
    }
    out.loss += softplus(-s / model.tau) * scale;

    // dL/ds for -log sigmoid(s / tau).
    const double ds = -sigmoid(-s / model.tau) / model.tau * scale;
    if (hrc && train_weights) {
      g.c1 += ds * bt;
      g.c2 += ds * gpm;
    }

    if (model.reward) {
      const double dbt = hrc ? ds * model.c1 : ds;
      const auto& w = model.reward->weights;
      if (active_w) {
        kernels::axpy(dbt, hw.value, g.reward);
        accumulate_feature(g, hw, dbt, w);
      }
      if (active_l) {
        kernels::axpy(-dbt, hl.value, g.reward);
        accumulate_feature(g, hl, -dbt, w);
      }
    }

    if (model.cyclic) {
      const CyclicHead& head = *model.cyclic;
      const double dg = hrc ? ds * model.c2 : ds;
      const std::size_t d = head.subspaces;
      std::vector<double> dvw(2 * d), dvl(2 * d);
      std::vector<double> dz(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) {
        const double lam = gate.lambda[k];
        const double q = lam * lam;
        const double a0 = ew.v[2 * k], a1 = ew.v[2 * k + 1];
        const double b0 = el.v[2 * k], b1 = el.v[2 * k + 1];
        dvw[2 * k] = dg * q * b1;
        dvw[2 * k + 1] = -dg * q * b0;
        dvl[2 * k] = -dg * q * a1;
        dvl[2 * k + 1] = dg * q * a0;
        if (head.gating) {
          const double block = a0 * b1 - a1 * b0;
          dz[k] = dg * block * 2.0 * lam * sigmoid(gate.pre[k]);
        }
      }
      const auto duw = backprop_norm(head, ew, dvw);
      const auto dul = backprop_norm(head, el, dvl);
      const std::size_t rows = 2 * d;
      for (std::size_t r = 0; r < rows; ++r) {
        std::span<double> grow(g.projection.data() + r * m, m);
        kernels::axpy(duw[r], hw.value, grow);
        kernels::axpy(dul[r], hl.value, grow);
      }
      if (hw.source == Source::kItem) {
        kernels::matvec_transposed(head.projection, rows, m, duw, scratch);
        accumulate_feature(g, hw, 1.0, scratch);
      }
      if (hl.source == Source::kItem) {
        kernels::matvec_transposed(head.projection, rows, m, dul, scratch);
        accumulate_feature(g, hl, 1.0, scratch);
      }
      if (head.gating) {
        for (std::size_t k = 0; k < d; ++k) {
          std::span<double> grow(g.gate_weights.data() + k * m, m);
          kernels::axpy(dz[k], x.value, grow);
          g.gate_bias[k] += dz[k];
        }
        if (x.source == Source::kContext) {
          kernels::matvec_transposed(head.gate_weights, d, m, dz, scratch);
          accumulate_feature(g, x, 1.0, scratch);
        }
      }
    }
  }
  return out;
}

std::vector<double> flatten_parameters(const PreferenceModel& model) {
  std::vector<double> flat;
  auto append = [&](std::span<const double> v) {
    flat.insert(flat.end(), v.begin(), v.end());
  };
  if (model.reward) append(model.reward->weights);
  if (model.cyclic) {
    append(model.cyclic->projection);
    append(model.cyclic->gate_weights);
    append(model.cyclic->gate_bias);
  }
  flat.push_back(model.c1);
  flat.push_back(model.c2);
  for (std::size_t i = 0; i < model.items.size(); ++i) append(model.items.row(i));
  for (std::size_t i = 0; i < model.contexts.size(); ++i) {
    append(model.contexts.row(i));
  }
  return flat;
}

void unflatten_parameters(std::span<const double> flat, PreferenceModel& model) {
  std::size_t pos = 0;
  auto take = [&](std::span<double> dst) {
    if (pos + dst.size() > flat.size()) {
      throw ShapeError("flat parameter vector too short");
    }
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), dst.size(),
                dst.begin());
    pos += dst.size();
  };
  if (model.reward) take(model.reward->weights);
  if (model.cyclic) {
    take(model.cyclic->projection);
    take(model.cyclic->gate_weights);
    take(model.cyclic->gate_bias);
  }
  take(std::span<double>(&model.c1, 1));
  take(std::span<double>(&model.c2, 1));
  for (std::size_t i = 0; i < model.items.size(); ++i) take(model.items.row(i));
  for (std::size_t i = 0; i < model.contexts.size(); ++i) {
    take(model.contexts.row(i));
  }
  if (pos != flat.size()) throw ShapeError("flat parameter vector too long");
}

std::vector<double> flatten_gradient(const ModelGradient& gradient,
                                     const PreferenceModel& model) {
  std::vector<double> flat;
  auto append = [&](std::span<const double> v) {
    flat.insert(flat.end(), v.begin(), v.end());
  };
  if (model.reward) append(gradient.reward);
  if (model.cyclic) {
    append(gradient.projection);
    append(gradient.gate_weights);
    append(gradient.gate_bias);
  }
  flat.push_back(gradient.c1);
  flat.push_back(gradient.c2);
  const std::size_t m = model.feature_dim;
  auto append_rows = [&](const std::map<std::size_t, std::vector<double>>& rows,
                         std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      auto it = rows.find(i);
      if (it == rows.end()) {
        flat.insert(flat.end(), m, 0.0);
      } else {
        append(it->second);
      }
    }
  };
  append_rows(gradient.items, model.items.size());
  append_rows(gradient.contexts, model.contexts.size());
  return flat;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

bool gradient_finite(const ModelGradient& g) {
  if (!all_finite(g.reward) || !all_finite(g.projection) ||
      !all_finite(g.gate_weights) || !all_finite(g.gate_bias) ||
      !std::isfinite(g.c1) || !std::isfinite(g.c2)) {
    return false;
  }
  for (const auto& [_, row] : g.items) {
    if (!all_finite(row)) return false;
  }
  for (const auto& [_, row] : g.contexts) {
    if (!all_finite(row)) return false;
  }
  return true;
}

void apply_step(PreferenceModel& model, const ModelGradient& g, double lr) {
  if (model.reward) kernels::axpy(-lr, g.reward, model.reward->weights);
  if (model.cyclic) {
    kernels::axpy(-lr, g.projection, model.cyclic->projection);
    if (model.cyclic->gating) {
      kernels::axpy(-lr, g.gate_weights, model.cyclic->gate_weights);
      kernels::axpy(-lr, g.gate_bias, model.cyclic->gate_bias);
    }
  }
  // Weights stay positive so the model remains valid.
  model.c1 = std::max(model.c1 - lr * g.c1, 1e-6);
  model.c2 = std::max(model.c2 - lr * g.c2, 1e-6);
  for (const auto& [i, row] : g.items) kernels::axpy(-lr, row, model.items.row(i));
  for (const auto& [i, row] : g.contexts) {
    kernels::axpy(-lr, row, model.contexts.row(i));
  }
}

std::vector<double> mean_embedding(const PreferenceModel& model,
                                   const PairDataset& data) {
  if (!model.cyclic) return {};
  const CyclicHead& head = *model.cyclic;
  std::vector<double> mean(head.embedding_dim(), 0.0);
  std::size_t count = 0;
  auto add = [&](std::span<const double> h) {
    kernels::axpy(1.0, head.embed(h), mean);
    ++count;
  };
  if (!model.items.empty()) {
    for (std::size_t i = 0; i < model.items.size(); ++i) add(model.items.row(i));
  } else {
    Resolver resolve(model);
    for (const auto& r : data.records) {
      add(resolve.item(r.winner).value);
      add(resolve.item(r.loser).value);
    }
  }
  if (count > 0) {
    for (double& v : mean) v /= static_cast<double>(count);
  }
  return mean;
}

}  // namespace

FitResult fit(PreferenceModel model, const PairDataset& data,
              const FitConfig& config) {
  if (data.empty()) throw DomainError("fit: empty dataset");
  if (!(config.learning_rate > 0.0)) {
    throw DomainError("fit: learning rate must be positive");
  }
  data.validate();
  model.validate();
  ensure_features(model, data, derive_seed(config.seed, "fit/features"),
                  config.init_scale);

  auto shuffle_rng = substream(config.seed, "fit/shuffle");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch =
      config.batch_size == 0 ? data.size() : std::min(config.batch_size, data.size());

  FitResult result;
  long step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += batch, ++step) {
      const std::size_t len = std::min(batch, order.size() - start);
      auto lg = pair_loss_grad(
          model, data, std::span<const std::size_t>(order.data() + start, len),
          config.train_weights);
      if (!std::isfinite(lg.loss)) throw TrainingError("loss is not finite", step);
      if (!gradient_finite(lg.gradient)) {
        throw TrainingError("gradient is not finite", step);
      }
      apply_step(model, lg.gradient, config.learning_rate);
    }
    const auto scores = record_scores(model, data);
    double loss = 0.0;
    std::size_t correct = 0;
    for (double s : scores) {
      loss += softplus(-s / model.tau);
      correct += s > 0.0 ? 1 : 0;
    }
    loss /= static_cast<double>(scores.size());
    if (!std::isfinite(loss)) throw TrainingError("loss is not finite", step);
    result.loss_history.push_back(loss);
    result.accuracy_history.push_back(static_cast<double>(correct) /
                                      static_cast<double>(scores.size()));
  }
  result.mean_embedding = mean_embedding(model, data);
  result.mean_embedding_norm =
      std::sqrt(kernels::dot(result.mean_embedding, result.mean_embedding));
  result.model = std::move(model);
  return result;
}

}  // namespace prefgame
