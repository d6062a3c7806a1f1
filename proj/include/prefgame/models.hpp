#pragma once

// Pairwise preference models over feature vectors.
//
//   BT   s = r(h_w) - r(h_l),            r(h) = clip(w_r . h, -delta, delta)
//   GPM  s = v_w^T D(x) R D(x) v_l,      v = W_c h / ||W_c h||
//   HRC  s = C1 * BT + C2 * GPM
//
// R is block-diagonal with 2x2 blocks [[0, 1], [-1, 0]], and
// D(x) = diag(lambda(x)) (x) I_2 with lambda(x) = softplus(W_g h_x + b_g).
// A positive score means the first argument is preferred. All three are
// trained with the same loss, mean(-log sigmoid(s / tau)).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace prefgame {

enum class ModelKind { kBt, kGpm, kHrc };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline constexpr double kDefaultClip = 10.0;
inline constexpr double kDefaultTau = 0.1;
inline constexpr double kNormEpsilon = 1e-12;

// Scalar reward head (the BT model).
struct RewardHead {
  std::vector<double> weights;  // w_r, one per feature
  std::optional<double> clip = kDefaultClip;

  // Clipped reward and whether the clip is inactive (gradient flows).
  double reward(std::span<const double> h, bool* active = nullptr) const;
};

// Skew-symmetric bilinear head with context gating (the GPM model).
struct CyclicHead {
  std::size_t subspaces = 1;       // d; embeddings live in R^{2d}
  std::vector<double> projection;  // W_c, (2d) x m row-major
  bool gating = true;              // gates fixed at 1 when false
  std::vector<double> gate_weights;  // W_g, d x m row-major
  std::vector<double> gate_bias;     // b_g, d
  bool unit_norm = true;

  std::size_t embedding_dim() const { return 2 * subspaces; }
  std::vector<double> embed(std::span<const double> h) const;
  std::vector<double> gates(std::span<const double> context) const;
};

// Learnable per-id feature vectors for tabular data.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  std::optional<std::size_t> find(const std::string& id) const;
  // Appends a new row. Throws DomainError on a duplicate id and ShapeError on
  // a row of the wrong length.
  std::size_t add(std::string id, std::vector<double> value);

  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct PreferenceModel {
  ModelKind kind = ModelKind::kHrc;
  std::size_t feature_dim = 0;  // m, for items and contexts alike
  std::optional<RewardHead> reward;
  std::optional<CyclicHead> cyclic;
  double c1 = 1.0;
  double c2 = 1.0;
  double tau = kDefaultTau;
  FeatureTable items;
  FeatureTable contexts;

  // Throws DomainError when heads are missing for the kind, shapes are
  // inconsistent, or c1, c2, tau, clip are not positive.
  void validate() const;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kHrc;
  std::size_t feature_dim = 8;
  std::size_t subspaces = 1;  // ignored for BT
  std::optional<double> clip = kDefaultClip;
  bool gating = true;
  bool unit_norm = true;
  double c1 = 1.0;
  double c2 = 1.0;
  double tau = kDefaultTau;
  // Standard deviation of the random initial weights; 0 gives an all-zero
  // model.
  double init_scale = 0.5;
};

// Random initialization from `seed`; deterministic.
PreferenceModel make_model(const ModelSpec& spec, std::uint64_t seed);

// Score primitives. Shapes must match the head (ShapeError otherwise).
double bt_score(const RewardHead& head, std::span<const double> h_w,
                std::span<const double> h_l);
double gpm_score(const CyclicHead& head, std::span<const double> context,
                 std::span<const double> h_w, std::span<const double> h_l);
// Kind-dispatched score; for HRC this is C1 * BT + C2 * GPM.
double model_score(const PreferenceModel& model,
                   std::span<const double> context,
                   std::span<const double> h_w, std::span<const double> h_l);

// -- Datasets ---------------------------------------------------------------

// A feature vector given inline, or an id into one of the model's tables.
struct FeatureRef {
  std::string id;
  std::vector<double> value;

  bool is_id() const { return !id.empty(); }
  friend bool operator==(const FeatureRef&, const FeatureRef&) = default;
};

struct PairRecord {
  std::optional<FeatureRef> context;  // absent: gates see a zero context
  FeatureRef winner;
  FeatureRef loser;
  std::optional<int> dim;  // deciding annotation dimension, informational

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct PairDataset {
  std::vector<PairRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  // Throws DomainError on a record whose winner equals its loser or whose
  // references are empty.
  void validate() const;
};

// Adds a table row for every id the dataset references but the model does
// not have yet, in order of first appearance. New rows are drawn from
// N(0, init_scale^2).
void ensure_features(PreferenceModel& model, const PairDataset& data,
                     std::uint64_t seed, double init_scale);

// Score of every record, in order. Ids must resolve (DomainError otherwise).
std::vector<double> record_scores(const PreferenceModel& model,
                                  const PairDataset& data);

// mean(-log sigmoid(s / tau)). Throws DomainError on an empty batch.
double pair_loss(const PreferenceModel& model, const PairDataset& batch);

// Fraction of records with score > 0; ties count as wrong.
double eval_accuracy(const PreferenceModel& model, const PairDataset& data);

// Gradient of pair_loss, shaped like the trainable parameters.
struct ModelGradient {
  std::vector<double> reward;
  std::vector<double> projection;
  std::vector<double> gate_weights;
  std::vector<double> gate_bias;
  double c1 = 0.0;
  double c2 = 0.0;
  // Table rows touched by the batch.
  std::map<std::size_t, std::vector<double>> items;
  std::map<std::size_t, std::vector<double>> contexts;
};

struct LossAndGradient {
  double loss = 0.0;
  ModelGradient gradient;
};

// Analytic gradient. C1 and C2 receive gradients only when
// `train_weights` is set (HRC only); inline features are constants.
LossAndGradient pair_loss_grad(const PreferenceModel& model,
                               const PairDataset& batch,
                               bool train_weights = false);

// Same, over a subset of record indices.
LossAndGradient pair_loss_grad(const PreferenceModel& model,
                               const PairDataset& data,
                               std::span<const std::size_t> indices,
                               bool train_weights = false);

// Flat parameter view in a fixed order: w_r, W_c, W_g, b_g, c1, c2, item
// rows, context rows. Used by gradient checks.
std::vector<double> flatten_parameters(const PreferenceModel& model);
void unflatten_parameters(std::span<const double> flat, PreferenceModel& model);
std::vector<double> flatten_gradient(const ModelGradient& gradient,
                                     const PreferenceModel& model);

// -- Training ---------------------------------------------------------------

struct FitConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 600;
  std::size_t batch_size = 6;  // 0 means full batch
  std::uint64_t seed = 0;
  bool train_weights = false;
  double init_scale = 0.5;  // for table rows created by fit
};

struct FitResult {
  PreferenceModel model;
  std::vector<double> loss_history;      // per epoch, full dataset
  std::vector<double> accuracy_history;  // per epoch, full dataset
  // Zero-mean diagnostic: mean cyclic embedding over the item table (or over
  // every record side when there is no table). Empty for BT.
  std::vector<double> mean_embedding;
  double mean_embedding_norm = 0.0;
};

// Plain minibatch gradient descent with a fixed step and seeded shuffling.
// Throws TrainingError with the offending step on a non-finite loss or
// gradient.
FitResult fit(PreferenceModel model, const PairDataset& data,
              const FitConfig& config);

}  // namespace prefgame
