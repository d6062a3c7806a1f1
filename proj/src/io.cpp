#include "prefgame/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "prefgame/errors.hpp"

namespace prefgame::io {

namespace {

// Line and column (1-based) of a byte offset.
std::string locate(std::string_view text, std::size_t byte,
                   const std::string& source) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("{}:{}:{}", source, line, column);
}

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                  const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be a JSON object", "");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError("unknown key \"" + key + "\" in " + what, "");
  }
}

const Json& field(const Json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(fmt::format("{} is missing \"{}\"", what, key), "");
  }
  return *it;
}

std::vector<double> doubles(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of numbers", "");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(what + " must contain only numbers", "");
    out.push_back(v.get<double>());
  }
  return out;
}

std::size_t count(const Json& j, const std::string& what) {
  if (!j.is_number_unsigned()) {
    throw ParseError(what + " must be a non-negative integer", "");
  }
  return j.get<std::size_t>();
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(what + " must be a number", "");
  return j.get<double>();
}

bool boolean(const Json& j, const std::string& what) {
  if (!j.is_boolean()) throw ParseError(what + " must be true or false", "");
  return j.get<bool>();
}

Json table_to_json(const FeatureTable& t) {
  Json ids = Json::array();
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    ids.push_back(t.id(i));
    auto r = t.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return Json{{"ids", ids}, {"features", rows}};
}

FeatureTable table_from_json(const Json& j, std::size_t dim,
                             const std::string& what) {
  require_keys(j, {"ids", "features"}, what);
  const auto& ids = field(j, "ids", what);
  const auto& rows = field(j, "features", what);
  if (!ids.is_array() || !rows.is_array() || ids.size() != rows.size()) {
    throw ParseError(what + " needs equally long \"ids\" and \"features\"", "");
  }
  FeatureTable t(dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!ids[i].is_string()) throw ParseError(what + " ids must be strings", "");
    auto row = doubles(rows[i], what + " row");
    if (row.size() != dim) {
      throw ParseError(fmt::format("{} row {} has length {}, expected {}", what,
                                   i, row.size(), dim),
                       "");
    }
    t.add(ids[i].get<std::string>(), std::move(row));
  }
  return t;
}

Json feature_ref_json(const FeatureRef& r) {
  if (r.is_id()) return r.id;
  return r.value;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create " + path.parent_path().string() + ": " +
                    ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    throw ParseError("invalid JSON", locate(text, byte, source));
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const PreferenceScoreMatrix& m) {
  return Json{{"n", m.size()}, {"upper", m.upper()}};
}

PreferenceScoreMatrix score_matrix_from_json(const Json& j) {
  require_keys(j, {"n", "upper", "matrix"}, "score matrix");
  if (j.contains("matrix")) {
    if (j.contains("upper")) {
      throw ParseError("score matrix has both \"upper\" and \"matrix\"", "");
    }
    const auto& rows = j["matrix"];
    if (!rows.is_array()) throw ParseError("\"matrix\" must be an array", "");
    const std::size_t n = rows.size();
    if (j.contains("n") && count(j["n"], "\"n\"") != n) {
      throw ParseError("\"n\" does not match the matrix size", "");
    }
    std::vector<double> full;
    full.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = doubles(rows[i], fmt::format("matrix row {}", i));
      if (row.size() != n) {
        throw ParseError(fmt::format("matrix row {} has length {}, expected {}",
                                     i, row.size(), n),
                         "");
      }
      full.insert(full.end(), row.begin(), row.end());
    }
    try {
      return PreferenceScoreMatrix::from_full(n, full);
    } catch (const Error& e) {
      throw ParseError(e.what(), "");
    }
  }
  const std::size_t n = count(field(j, "n", "score matrix"), "\"n\"");
  auto upper = doubles(field(j, "upper", "score matrix"), "\"upper\"");
  try {
    return PreferenceScoreMatrix::from_upper(n, upper);
  } catch (const Error& e) {
    throw ParseError(e.what(), "");
  }
}

Json to_json(const Decomposition& d) {
  return Json{{"n", d.potential.size()},
              {"f", d.potential},
              {"cyclic_upper", d.cyclic.upper()}};
}

Decomposition decomposition_from_json(const Json& j) {
  require_keys(j, {"n", "f", "cyclic_upper", "transitivity_fraction"},
               "decomposition");
  auto f = doubles(field(j, "f", "decomposition"), "\"f\"");
  if (j.contains("n") && count(j["n"], "\"n\"") != f.size()) {
    throw ParseError("\"n\" does not match the length of \"f\"", "");
  }
  auto upper = doubles(field(j, "cyclic_upper", "decomposition"),
                       "\"cyclic_upper\"");
  const std::size_t n = f.size();
  try {
    auto cyclic = PreferenceScoreMatrix::from_upper(n, upper);
    const double scale = std::max(1.0, cyclic.max_abs()) * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t k = 0; k < n; ++k) row += cyclic(i, k);
      if (std::abs(row) > 1e-9 * scale) {
        throw ParseError(fmt::format("cyclic row {} sums to {}, not 0", i, row), "");
      }
    }
    return make_decomposition(std::move(f), std::move(cyclic));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), "");
  }
}

Json to_json(const PreferenceModel& model) {
  Json j;
  j["kind"] = std::string(model_kind_name(model.kind));
  j["feature_dim"] = model.feature_dim;
  j["c1"] = model.c1;
  j["c2"] = model.c2;
  j["tau"] = model.tau;
  if (model.reward) {
    Json r;
    r["weights"] = model.reward->weights;
    r["clip"] = model.reward->clip ? Json(*model.reward->clip) : Json(nullptr);
    j["reward"] = r;
  }
  if (model.cyclic) {
    const auto& c = *model.cyclic;
    Json h;
    h["subspaces"] = c.subspaces;
    h["projection_shape"] = {c.embedding_dim(), model.feature_dim};
    h["projection"] = c.projection;
    h["gating"] = c.gating;
    h["gate_shape"] = {c.subspaces, model.feature_dim};
    h["gate_weights"] = c.gate_weights;
    h["gate_bias"] = c.gate_bias;
    h["unit_norm"] = c.unit_norm;
    j["cyclic"] = h;
  }
  j["items"] = table_to_json(model.items);
  j["contexts"] = table_to_json(model.contexts);
  return j;
}

PreferenceModel model_from_json(const Json& j) {
  require_keys(j,
               {"kind", "feature_dim", "c1", "c2", "tau", "reward", "cyclic",
                "items", "contexts"},
               "model");
  PreferenceModel model;
  const auto& kind = field(j, "kind", "model");
  if (!kind.is_string()) throw ParseError("\"kind\" must be a string", "");
  try {
    model.kind = parse_model_kind(kind.get<std::string>());
  } catch (const Error& e) {
    throw ParseError(e.what(), "");
  }
  model.feature_dim = count(field(j, "feature_dim", "model"), "\"feature_dim\"");
  model.c1 = number(field(j, "c1", "model"), "\"c1\"");
  model.c2 = number(field(j, "c2", "model"), "\"c2\"");
  model.tau = number(field(j, "tau", "model"), "\"tau\"");
  if (j.contains("reward")) {
    const auto& r = j["reward"];
    require_keys(r, {"weights", "clip"}, "reward head");
    RewardHead head;
    head.weights = doubles(field(r, "weights", "reward head"), "\"weights\"");
    const auto& clip = field(r, "clip", "reward head");
    if (clip.is_null()) {
      head.clip.reset();
    } else {
      head.clip = number(clip, "\"clip\"");
    }
    model.reward = std::move(head);
  }
  if (j.contains("cyclic")) {
    const auto& c = j["cyclic"];
    require_keys(c,
                 {"subspaces", "projection_shape", "projection", "gating",
                  "gate_shape", "gate_weights", "gate_bias", "unit_norm"},
                 "cyclic head");
    CyclicHead head;
    head.subspaces = count(field(c, "subspaces", "cyclic head"), "\"subspaces\"");
    head.projection = doubles(field(c, "projection", "cyclic head"), "\"projection\"");
    head.gating = boolean(field(c, "gating", "cyclic head"), "\"gating\"");
    head.gate_weights =
        doubles(field(c, "gate_weights", "cyclic head"), "\"gate_weights\"");
    head.gate_bias = doubles(field(c, "gate_bias", "cyclic head"), "\"gate_bias\"");
    head.unit_norm = boolean(field(c, "unit_norm", "cyclic head"), "\"unit_norm\"");
    for (const char* key : {"projection_shape", "gate_shape"}) {
      if (!c.contains(key)) continue;
      const auto& shape = c[key];
      const std::size_t rows = std::string(key) == "projection_shape"
                                   ? head.embedding_dim()
                                   : head.subspaces;
      if (!shape.is_array() || shape.size() != 2 ||
          !shape[0].is_number_unsigned() || !shape[1].is_number_unsigned() ||
          shape[0].get<std::size_t>() != rows ||
          shape[1].get<std::size_t>() != model.feature_dim) {
        throw ParseError(fmt::format("\"{}\" does not match the head", key), "");
      }
    }
    model.cyclic = std::move(head);
  }
  if (j.contains("items")) {
    model.items = table_from_json(j["items"], model.feature_dim, "item table");
  } else {
    model.items = FeatureTable(model.feature_dim);
  }
  if (j.contains("contexts")) {
    model.contexts =
        table_from_json(j["contexts"], model.feature_dim, "context table");
  } else {
    model.contexts = FeatureTable(model.feature_dim);
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw ParseError(e.what(), "");
  }
  return model;
}

Json to_json(const PairRecord& r) {
  Json j;
  if (r.context) {
    j[r.context->is_id() ? "ctx_id" : "context"] = feature_ref_json(*r.context);
  }
  j[r.winner.is_id() ? "win_id" : "winner"] = feature_ref_json(r.winner);
  j[r.loser.is_id() ? "lose_id" : "loser"] = feature_ref_json(r.loser);
  if (r.dim) j["dim"] = *r.dim;
  return j;
}

std::string to_jsonl(const PairDataset& data) {
  std::string out;
  for (const auto& r : data.records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

PairDataset dataset_from_jsonl(std::string_view text, const std::string& source) {
  PairDataset data;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = fmt::format("{}:{}", source, line_no);
    Json j;
    try {
      j = Json::parse(line.begin(), line.end());
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("invalid JSON", fmt::format("{}:{}", where, e.byte));
    }
    try {
      require_keys(j,
                   {"context", "ctx_id", "winner", "win_id", "loser", "lose_id",
                    "dim"},
                   "pair record");
      auto ref = [&](const char* vec_key, const char* id_key,
                     bool required) -> std::optional<FeatureRef> {
        const bool has_vec = j.contains(vec_key), has_id = j.contains(id_key);
        if (has_vec && has_id) {
          throw ParseError(
              fmt::format("both \"{}\" and \"{}\" given", vec_key, id_key), "");
        }
        FeatureRef r;
        if (has_id) {
          if (!j[id_key].is_string() || j[id_key].get<std::string>().empty()) {
            throw ParseError(fmt::format("\"{}\" must be a non-empty string", id_key), "");
          }
          r.id = j[id_key].get<std::string>();
          return r;
        }
        if (has_vec) {
          r.value = doubles(j[vec_key], fmt::format("\"{}\"", vec_key));
          for (double v : r.value) {
            if (!std::isfinite(v)) throw ParseError("feature values must be finite", "");
          }
          return r;
        }
        if (required) {
          throw ParseError(fmt::format("missing \"{}\" or \"{}\"", vec_key, id_key), "");
        }
        return std::nullopt;
      };
      PairRecord rec;
      rec.context = ref("context", "ctx_id", false);
      rec.winner = *ref("winner", "win_id", true);
      rec.loser = *ref("loser", "lose_id", true);
      if (j.contains("dim")) {
        if (!j["dim"].is_number_integer()) throw ParseError("\"dim\" must be an integer", "");
        rec.dim = j["dim"].get<int>();
      }
      data.records.push_back(std::move(rec));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), where);
    }
  }
  try {
    data.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what(), source);
  }
  return data;
}

Json to_json(const TabularPolicy& p) {
  return std::vector<double>(p.probs().begin(), p.probs().end());
}

Json to_json(const TrajectoryReport& report) {
  Json cps = Json::array();
  for (const auto& c : report.checkpoints) {
    cps.push_back(Json{{"t", c.t},
                       {"gap", c.gap},
                       {"last_iterate_gap", c.last_iterate_gap},
                       {"epsilon_t", c.epsilon},
                       {"epsilon_bound", c.epsilon_bound},
                       {"entropy", c.entropy},
                       {"policy", to_json(c.policy)},
                       {"mixture", to_json(c.mixture)}});
  }
  return Json{{"eta", report.eta},
              {"final_gap", report.final_gap},
              {"final_policy", to_json(report.final_policy)},
              {"final_mixture", to_json(report.final_mixture)},
              {"scaled_gaps", report.scaled_gaps},
              {"checkpoints", cps}};
}

std::string trajectory_csv(const TrajectoryReport& report) {
  std::string out = "t,gap,epsilon_t,entropy\n";
  for (const auto& c : report.checkpoints) {
    out += fmt::format("{},{},{},{}\n", c.t, c.gap, c.epsilon, c.entropy);
  }
  return out;
}

std::string history_csv(const FitResult& result) {
  std::string out = "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    out += fmt::format("{},{},{}\n", e + 1, result.loss_history[e],
                       result.accuracy_history[e]);
  }
  return out;
}

}  // namespace prefgame::io
