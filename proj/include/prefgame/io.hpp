#pragma once

// Serialization of games, decompositions, models, datasets and self-play
// trajectories.
//
//   score matrix    {"n": 3, "upper": [m01, m02, m12]}  or {"matrix": [[...]]}
//   decomposition   {"n": 3, "f": [...], "cyclic_upper": [...]}
//   model           {"kind": "hrc", "feature_dim": m, "reward": {...},
//                    "cyclic": {...}, "items": {...}, "contexts": {...}}
//   dataset (JSONL) one pair per line:
//                   {"ctx_id": "p00000", "win_id": "p00000/D",
//                    "lose_id": "p00000/A", "dim": 0}
//                   with "context", "winner", "loser" for inline vectors
//   trajectory CSV  t,gap,epsilon_t,entropy
//
// Malformed input raises ParseError naming the line and column (JSON) or
// line (JSONL).

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "prefgame/decomposition.hpp"
#include "prefgame/models.hpp"
#include "prefgame/preference.hpp"
#include "prefgame/selfplay.hpp"

namespace prefgame::io {

using Json = nlohmann::ordered_json;

// Whole-file helpers; IoError on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Parses JSON text, reporting syntax errors as "<source>:<line>:<column>".
Json parse_json(std::string_view text, const std::string& source);

// Two-space indented with a trailing newline.
std::string dump(const Json& j);

Json to_json(const PreferenceScoreMatrix& m);
PreferenceScoreMatrix score_matrix_from_json(const Json& j);

Json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const Json& j);

Json to_json(const PreferenceModel& model);
PreferenceModel model_from_json(const Json& j);

Json to_json(const PairRecord& record);
std::string to_jsonl(const PairDataset& data);
PairDataset dataset_from_jsonl(std::string_view text,
                               const std::string& source = "<dataset>");

Json to_json(const TabularPolicy& p);
Json to_json(const TrajectoryReport& report);
std::string trajectory_csv(const TrajectoryReport& report);

// Per-epoch training history: epoch,loss,accuracy.
std::string history_csv(const FitResult& result);

}  // namespace prefgame::io
