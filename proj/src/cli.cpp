#include "prefgame/cli.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <ostream>

#include "CLI11.hpp"
#include "prefgame/decomposition.hpp"
#include "prefgame/errors.hpp"
#include "prefgame/models.hpp"
#include "prefgame/rng.hpp"
#include "prefgame/selfplay.hpp"
#include "prefgame/synthdata.hpp"
#include "prefgame/witnesses.hpp"

namespace prefgame::cli {

namespace {

using Json = io::Json;
namespace fs = std::filesystem;

enum class Type {
  kBool,
  kCount,        // non-negative integer
  kNumber,
  kOptNumber,    // number or null ("none" on the command line)
  kEta,          // positive number or "theory"
  kString,
  kNumberList,   // comma-separated on the command line
  kStringList,
};

struct Key {
  const char* name;
  Type type;
  Json value;
  const char* help;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Key> keys;
};

const std::vector<Command>& table() {
  static const std::vector<Command> cmds = {
      {"decompose",
       "Split a score matrix into transitive and cyclic parts",
       {
           {"seed", Type::kCount, 0, "Global seed (echoed, unused)"},
           {"input", Type::kString, "", "Score matrix JSON ({\"n\", \"upper\"} or {\"matrix\"})"},
       }},
      {"gen-data",
       "Generate synthetic cyclic or dominant+cycle pair data",
       {
           {"seed", Type::kCount, 0, "Global seed"},
           {"mode", Type::kString, "dominant_cycle", "cyclic | dominant_cycle"},
           {"count", Type::kCount, 200, "Number of instances"},
       }},
      {"fit",
       "Fit a BT, GPM or HRC model to pair data",
       {
           {"seed", Type::kCount, 0, "Global seed"},
           {"data", Type::kString, "", "Pair dataset (JSONL)"},
           {"model", Type::kString, "hrc", "bt | gpm | hrc"},
           {"subspaces", Type::kCount, 1, "Cyclic subspaces d (embedding dim 2d)"},
           {"feature_dim", Type::kCount, 8, "Feature width m of tabular items"},
           {"clip", Type::kOptNumber, kDefaultClip, "Reward clip bound, or none"},
           {"gating", Type::kBool, true, "Context gating on the cyclic head"},
           {"unit_norm", Type::kBool, true, "Normalize cyclic embeddings"},
           {"c1", Type::kNumber, 1.0, "Weight of the reward term (HRC)"},
           {"c2", Type::kNumber, 1.0, "Weight of the cyclic term (HRC)"},
           {"tau", Type::kNumber, kDefaultTau, "Loss temperature"},
           {"init_scale", Type::kNumber, 0.5, "Initialization scale"},
           {"lr", Type::kNumber, 0.05, "Learning rate"},
           {"epochs", Type::kCount, 600, "Training epochs"},
           {"batch_size", Type::kCount, 6, "Minibatch size (0 = full batch)"},
           {"train_weights", Type::kBool, false, "Also train C1 and C2 (HRC)"},
       }},
      {"selfplay",
       "Run tabular self-play against a fixed or scheduled oracle",
       {
           {"seed", Type::kCount, 0, "Global seed"},
           {"matrix", Type::kString, "", "Score matrix JSON (game source)"},
           {"model", Type::kString, "", "Fitted model JSON (game source)"},
           {"items", Type::kStringList, Json::array(), "Model item ids (default: all)"},
           {"context", Type::kString, "", "Model context id for the gates"},
           {"schedule", Type::kString, "hrc", "static | hrc"},
           {"lambda", Type::kNumber, 1.0, "Schedule lambda"},
           {"exponent", Type::kNumber, OracleSchedule::kDefaultExponent, "Schedule decay exponent p"},
           {"eta", Type::kEta, "theory", "Step size, or theory"},
           {"iterations", Type::kCount, 1000, "Iterations T"},
           {"estimation", Type::kString, "exact", "exact | monte_carlo"},
           {"samples", Type::kCount, 64, "Samples K for monte_carlo"},
           {"checkpoint_stride", Type::kCount, 0, "Checkpoint every k steps (0 = powers of two)"},
       }},
      {"witness",
       "Check what low-rank cyclic embeddings can represent",
       {
           {"seed", Type::kCount, 0, "Global seed"},
           {"check", Type::kString, "d2_construction", "d1_semicircle | d2_construction | hard_cycle | capacity"},
           {"n", Type::kCount, 3, "Cycle size"},
           {"subspaces", Type::kCount, 2, "Subspaces d"},
           {"angles", Type::kNumberList, Json::array(), "Cycle angles for d1_semicircle"},
           {"pattern", Type::kString, "dominant_cycle", "capacity pattern: cycle | rotational | dominant_cycle"},
           {"restarts", Type::kCount, 16, "capacity search restarts"},
           {"iterations", Type::kCount, 3000, "capacity search iterations per restart"},
       }},
  };
  return cmds;
}

const Command& find_command(std::string_view name) {
  for (const auto& c : table()) {
    if (name == c.name) return c;
  }
  throw UsageError("unknown command: " + std::string(name));
}

std::string flag_name(const char* key) {
  std::string f = std::string("--") + key;
  for (char& ch : f) {
    if (ch == '_') ch = '-';
  }
  return f;
}

bool type_ok(Type t, const Json& v) {
  switch (t) {
    case Type::kBool: return v.is_boolean();
    case Type::kCount: return v.is_number_unsigned();
    case Type::kNumber: return v.is_number();
    case Type::kOptNumber: return v.is_null() || v.is_number();
    case Type::kEta: return v.is_number() || (v.is_string() && v == "theory");
    case Type::kString: return v.is_string();
    case Type::kNumberList:
      return v.is_array() &&
             std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
    case Type::kStringList:
      return v.is_array() &&
             std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_string(); });
  }
  return false;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = s.find(',', pos);
    out.push_back(s.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": expected a number, got \"" + s + "\"");
}

// Converts a command-line string to the key's JSON type.
Json from_flag(const Key& key, const std::string& text) {
  const std::string flag = flag_name(key.name);
  switch (key.type) {
    case Type::kBool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw UsageError(flag + ": expected true or false");
    case Type::kCount: {
      if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError(flag + ": expected a non-negative integer");
      }
      try {
        return static_cast<std::uint64_t>(std::stoull(text));
      } catch (const std::exception&) {
        throw UsageError(flag + ": integer out of range");
      }
    }
    case Type::kNumber:
      return parse_double(text, flag);
    case Type::kOptNumber:
      if (text == "none") return nullptr;
      return parse_double(text, flag);
    case Type::kEta:
      if (text == "theory") return "theory";
      return parse_double(text, flag);
    case Type::kString:
      return text;
    case Type::kNumberList: {
      Json arr = Json::array();
      for (const auto& part : split(text)) arr.push_back(parse_double(part, flag));
      return arr;
    }
    case Type::kStringList: {
      Json arr = Json::array();
      for (const auto& part : split(text)) arr.push_back(part);
      return arr;
    }
  }
  throw UsageError(flag + ": unsupported value");
}

// Typed accessors over a resolved config.
struct Config {
  const Json& j;
  std::string str(const char* k) const { return j.at(k).get<std::string>(); }
  std::size_t count(const char* k) const { return j.at(k).get<std::size_t>(); }
  double num(const char* k) const { return j.at(k).get<double>(); }
  bool flag(const char* k) const { return j.at(k).get<bool>(); }
  std::uint64_t seed() const { return j.at("seed").get<std::uint64_t>(); }
};

void write_output(const fs::path& dir, const char* name, std::string_view content) {
  const fs::path path = dir / name;
  io::write_file(path, content);
  spdlog::debug("wrote {}", path.string());
}

std::string join(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? ", " : "") + fmt::format("{:.6g}", v[i]);
  }
  return out;
}

Json matrix_rows(std::span<const double> full, std::size_t n) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(std::vector<double>(full.begin() + i * n, full.begin() + (i + 1) * n));
  }
  return rows;
}

void cmd_decompose(const Config& c, const fs::path& out_dir, std::ostream& out) {
  const std::string input = c.str("input");
  if (input.empty()) throw UsageError("decompose needs --input");
  const auto m = io::score_matrix_from_json(
      io::parse_json(io::read_file(input), input));
  const auto d = decompose(m);
  const double fraction = m.is_zero() ? 0.0 : transitivity_fraction(m);
  auto j = io::to_json(d);
  j["transitivity_fraction"] = fraction;
  write_output(out_dir, "decomposition.json", io::dump(j));
  out << "f = [" << join(d.potential) << "]\n";
  out << fmt::format("transitivity fraction = {:.6f}\n", fraction);
}

void cmd_gen_data(const Config& c, const fs::path& out_dir, std::ostream& out) {
  const auto kind = parse_instance_kind(c.str("mode"));
  const std::size_t n = c.count("count");
  if (n == 0) throw UsageError("--count must be >= 1");
  const auto instances = generate(kind, c.seed(), n);
  const auto data = to_pair_dataset(instances);
  write_output(out_dir, "pairs.jsonl", io::to_jsonl(data));
  const Json meta{{"count", n},
                  {"mode", std::string(instance_kind_name(kind))},
                  {"seed", c.seed()},
                  {"records", data.size()}};
  write_output(out_dir, "metadata.json", io::dump(meta));
  out << fmt::format("{} {} instances, {} pair records\n", n,
                     instance_kind_name(kind), data.size());
}

void cmd_fit(const Config& c, const fs::path& out_dir, std::ostream& out) {
  const std::string path = c.str("data");
  if (path.empty()) throw UsageError("fit needs --data");
  const auto data = io::dataset_from_jsonl(io::read_file(path), path);

  ModelSpec spec;
  spec.kind = parse_model_kind(c.str("model"));
  spec.subspaces = c.count("subspaces");
  spec.feature_dim = c.count("feature_dim");
  if (c.j.at("clip").is_null()) {
    spec.clip.reset();
  } else {
    spec.clip = c.num("clip");
  }
  spec.gating = c.flag("gating");
  spec.unit_norm = c.flag("unit_norm");
  spec.c1 = c.num("c1");
  spec.c2 = c.num("c2");
  spec.tau = c.num("tau");
  spec.init_scale = c.num("init_scale");

  FitConfig fit_config;
  fit_config.learning_rate = c.num("lr");
  fit_config.epochs = c.count("epochs");
  fit_config.batch_size = c.count("batch_size");
  fit_config.seed = derive_seed(c.seed(), "cli/fit");
  fit_config.train_weights = c.flag("train_weights");
  fit_config.init_scale = spec.init_scale;

  const auto model = make_model(spec, derive_seed(c.seed(), "cli/model"));
  spdlog::info("fitting {} on {} records for {} epochs", model_kind_name(spec.kind),
               data.size(), fit_config.epochs);
  const auto result = fit(model, data, fit_config);

  write_output(out_dir, "model.json", io::dump(io::to_json(result.model)));
  write_output(out_dir, "history.csv", io::history_csv(result));
  const double final_loss = result.loss_history.empty() ? pair_loss(result.model, data)
                                                        : result.loss_history.back();
  const double final_acc = result.accuracy_history.empty()
                               ? eval_accuracy(result.model, data)
                               : result.accuracy_history.back();
  Json metrics{{"final_loss", final_loss},
               {"final_accuracy", final_acc},
               {"epochs", fit_config.epochs},
               {"records", data.size()},
               {"mean_embedding_norm", result.mean_embedding_norm}};
  write_output(out_dir, "metrics.json", io::dump(metrics));
  out << fmt::format("final loss {:.6f}, accuracy {:.4f}\n", final_loss, final_acc);
}

// Score matrices from a fitted model over the chosen items: the reward
// head gives a potential game, the cyclic head the rest.
struct ModelGame {
  std::vector<double> potential;
  PreferenceScoreMatrix cyclic_raw;
};

ModelGame model_game(const PreferenceModel& model, const Config& c) {
  std::vector<std::string> ids;
  for (const auto& v : c.j.at("items")) ids.push_back(v.get<std::string>());
  if (ids.empty()) ids = model.items.ids();
  if (ids.size() < 2) throw DomainError("selfplay needs at least two items");

  std::vector<std::span<const double>> feats;
  for (const auto& id : ids) {
    auto row = model.items.find(id);
    if (!row) throw DomainError("model has no item \"" + id + "\"");
    feats.push_back(model.items.row(*row));
  }
  std::vector<double> zero(model.feature_dim, 0.0);
  std::span<const double> context = zero;
  const std::string ctx = c.str("context");
  if (!ctx.empty()) {
    auto row = model.contexts.find(ctx);
    if (!row) throw DomainError("model has no context \"" + ctx + "\"");
    context = model.contexts.row(*row);
  }

  const std::size_t n = ids.size();
  ModelGame g;
  g.potential.assign(n, 0.0);
  const double c1 = model.kind == ModelKind::kHrc ? model.c1 : 1.0;
  const double c2 = model.kind == ModelKind::kHrc ? model.c2 : 1.0;
  if (model.reward) {
    for (std::size_t i = 0; i < n; ++i) g.potential[i] = c1 * model.reward->reward(feats[i]);
  }
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      upper.push_back(model.cyclic ? c2 * gpm_score(*model.cyclic, context, feats[i], feats[j])
                                   : 0.0);
    }
  }
  g.cyclic_raw = PreferenceScoreMatrix::from_upper(n, upper);
  return g;
}

void cmd_selfplay(const Config& c, const fs::path& out_dir, std::ostream& out) {
  const std::string matrix_path = c.str("matrix");
  const std::string model_path = c.str("model");
  if (matrix_path.empty() == model_path.empty()) {
    throw UsageError("selfplay needs exactly one of --matrix or --model");
  }
  const std::string kind = c.str("schedule");
  if (kind != "static" && kind != "hrc") {
    throw UsageError("--schedule must be static or hrc");
  }

  PreferenceScoreMatrix transitive, cyclic;
  if (!matrix_path.empty()) {
    const auto m = io::score_matrix_from_json(
        io::parse_json(io::read_file(matrix_path), matrix_path));
    auto d = decompose(m);
    transitive = std::move(d.transitive);
    cyclic = std::move(d.cyclic);
  } else {
    const auto model = io::model_from_json(
        io::parse_json(io::read_file(model_path), model_path));
    auto g = model_game(model, c);
    // The cyclic head only approximates zero row sums; its transitive
    // remainder moves into the potential.
    auto d = decompose(g.cyclic_raw);
    for (std::size_t i = 0; i < g.potential.size(); ++i) g.potential[i] += d.potential[i];
    transitive = PreferenceScoreMatrix::from_potential(g.potential);
    cyclic = std::move(d.cyclic);
  }

  OracleSchedule schedule =
      kind == "static"
          ? OracleSchedule::fixed(PreferenceScoreMatrix::combine(1.0, transitive, 1.0, cyclic))
          : OracleSchedule::hrc(transitive, cyclic, c.num("lambda"), c.num("exponent"));
  for (const auto& w : schedule.warnings()) spdlog::warn("{}", w);

  SolverConfig solver;
  if (c.j.at("eta").is_number()) solver.eta = c.num("eta");
  solver.iterations = c.count("iterations");
  solver.estimation = parse_estimation(c.str("estimation"));
  solver.samples = c.count("samples");
  solver.seed = derive_seed(c.seed(), "cli/selfplay");
  solver.checkpoint_stride = c.count("checkpoint_stride");

  const auto report = run(schedule, solver, TabularPolicy::uniform(schedule.size()));
  write_output(out_dir, "trajectory.json", io::dump(io::to_json(report)));
  write_output(out_dir, "trajectory.csv", io::trajectory_csv(report));
  out << fmt::format("eta {:.6g}, final gap {:.6g}\n", report.eta, report.final_gap);
  out << "mixture = [" << join(report.final_mixture.probs()) << "]\n";
}

void cmd_witness(const Config& c, const fs::path& out_dir, std::ostream& out) {
  const std::string check = c.str("check");
  const std::size_t n = c.count("n");
  const std::size_t d = c.count("subspaces");
  Json j;
  j["construction"] = check;
  Json params;
  bool feasible = false;
  double margin = 0.0;

  if (check == "d1_semicircle") {
    std::vector<double> angles;
    for (const auto& v : c.j.at("angles")) angles.push_back(v.get<double>());
    params["angles"] = angles;
    const auto r = d1_dominant_feasible(angles);
    feasible = r.feasible;
    margin = r.margin;
    PlanarEmbedding e(angles.size() + (r.witness ? 1 : 0), 1);
    for (std::size_t i = 0; i < angles.size(); ++i) e.set(i, 0, 1.0, angles[i]);
    if (r.witness) e.set(angles.size(), 0, 1.0, *r.witness);
    j["witness_angle"] = r.witness ? Json(*r.witness) : Json(nullptr);
    j["scores"] = matrix_rows(score_table(e), e.items());
  } else if (check == "d2_construction") {
    params["n"] = n;
    const auto e = build_dominant_cycle_d2(n);
    const auto pc = check_pattern(e, SignPattern::rotational(n, true));
    feasible = pc.ok();
    margin = pc.min_margin;
    std::vector<double> dominant;
    for (std::size_t i = 0; i < n; ++i) dominant.push_back(geometric_score(e, n, i));
    j["dominant_scores"] = dominant;
    j["scores"] = matrix_rows(score_table(e), e.items());
  } else if (check == "hard_cycle") {
    params["n"] = n;
    params["subspaces"] = d;
    const auto r = hard_cycle_infeasibility(n, d, derive_seed(c.seed(), "cli/witness"));
    feasible = r.feasible;
    margin = r.max_min_score;
    j["best_phase"] = r.best_phase;
    j["sampled_max_min"] = r.sampled_max_min;
    PlanarEmbedding e(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < d; ++l) {
        e.set(i, l, 1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / n);
      }
    }
    j["scores"] = matrix_rows(score_table(e), n);
  } else if (check == "capacity") {
    const std::string name = c.str("pattern");
    params["pattern"] = name;
    params["n"] = n;
    params["subspaces"] = d;
    SignPattern pattern;
    if (name == "cycle") {
      pattern = SignPattern::cycle(n);
    } else if (name == "rotational") {
      pattern = SignPattern::rotational(n, false);
    } else if (name == "dominant_cycle") {
      pattern = SignPattern::rotational(n, true);
    } else {
      throw UsageError("--pattern must be cycle, rotational or dominant_cycle");
    }
    CapacitySearchConfig sc;
    sc.restarts = c.count("restarts");
    sc.iterations = c.count("iterations");
    sc.seed = derive_seed(c.seed(), "cli/witness");
    const auto r = pattern_capacity_search(pattern, d, sc);
    feasible = r.check.ok();
    margin = r.check.min_margin;
    j["accuracy"] = r.accuracy;
    j["satisfied"] = r.check.satisfied;
    j["constraints"] = r.check.total;
    j["scores"] = matrix_rows(score_table(r.embedding), r.embedding.items());
  } else {
    throw UsageError("--check must be d1_semicircle, d2_construction, hard_cycle or capacity");
  }
  j["parameters"] = params;
  j["feasible"] = feasible;
  j["margin"] = margin;
  write_output(out_dir, "witness.json", io::dump(j));
  out << fmt::format("{}: {} (margin {:.6g})\n", check,
                     feasible ? "feasible" : "infeasible", margin);
}

void configure_logging() {
  static bool done = false;
  if (!done) {
    auto logger = spdlog::stderr_color_mt("prefgame");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    done = true;
  }
  const char* env = std::getenv("PREFGAME_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("unknown PREFGAME_LOG level \"{}\"", level);
  }
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : table()) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

Json default_config(std::string_view command) {
  Json j = Json::object();
  for (const auto& k : find_command(command).keys) j[k.name] = k.value;
  return j;
}

Json resolve_config(std::string_view command, const Json& overrides) {
  const Command& cmd = find_command(command);
  if (!overrides.is_object()) throw UsageError("configuration must be a JSON object");
  Json j = default_config(command);
  for (const auto& [key, value] : overrides.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != cmd.name) {
        throw UsageError("configuration is for another command");
      }
      continue;
    }
    const Key* spec = nullptr;
    for (const auto& k : cmd.keys) {
      if (key == k.name) spec = &k;
    }
    if (spec == nullptr) {
      throw UsageError(fmt::format("unknown key \"{}\" for {}", key, cmd.name));
    }
    Json v = value;
    // A whole-valued float is accepted where a count is expected.
    if (spec->type == Type::kCount && v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) v = static_cast<std::uint64_t>(d);
    }
    if (spec->type == Type::kCount && v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      v = v.get<std::uint64_t>();
    }
    if (!type_ok(spec->type, v)) {
      throw UsageError(fmt::format("key \"{}\" has a value of the wrong type", key));
    }
    j[key] = v;
  }
  return j;
}

void run_command(std::string_view command, const Json& config,
                 const fs::path& out_dir, std::ostream& out) {
  const Command& cmd = find_command(command);
  const Json resolved = resolve_config(command, config);
  Json echo = Json::object();
  echo["command"] = cmd.name;
  for (const auto& [k, v] : resolved.items()) echo[k] = v;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const Config c{resolved};
  const std::string name = cmd.name;
  if (name == "decompose") {
    cmd_decompose(c, out_dir, out);
  } else if (name == "gen-data") {
    cmd_gen_data(c, out_dir, out);
  } else if (name == "fit") {
    cmd_fit(c, out_dir, out);
  } else if (name == "selfplay") {
    cmd_selfplay(c, out_dir, out);
  } else {
    cmd_witness(c, out_dir, out);
  }
  write_output(out_dir, "config.json", io::dump(echo));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const OracleError*>(&e)) {
    return kNumerical;
  }
  if (dynamic_cast<const Error*>(&e)) return kData;
  return kNumerical;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Preference games: decomposition, model fitting, self-play and "
               "representation witnesses"};
  app.require_subcommand(1);
  app.footer(
      "Outputs in --out DIR: config.json (effective configuration) plus\n"
      "  decompose  decomposition.json\n"
      "  gen-data   pairs.jsonl, metadata.json\n"
      "  fit        model.json, metrics.json, history.csv (epoch,loss,accuracy)\n"
      "  selfplay   trajectory.json, trajectory.csv (t,gap,epsilon_t,entropy)\n"
      "  witness    witness.json\n"
      "Exit codes: 0 ok, 1 usage, 2 data, 3 numerical. PREFGAME_LOG=error|info|debug.");

  struct Parsed {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::string out_dir = ".";
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Parsed> parsed(table().size());
  for (std::size_t i = 0; i < table().size(); ++i) {
    const auto& cmd = table()[i];
    auto& p = parsed[i];
    p.sub = app.add_subcommand(cmd.name, cmd.help);
    p.sub->add_option("--config", p.config_path, "JSON configuration file");
    p.sub->add_option("--out", p.out_dir, "Output directory")->capture_default_str();
    for (const auto& k : cmd.keys) {
      const std::string def = k.value.is_string() ? k.value.get<std::string>() : k.value.dump();
      p.options[k.name] =
          p.sub->add_option(flag_name(k.name), p.values[k.name],
                            fmt::format("{} [default: {}]", k.help, def));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (std::size_t i = 0; i < table().size(); ++i) {
    auto& p = parsed[i];
    if (!p.sub->parsed()) continue;
    const auto& cmd = table()[i];
    try {
      Json overrides = Json::object();
      if (!p.config_path.empty()) {
        overrides = io::parse_json(io::read_file(p.config_path), p.config_path);
        if (!overrides.is_object()) throw UsageError("configuration must be a JSON object");
      }
      for (const auto& k : cmd.keys) {
        if (p.options[k.name]->count() > 0) overrides[k.name] = from_flag(k, p.values[k.name]);
      }
      run_command(cmd.name, overrides, p.out_dir, out);
      return kOk;
    } catch (const std::exception& e) {
      const int code = exit_code_for(e);
      spdlog::error("{}", e.what());
      return code;
    }
  }
  return kUsage;
}

}  // namespace prefgame::cli
