#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "prefgame/cli.hpp"
#include "prefgame/errors.hpp"
#include "prefgame/io.hpp"
#include "support.hpp"

using namespace prefgame;
namespace fs = std::filesystem;
using io::Json;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() /
            ("prefgame_cli_" + name + "_" + std::to_string(std::random_device{}()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& p) const { return dir / p; }
};

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

// In-process entry point with argv built from strings.
Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "prefgame");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Result r;
  r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Json read_json(const fs::path& p) { return io::parse_json(io::read_file(p), p.string()); }

std::map<std::string, std::string> files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = io::read_file(e.path());
  }
  return out;
}

void write_matrix(const fs::path& path, const PreferenceScoreMatrix& m) {
  io::write_file(path, io::dump(io::to_json(m)));
}

// Runs a command, then re-runs it from the echoed config into a second
// directory and requires identical files.
void check_reproducible(const Scratch& s, const std::string& name,
                        std::vector<std::string> args) {
  const auto first = s / (name + "_a");
  const auto second = s / (name + "_b");
  args.push_back("--out");
  args.push_back(first.string());
  REQUIRE(invoke(args).code == 0);
  const auto rerun =
      invoke({args[0], "--config", (first / "config.json").string(), "--out", second.string()});
  REQUIRE(rerun.code == 0);
  const auto a = files(first), b = files(second);
  CHECK(a.size() > 1);
  CHECK(a == b);
}

}  // namespace

TEST_CASE("configuration defaults and validation") {
  CHECK(cli::commands() ==
        std::vector<std::string>{"decompose", "gen-data", "fit", "selfplay", "witness"});
  for (const auto& c : cli::commands()) {
    CHECK(cli::default_config(c).begin().key() == "seed");
  }
  const auto fit = cli::resolve_config("fit", Json{{"epochs", 5}, {"clip", nullptr}});
  CHECK(fit["epochs"] == 5);
  CHECK(fit["clip"].is_null());
  CHECK(fit["lr"] == 0.05);
  CHECK(cli::resolve_config("fit", Json{{"epochs", 5.0}})["epochs"] == 5);
  CHECK_THROWS_AS(cli::resolve_config("fit", Json{{"epoch", 5}}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config("fit", Json{{"epochs", -1}}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config("fit", Json{{"gating", "yes"}}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config("fit", Json{{"command", "witness"}}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config("train", Json::object()), UsageError);
  CHECK(cli::resolve_config("selfplay", Json{{"eta", "theory"}})["eta"] == "theory");
  CHECK_THROWS_AS(cli::resolve_config("selfplay", Json{{"eta", "fast"}}), UsageError);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(UsageError("x")) == cli::kUsage);
  CHECK(cli::exit_code_for(ParseError("x", "f")) == cli::kData);
  CHECK(cli::exit_code_for(IoError("x")) == cli::kData);
  CHECK(cli::exit_code_for(DomainError("x")) == cli::kData);
  CHECK(cli::exit_code_for(TrainingError("x", 3)) == cli::kNumerical);
  CHECK(cli::exit_code_for(OracleError("x", {})) == cli::kNumerical);

  Scratch s("codes");
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kUsage);
  CHECK(invoke({"fit", "--epochs", "many"}).code == cli::kUsage);
  CHECK(invoke({"fit", "--bogus", "1"}).code == cli::kUsage);
  CHECK(invoke({"fit", "--out", s.dir.string()}).code == cli::kUsage);
  CHECK(invoke({"decompose", "--input", (s / "missing.json").string(), "--out",
                s.dir.string()})
            .code == cli::kData);
  io::write_file(s / "broken.json", "{\"n\": 3,\n \"upper\": [1, 2\n");
  const auto broken =
      invoke({"decompose", "--input", (s / "broken.json").string(), "--out", s.dir.string()});
  CHECK(broken.code == cli::kData);
  io::write_file(s / "bad_config.json", "{\"epochs\": 3, \"colour\": \"red\"}");
  CHECK(invoke({"fit", "--config", (s / "bad_config.json").string()}).code == cli::kUsage);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("decompose") {
  Scratch s("decompose");
  write_matrix(s / "rps.json", testing::rps());
  auto r = invoke({"decompose", "--input", (s / "rps.json").string(), "--out",
                   (s / "rps").string()});
  REQUIRE(r.code == 0);
  CHECK(read_json(s / "rps" / "decomposition.json")["transitivity_fraction"] == 0.0);

  write_matrix(s / "rank.json",
               PreferenceScoreMatrix::from_potential(std::vector<double>{2.0, 1.0, 0.0}));
  REQUIRE(invoke({"decompose", "--input", (s / "rank.json").string(), "--out",
                  (s / "rank").string()})
              .code == 0);
  CHECK(read_json(s / "rank" / "decomposition.json")["transitivity_fraction"].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-15));

  const auto mixed = PreferenceScoreMatrix::combine(
      1.0, PreferenceScoreMatrix::from_potential(std::vector<double>{2.0, 1.0, 0.0}), 1.0,
      testing::rps());
  write_matrix(s / "mixed.json", mixed);
  REQUIRE(invoke({"decompose", "--input", (s / "mixed.json").string(), "--out",
                  (s / "mixed").string()})
              .code == 0);
  const auto back = io::decomposition_from_json(read_json(s / "mixed" / "decomposition.json"));
  const auto direct = decompose(mixed);
  CHECK(back.potential == direct.potential);
  CHECK(back.cyclic == direct.cyclic);
  CHECK(read_json(s / "mixed" / "config.json")["command"] == "decompose");
}

TEST_CASE("gen-data") {
  Scratch s("gen");
  for (auto [mode, records] : {std::pair{"cyclic", 30}, {"dominant_cycle", 60}}) {
    const auto dir = s / mode;
    REQUIRE(invoke({"gen-data", "--mode", mode, "--count", "10", "--seed", "4", "--out",
                    dir.string()})
                .code == 0);
    const auto data = io::dataset_from_jsonl(io::read_file(dir / "pairs.jsonl"));
    CHECK(data.size() == std::size_t(records));
    const auto meta = read_json(dir / "metadata.json");
    CHECK(meta["count"] == 10);
    CHECK(meta["mode"] == mode);
    CHECK(meta["seed"] == 4);
  }
  REQUIRE(invoke({"gen-data", "--mode", "cyclic", "--count", "10", "--seed", "4", "--out",
                  (s / "again").string()})
              .code == 0);
  CHECK(io::read_file(s / "again" / "pairs.jsonl") == io::read_file(s / "cyclic" / "pairs.jsonl"));
  CHECK(invoke({"gen-data", "--mode", "ranking", "--out", s.dir.string()}).code == cli::kData);
  CHECK(invoke({"gen-data", "--count", "0", "--out", s.dir.string()}).code == cli::kUsage);
}

TEST_CASE("fit") {
  Scratch s("fit");
  REQUIRE(invoke({"gen-data", "--mode", "dominant_cycle", "--count", "20", "--out",
                  (s / "dc").string()})
              .code == 0);
  REQUIRE(invoke({"gen-data", "--mode", "cyclic", "--count", "20", "--out",
                  (s / "cy").string()})
              .code == 0);
  const auto dc = (s / "dc" / "pairs.jsonl").string();
  const auto cy = (s / "cy" / "pairs.jsonl").string();

  REQUIRE(invoke({"fit", "--data", dc, "--model", "hrc", "--subspaces", "1", "--unit-norm",
                  "false", "--out", (s / "hrc").string()})
              .code == 0);
  CHECK(read_json(s / "hrc" / "metrics.json")["final_accuracy"] == 1.0);
  const auto history = io::read_file(s / "hrc" / "history.csv");
  CHECK(history.rfind("epoch,loss,accuracy\n1,", 0) == 0);
  CHECK(io::model_from_json(read_json(s / "hrc" / "model.json")).items.size() == 80);

  REQUIRE(invoke({"fit", "--data", dc, "--model", "gpm", "--subspaces", "1", "--unit-norm",
                  "false", "--out", (s / "gpm").string()})
              .code == 0);
  CHECK(read_json(s / "gpm" / "metrics.json")["final_accuracy"].get<double>() < 1.0);

  REQUIRE(invoke({"fit", "--data", cy, "--model", "bt", "--out", (s / "bt").string()}).code ==
          0);
  const auto bt = io::model_from_json(read_json(s / "bt" / "model.json"));
  const auto data = io::dataset_from_jsonl(io::read_file(cy));
  const auto scores = record_scores(bt, data);
  for (std::size_t k = 0; k < data.size(); k += 3) {
    const int correct = (scores[k] > 0) + (scores[k + 1] > 0) + (scores[k + 2] > 0);
    CHECK(correct <= 2);
  }

  const auto diverge = invoke({"fit", "--data", dc, "--model", "gpm", "--gating", "false",
                               "--unit-norm", "false", "--lr", "1e200", "--epochs", "5",
                               "--out", (s / "nan").string()});
  CHECK(diverge.code == cli::kNumerical);
}

TEST_CASE("selfplay") {
  Scratch s("selfplay");
  write_matrix(s / "rps.json", testing::rps());
  REQUIRE(invoke({"selfplay", "--matrix", (s / "rps.json").string(), "--schedule", "static",
                  "--iterations", "5000", "--eta", "0.5", "--out", (s / "static").string()})
              .code == 0);
  const auto traj = read_json(s / "static" / "trajectory.json");
  CHECK(traj["final_gap"].get<double>() <= 0.02);
  CHECK(io::read_file(s / "static" / "trajectory.csv").rfind("t,gap,epsilon_t,entropy\n", 0) ==
        0);

  testing::Rng rng(80);
  write_matrix(s / "game.json", testing::random_game(rng, 6));
  const auto game = (s / "game.json").string();
  REQUIRE(invoke({"selfplay", "--matrix", game, "--schedule", "hrc", "--lambda", "0", "--out",
                  (s / "zero").string()})
              .code == 0);
  REQUIRE(invoke({"selfplay", "--matrix", game, "--schedule", "static", "--out",
                  (s / "flat").string()})
              .code == 0);
  CHECK(io::read_file(s / "zero" / "trajectory.csv") ==
        io::read_file(s / "flat" / "trajectory.csv"));

  // A fitted HRC model over the four candidates of one instance.
  REQUIRE(invoke({"gen-data", "--count", "1", "--out", (s / "data").string()}).code == 0);
  REQUIRE(invoke({"fit", "--data", (s / "data" / "pairs.jsonl").string(), "--unit-norm",
                  "false", "--out", (s / "model").string()})
              .code == 0);
  const auto model_path = (s / "model" / "model.json").string();
  const auto r = invoke({"selfplay", "--model", model_path, "--context", "p00000", "--items",
                         "p00000/A,p00000/B,p00000/C,p00000/D", "--iterations", "400", "--out",
                         (s / "model_play").string()});
  REQUIRE(r.code == 0);
  CHECK(read_json(s / "model_play" / "trajectory.json")["final_mixture"].size() == 4);
  CHECK(invoke({"selfplay", "--model", model_path, "--items", "p00000/A,nope", "--out",
                (s / "bad").string()})
            .code == cli::kData);
  CHECK(invoke({"selfplay", "--out", (s / "none").string()}).code == cli::kUsage);
  CHECK(invoke({"selfplay", "--matrix", game, "--schedule", "sometimes", "--out",
                (s / "none").string()})
            .code == cli::kUsage);
}

TEST_CASE("witness") {
  Scratch s("witness");
  REQUIRE(invoke({"witness", "--check", "d2_construction", "--n", "3", "--out",
                  (s / "d2").string()})
              .code == 0);
  const auto d2 = read_json(s / "d2" / "witness.json");
  CHECK(d2["feasible"] == true);
  for (const auto& v : d2["dominant_scores"]) {
    CHECK(v.get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(d2["scores"].size() == 4);

  REQUIRE(invoke({"witness", "--check", "hard_cycle", "--n", "3", "--subspaces", "4", "--out",
                  (s / "hard").string()})
              .code == 0);
  const auto hard = read_json(s / "hard" / "witness.json");
  CHECK(hard["feasible"] == false);
  CHECK(hard["margin"].get<double>() <= 1e-9);

  REQUIRE(invoke({"witness", "--check", "capacity", "--pattern", "cycle", "--n", "3",
                  "--subspaces", "1", "--out", (s / "cap").string()})
              .code == 0);
  CHECK(read_json(s / "cap" / "witness.json")["accuracy"] == 1.0);

  REQUIRE(invoke({"witness", "--check", "d1_semicircle", "--angles", "0,2.0943951,4.1887902",
                  "--out", (s / "semi").string()})
              .code == 0);
  const auto semi = read_json(s / "semi" / "witness.json");
  CHECK(semi["feasible"] == false);
  CHECK(semi["witness_angle"].is_null());
  CHECK(semi["parameters"]["angles"].size() == 3);

  CHECK(invoke({"witness", "--check", "oracle", "--out", (s / "x").string()}).code ==
        cli::kUsage);
  CHECK(invoke({"witness", "--check", "d2_construction", "--n", "2", "--out",
                (s / "x").string()})
            .code == cli::kData);
}

TEST_CASE("every command reproduces from its echoed config") {
  Scratch s("repro");
  testing::Rng rng(81);
  write_matrix(s / "game.json", testing::random_game(rng, 5));
  check_reproducible(s, "decompose", {"decompose", "--input", (s / "game.json").string()});
  check_reproducible(s, "gen", {"gen-data", "--count", "5", "--seed", "9"});
  check_reproducible(s, "fit",
                     {"fit", "--data", (s / "gen_a" / "pairs.jsonl").string(), "--epochs", "50",
                      "--seed", "3"});
  check_reproducible(s, "selfplay",
                     {"selfplay", "--matrix", (s / "game.json").string(), "--estimation",
                      "monte_carlo", "--samples", "8", "--iterations", "200", "--seed", "5"});
  check_reproducible(s, "witness",
                     {"witness", "--check", "capacity", "--restarts", "2", "--iterations",
                      "300", "--seed", "6"});
}

TEST_CASE("the installed binary") {
  const char* bin = std::getenv("PREFGAME_BIN");
  if (bin == nullptr) {
    MESSAGE("PREFGAME_BIN not set; binary checks skipped");
    return;
  }
  Scratch s("binary");
  auto sh = [&](const std::string& args) {
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(sh("--help") == 0);
  CHECK(sh("fit --no-such-flag") == 1);
  CHECK(sh("decompose --input " + (s / "missing.json").string() + " --out " +
           s.dir.string()) == 2);
  CHECK(sh("witness --check d2_construction --out " + (s / "w").string()) == 0);
  CHECK(fs::exists(s / "w" / "witness.json"));
  CHECK(fs::exists(s / "w" / "config.json"));
}
