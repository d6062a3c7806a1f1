#include <map>
#include <set>

#include "doctest.h"
#include "prefgame/errors.hpp"
#include "prefgame/synthdata.hpp"
#include "support.hpp"

using namespace prefgame;

namespace {

AnnotatedCandidate candidate(std::string id, std::array<int, 4> scores) {
  return AnnotatedCandidate{std::move(id), scores};
}

const auto kA = candidate("A", {9, 2, 5, 1});
const auto kB = candidate("B", {4, 8, 6, 1});
const auto kC = candidate("C", {7, 3, 9, 1});
const auto kD = candidate("D", {10, 10, 10, 1});

// Pairs of one instance as (winner, loser) indices over its candidates.
std::vector<std::pair<std::size_t, std::size_t>> index_pairs(const SyntheticInstance& inst) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < inst.candidates.size(); ++i) index[inst.candidates[i].id] = i;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : inst.pairs) out.emplace_back(index.at(p.winner), index.at(p.loser));
  return out;
}

bool same(const SyntheticInstance& a, const SyntheticInstance& b) {
  if (a.prompt_id != b.prompt_id || a.candidates.size() != b.candidates.size() ||
      a.pairs.size() != b.pairs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    if (a.candidates[i].id != b.candidates[i].id ||
        a.candidates[i].scores != b.candidates[i].scores) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    if (a.pairs[i].winner != b.pairs[i].winner || a.pairs[i].loser != b.pairs[i].loser ||
        a.pairs[i].dimension != b.pairs[i].dimension) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("hand-checked cyclic instance is accepted") {
  const auto inst = make_cyclic_instance("p", kA, kB, kC);
  CHECK_NOTHROW(validate_instance(inst));
  REQUIRE(inst.pairs.size() == 3);
  CHECK(inst.pairs[0].winner == "A");
  CHECK(inst.pairs[0].loser == "B");
  CHECK(inst.pairs[2].winner == "C");
  CHECK(inst.pairs[2].loser == "A");
}

TEST_CASE("maximal candidate dominates the hand-checked cycle") {
  const auto inst = make_dominant_instance("p", kA, kB, kC, kD);
  CHECK_NOTHROW(validate_instance(inst));
  REQUIRE(inst.pairs.size() == 6);
  for (std::size_t k = 3; k < 6; ++k) CHECK(inst.pairs[k].winner == "D");
}

TEST_CASE("validator rejects broken instances") {
  // B no longer beats C on the second dimension.
  const auto tie = candidate("C", {7, 8, 9, 1});
  CHECK_THROWS_AS(validate_instance(make_cyclic_instance("p", kA, kB, tie)), DomainError);
  const auto out_of_range = candidate("A", {11, 2, 5, 1});
  CHECK_THROWS_AS(validate_instance(make_cyclic_instance("p", out_of_range, kB, kC)),
                  DomainError);
  // D ties C on the third dimension.
  const auto weak = candidate("D", {10, 10, 9, 1});
  CHECK_THROWS_AS(validate_instance(make_dominant_instance("p", kA, kB, kC, weak)),
                  DomainError);
  auto reversed = make_cyclic_instance("p", kA, kB, kC);
  std::swap(reversed.pairs[0].winner, reversed.pairs[0].loser);
  CHECK_THROWS_AS(validate_instance(reversed), DomainError);
  auto short_inst = make_dominant_instance("p", kA, kB, kC, kD);
  short_inst.pairs.pop_back();
  CHECK_THROWS_AS(validate_instance(short_inst), DomainError);
}

TEST_CASE("generated instances satisfy the validator") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const auto& inst : gen_cyclic(seed, 50)) {
      CHECK_NOTHROW(validate_instance(inst));
      CHECK(inst.kind == InstanceKind::kCyclic);
      CHECK(inst.candidates.size() == 3);
    }
    for (const auto& inst : gen_dominant_cycle(seed, 50)) {
      CHECK_NOTHROW(validate_instance(inst));
      CHECK(inst.kind == InstanceKind::kDominantCycle);
      CHECK(inst.candidates.size() == 4);
      for (const auto& c : inst.candidates) {
        for (int v : c.scores) {
          CHECK(v >= kAnnotationMin);
          CHECK(v <= kAnnotationMax);
        }
      }
    }
  }
}

TEST_CASE("cyclic instances are intransitive") {
  for (const auto& inst : gen_cyclic(7, 100)) {
    CHECK(testing::best_ranking_agreement(3, index_pairs(inst)) == 2);
  }
}

TEST_CASE("a scalar ranking satisfies at most five of six dominant+cycle pairs") {
  for (const auto& inst : gen_dominant_cycle(8, 100)) {
    const auto pairs = index_pairs(inst);
    CHECK(testing::best_ranking_agreement(4, pairs) == 5);
    // The three dominance pairs alone are satisfiable.
    CHECK(testing::best_ranking_agreement(4, {pairs.begin() + 3, pairs.end()}) == 3);
  }
}

TEST_CASE("pair datasets") {
  CHECK(to_pair_dataset(gen_cyclic(1, 1)).size() == 3);
  CHECK(to_pair_dataset(gen_dominant_cycle(1, 1)).size() == 6);
  const auto data = to_pair_dataset(gen_dominant_cycle(1, 100));
  CHECK(data.size() == 600);
  std::set<std::string> ids, contexts;
  for (const auto& r : data.records) {
    ids.insert(r.winner.id);
    ids.insert(r.loser.id);
    REQUIRE(r.context.has_value());
    contexts.insert(r.context->id);
    CHECK(r.winner.id.rfind(r.context->id + "/", 0) == 0);
    CHECK(r.dim.has_value());
  }
  CHECK(ids.size() == 400);
  CHECK(contexts.size() == 100);
  CHECK_NOTHROW(data.validate());
}

TEST_CASE("generation is deterministic") {
  const auto a = gen_dominant_cycle(42, 20);
  const auto b = gen_dominant_cycle(42, 20);
  const auto c = gen_dominant_cycle(43, 20);
  bool all_same = true, any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_same = all_same && same(a[i], b[i]);
    any_diff = any_diff || !same(a[i], c[i]);
  }
  CHECK(all_same);
  CHECK(any_diff);
  CHECK(same(gen_cyclic(5, 3)[2], generate(InstanceKind::kCyclic, 5, 3)[2]));
}

TEST_CASE("generation arguments") {
  CHECK_THROWS_AS(gen_cyclic(0, 0), DomainError);
  CHECK(parse_instance_kind("cyclic") == InstanceKind::kCyclic);
  CHECK(parse_instance_kind("dominant_cycle") == InstanceKind::kDominantCycle);
  CHECK(instance_kind_name(InstanceKind::kDominantCycle) == "dominant_cycle");
  CHECK_THROWS_AS(parse_instance_kind("ranking"), DomainError);
}
