#include "prefgame/synthdata.hpp"

#include <fmt/format.h>

#include <map>
#include <random>

#include "prefgame/errors.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {
namespace {

constexpr std::array<const char*, 3> kCycleIds = {"A", "B", "C"};

class AnnotationSampler {
 public:
  explicit AnnotationSampler(std::uint64_t seed)
      : rng_(substream(seed, "synthdata/annotations")), dist_(kAnnotationMin, kAnnotationMax) {}

  AnnotatedCandidate draw(std::string id) {
    AnnotatedCandidate c{std::move(id), {}};
    for (int& v : c.scores) v = dist_(rng_);
    return c;
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> dist_;
};

// A beats B on dim 0, B beats C on dim 1, C beats A on dim 2.
bool cycle_holds(const AnnotatedCandidate& a, const AnnotatedCandidate& b,
                 const AnnotatedCandidate& c) {
  return a.scores[0] > b.scores[0] && b.scores[1] > c.scores[1] &&
         c.scores[2] > a.scores[2];
}

bool dominates(const AnnotatedCandidate& d, const AnnotatedCandidate& x) {
  for (int k = 0; k < 3; ++k) {
    if (d.scores[k] <= x.scores[k]) return false;
  }
  return true;
}

std::string prompt_name(std::size_t i) { return fmt::format("p{:05d}", i); }

}  // namespace

std::string_view instance_kind_name(InstanceKind kind) {
  return kind == InstanceKind::kCyclic ? "cyclic" : "dominant_cycle";
}

InstanceKind parse_instance_kind(std::string_view name) {
  if (name == "cyclic") return InstanceKind::kCyclic;
  if (name == "dominant_cycle") return InstanceKind::kDominantCycle;
  throw DomainError("unknown dataset mode '" + std::string(name) + "'");
}

SyntheticInstance make_cyclic_instance(std::string prompt_id,
                                       const AnnotatedCandidate& a,
                                       const AnnotatedCandidate& b,
                                       const AnnotatedCandidate& c) {
  SyntheticInstance inst;
  inst.prompt_id = std::move(prompt_id);
  inst.kind = InstanceKind::kCyclic;
  inst.candidates = {a, b, c};
  inst.pairs = {{a.id, b.id, 0}, {b.id, c.id, 1}, {c.id, a.id, 2}};
  return inst;
}

SyntheticInstance make_dominant_instance(std::string prompt_id,
                                         const AnnotatedCandidate& a,
                                         const AnnotatedCandidate& b,
                                         const AnnotatedCandidate& c,
                                         const AnnotatedCandidate& d) {
  SyntheticInstance inst = make_cyclic_instance(std::move(prompt_id), a, b, c);
  inst.kind = InstanceKind::kDominantCycle;
  inst.candidates.push_back(d);
  inst.pairs.push_back({d.id, a.id, 0});
  inst.pairs.push_back({d.id, b.id, 1});
  inst.pairs.push_back({d.id, c.id, 2});
  return inst;
}

std::vector<SyntheticInstance> gen_cyclic(std::uint64_t seed, std::size_t count) {
  return generate(InstanceKind::kCyclic, seed, count);
}

std::vector<SyntheticInstance> gen_dominant_cycle(std::uint64_t seed,
                                                  std::size_t count) {
  return generate(InstanceKind::kDominantCycle, seed, count);
}

std::vector<SyntheticInstance> generate(InstanceKind kind, std::uint64_t seed,
                                        std::size_t count) {
  if (count == 0) throw DomainError("instance count must be at least 1");
  AnnotationSampler sampler(seed);
  std::vector<SyntheticInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    long attempts = 0;
    auto bump = [&] {
      if (++attempts > kMaxRejections) {
        throw GenerationError(fmt::format(
            "instance {}: no admissible annotations after {} draws", i,
            kMaxRejections));
      }
    };
    // Joint rejection: a cycle whose members already hit the top of the
    // scale on a deciding dimension admits no dominant candidate, so the
    // whole tuple is redrawn.
    for (;;) {
      bump();
      AnnotatedCandidate a = sampler.draw(kCycleIds[0]);
      AnnotatedCandidate b = sampler.draw(kCycleIds[1]);
      AnnotatedCandidate c = sampler.draw(kCycleIds[2]);
      if (kind == InstanceKind::kCyclic) {
        if (!cycle_holds(a, b, c)) continue;
        out.push_back(make_cyclic_instance(prompt_name(i), a, b, c));
        break;
      }
      AnnotatedCandidate d = sampler.draw("D");
      if (!cycle_holds(a, b, c) || !dominates(d, a) || !dominates(d, b) ||
          !dominates(d, c)) {
        continue;
      }
      out.push_back(make_dominant_instance(prompt_name(i), a, b, c, d));
      break;
    }
  }
  return out;
}

void validate_instance(const SyntheticInstance& inst) {
  const bool dominant = inst.kind == InstanceKind::kDominantCycle;
  const std::size_t want_candidates = dominant ? 4 : 3;
  const std::size_t want_pairs = dominant ? 6 : 3;
  if (inst.candidates.size() != want_candidates) {
    throw DomainError(fmt::format("{}: expected {} candidates, got {}",
                                  inst.prompt_id, want_candidates,
                                  inst.candidates.size()));
  }
  if (inst.pairs.size() != want_pairs) {
    throw DomainError(fmt::format("{}: expected {} pairs, got {}",
                                  inst.prompt_id, want_pairs, inst.pairs.size()));
  }
  std::map<std::string, const AnnotatedCandidate*> by_id;
  for (const auto& c : inst.candidates) {
    for (int v : c.scores) {
      if (v < kAnnotationMin || v > kAnnotationMax) {
        throw DomainError(fmt::format("{}: annotation {} of {} out of range",
                                      inst.prompt_id, v, c.id));
      }
    }
    if (!by_id.emplace(c.id, &c).second) {
      throw DomainError(inst.prompt_id + ": duplicate candidate " + c.id);
    }
  }
  for (const auto& p : inst.pairs) {
    auto w = by_id.find(p.winner);
    auto l = by_id.find(p.loser);
    if (w == by_id.end() || l == by_id.end() || p.winner == p.loser) {
      throw DomainError(inst.prompt_id + ": pair references unknown candidate");
    }
    if (p.dimension < 0 || p.dimension >= 3) {
      throw DomainError(inst.prompt_id + ": deciding dimension out of range");
    }
    if (w->second->scores[p.dimension] <= l->second->scores[p.dimension]) {
      throw DomainError(fmt::format("{}: {} does not beat {} on dimension {}",
                                    inst.prompt_id, p.winner, p.loser,
                                    p.dimension));
    }
  }
  // The first three pairs must form the directed 3-cycle over three
  // distinct candidates.
  const auto& p = inst.pairs;
  if (p[0].loser != p[1].winner || p[1].loser != p[2].winner ||
      p[2].loser != p[0].winner || p[0].winner == p[1].winner ||
      p[1].winner == p[2].winner || p[0].winner == p[2].winner) {
    throw DomainError(inst.prompt_id + ": cycle pairs do not form a 3-cycle");
  }
  if (dominant) {
    const std::string& top = p[3].winner;
    std::map<std::string, int> beaten;
    for (std::size_t k = 3; k < 6; ++k) {
      if (p[k].winner != top) {
        throw DomainError(inst.prompt_id + ": dominance pairs have mixed winners");
      }
      ++beaten[p[k].loser];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (beaten[p[k].winner] != 1) {
        throw DomainError(inst.prompt_id +
                          ": dominant candidate must beat each cycle member once");
      }
      if (!dominates(*by_id.at(top), *by_id.at(p[k].winner))) {
        throw DomainError(inst.prompt_id + ": " + top +
                          " does not dominate on every deciding dimension");
      }
    }
  }
}

PairDataset to_pair_dataset(std::span<const SyntheticInstance> instances) {
  PairDataset data;
  for (const auto& inst : instances) {
    for (const auto& p : inst.pairs) {
      PairRecord r;
      r.context = FeatureRef{inst.prompt_id, {}};
      r.winner = FeatureRef{inst.prompt_id + "/" + p.winner, {}};
      r.loser = FeatureRef{inst.prompt_id + "/" + p.loser, {}};
      r.dim = p.dimension;
      data.records.push_back(std::move(r));
    }
  }
  return data;
}

}  // namespace prefgame
