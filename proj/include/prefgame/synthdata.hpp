#pragma once

// Synthetic preference structures built from four-dimensional integer
// annotations: pure 3-cycles (A > B on dim 0, B > C on dim 1, C > A on
// dim 2) and the same cycle plus a candidate D that beats A, B and C on all
// three deciding dimensions. Dimension 3 is drawn but never decides a pair.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prefgame/models.hpp"

namespace prefgame {

inline constexpr int kAnnotationMin = 1;
inline constexpr int kAnnotationMax = 10;
inline constexpr std::size_t kAnnotationDims = 4;
inline constexpr long kMaxRejections = 1'000'000;

enum class InstanceKind { kCyclic, kDominantCycle };

std::string_view instance_kind_name(InstanceKind kind);
InstanceKind parse_instance_kind(std::string_view name);

struct AnnotatedCandidate {
  std::string id;  // "A", "B", "C", "D"
  std::array<int, kAnnotationDims> scores{};
};

struct SyntheticPair {
  std::string winner;
  std::string loser;
  int dimension = 0;
};

struct SyntheticInstance {
  std::string prompt_id;
  InstanceKind kind = InstanceKind::kCyclic;
  std::vector<AnnotatedCandidate> candidates;
  std::vector<SyntheticPair> pairs;
};

// Rejection sampling over uniform annotations. Deterministic given `seed`.
// Throws GenerationError if one instance needs more than kMaxRejections
// draws.
std::vector<SyntheticInstance> gen_cyclic(std::uint64_t seed, std::size_t count);
std::vector<SyntheticInstance> gen_dominant_cycle(std::uint64_t seed,
                                                  std::size_t count);
std::vector<SyntheticInstance> generate(InstanceKind kind, std::uint64_t seed,
                                        std::size_t count);

// Builds the instance for given annotations, without checking them.
SyntheticInstance make_cyclic_instance(std::string prompt_id,
                                       const AnnotatedCandidate& a,
                                       const AnnotatedCandidate& b,
                                       const AnnotatedCandidate& c);
SyntheticInstance make_dominant_instance(std::string prompt_id,
                                         const AnnotatedCandidate& a,
                                         const AnnotatedCandidate& b,
                                         const AnnotatedCandidate& c,
                                         const AnnotatedCandidate& d);

// Throws DomainError describing the first violated condition: annotation
// range, pair count, strict deciding-dimension gaps, cycle shape, dominance.
void validate_instance(const SyntheticInstance& instance);

// One record per pair, winner first. Item ids are "<prompt>/<candidate>" and
// the context id is the prompt id.
PairDataset to_pair_dataset(std::span<const SyntheticInstance> instances);

}  // namespace prefgame
