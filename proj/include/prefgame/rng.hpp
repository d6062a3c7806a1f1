#pragma once

// Named random substreams. Every consumer of randomness derives its own
// engine from the global seed and a fixed stream name, so adding a new
// consumer never shifts the draws of an existing one.
//
// Derivation: std::seed_seq over {seed low 32 bits, seed high 32 bits,
// FNV-1a(name) low 32 bits, FNV-1a(name) high 32 bits} seeds an
// std::mt19937_64.

#include <cstdint>
#include <random>
#include <string_view>

namespace prefgame {

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  const std::uint64_t tag = fnv1a64(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

// A 64-bit seed for APIs that take one, drawn from a named substream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  auto rng = substream(seed, name);
  return rng();
}

}  // namespace prefgame
