#pragma once

#include <cstdint>
#include <random>

namespace ctfconn {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; derives decorrelated child seeds from a parent seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child stream seed for a (parent, tag) pair.
constexpr std::uint64_t child_seed(std::uint64_t parent, std::uint64_t tag) {
  return mix_seed(parent ^ mix_seed(tag + 0x632be59bd9b4e019ULL));
}

}  // namespace ctfconn
