#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace codeguard {

// 64-bit FNV-1a. The basis is xor-ed with seed so that different seeds give
// independent hash families; seed 0 is plain FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer, used to spread FNV output across buckets.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::string to_hex(std::uint64_t value);

}  // namespace codeguard
