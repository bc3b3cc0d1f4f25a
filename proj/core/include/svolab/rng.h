#ifndef SVOLAB_RNG_H_
#define SVOLAB_RNG_H_

#include <cstdint>
#include <string_view>

namespace svolab {

// SplitMix64 finalizer. Used as a counter-based generator: the value for
// draw i under seed s depends only on (s, i), never on evaluation order.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t CounterDraw(std::uint64_t seed, std::uint64_t index) {
  return Mix64(Mix64(seed) ^ Mix64(index ^ 0x632be59bd9b4e019ULL));
}

// Fair coin keyed by (seed, index).
constexpr bool CounterCoin(std::uint64_t seed, std::uint64_t index) {
  return (CounterDraw(seed, index) >> 63) != 0;
}

// Stable 64-bit FNV-1a, for deriving per-corpus seeds from names.
constexpr std::uint64_t HashName(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace svolab

#endif  // SVOLAB_RNG_H_
