// Small-mask helpers shared by every module.  The whole library works on
// base sets of at most 25 elements, so subsets of the base and 0/1
// functions on it both fit in a uint32_t (bit i = element i / f(i)).
#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace ucs {

using Mask = std::uint32_t;

// Hard cap on base size: bit operations stay inside one 32-bit word and
// the five-fold pentagon join (base 25) is still representable.
inline constexpr int kMaxBase = 25;

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask full_mask(int n) { return (Mask{1} << n) - 1; }

inline bool is_subset(Mask a, Mask b) { return (a & ~b) == 0; }

inline bool test_bit(Mask m, int i) { return (m >> i) & 1u; }

inline int lowest_bit(Mask m) { return std::countr_zero(m); }

// Visits every subset of `universe` in increasing numeric order, starting
// with the empty set.
template <typename Fn>
void for_each_subset(Mask universe, Fn&& fn) {
  Mask s = 0;
  while (true) {
    fn(s);
    if (s == universe) break;
    s = (s - universe) & universe;
  }
}

inline std::vector<int> elements_of(Mask m) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(popcount(m)));
  while (m) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

// Gathers the bits of v that sit at positions of `mask` into the low bits
// (software pext).
inline Mask compact_bits(Mask v, Mask mask) {
  Mask out = 0;
  int pos = 0;
  while (mask) {
    Mask low = mask & (0u - mask);
    if (v & low) out |= Mask{1} << pos;
    ++pos;
    mask ^= low;
  }
  return out;
}

// Spreads the low bits of v onto the positions of `mask` (software pdep).
inline Mask scatter_bits(Mask v, Mask mask) {
  Mask out = 0;
  int pos = 0;
  while (mask) {
    Mask low = mask & (0u - mask);
    if (v & (Mask{1} << pos)) out |= low;
    ++pos;
    mask ^= low;
  }
  return out;
}

// Visits every mask of exactly `size` bits drawn from the low n positions,
// in increasing numeric order.
template <typename Fn>
void for_each_combination(int n, int size, Fn&& fn) {
  if (size == 0) {
    fn(Mask{0});
    return;
  }
  if (size > n) return;
  Mask m = full_mask(size);
  Mask limit = Mask{1} << n;
  while (m < limit) {
    fn(m);
    // Gosper's hack: next mask with the same popcount.
    Mask c = m & (0u - m);
    Mask r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
}

// Relabels mask positions: bit perm[i] of the result equals bit i of m.
inline Mask permute_mask(Mask m, const std::vector<int>& perm) {
  Mask out = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (test_bit(m, static_cast<int>(i))) out |= Mask{1} << perm[i];
  return out;
}

// Counter-based generator used by the random verification mode: sample i is
// derived from mix64(seed + i * 0x9E3779B97F4A7C15).  The additive constant
// and the finalizer below are fixed so that runs are reproducible and
// independent of worker count.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace ucs
