// Exact decision procedures for scheme existence: complete backtracking
// over decoder entries with support propagation, plus the exact-value
// drivers built on them.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ucs/family.hpp"
#include "ucs/schemes.hpp"

namespace ucs {

enum class Decision { kFound, kNone, kIndeterminate };

struct SearchBudget {
  std::uint64_t max_nodes = 50'000'000;
  double max_seconds = 0;  // 0 = no time limit
};

struct SearchStats {
  std::uint64_t nodes = 0;         // decision points explored
  std::uint64_t propagations = 0;  // forced domain shrinks
  double wall_seconds = 0;
};

struct SearchOptions {
  SearchBudget budget;
  // Branch on automorphism-orbit representative entries first.  Pure
  // branching-order heuristic: decisions are unaffected.
  bool symmetry = false;
  std::optional<int> max_sample_size;
};

struct SearchResult {
  Decision decision = Decision::kIndeterminate;
  std::optional<UnlabeledDecoder> unlabeled_certificate;
  std::optional<LabeledDecoder> labeled_certificate;
  SearchStats stats;
  // parameter echo
  std::string family_label;
  int k = 0;
  std::optional<int> max_sample_size;
};

// Decides whether a total decoder on subsets of size <= k exists such that
// every labeled sample of f (restricted to |domain| <= max_sample_size when
// set) has a kept subset decoding to an extension.  kFound results carry a
// certificate that passes exhaustive verification; kNone means the space
// was exhausted; kIndeterminate only ever reports a blown budget.
SearchResult decide_ucs(const Family& f, int k, const SearchOptions& opt = {});

// Labeled variant: decoder entries are keyed by (subset, values) pairs.
SearchResult decide_lcs(const Family& f, int k, const SearchOptions& opt = {});

struct ExactResult {
  std::optional<int> value;  // empty when a budget stopped the sweep
  std::vector<SearchResult> runs;
};

// Least k with a scheme, sweeping k upward from the VC-dimension (the
// Kuzmin-Warmuth lower bound) resp. from zero for the labeled variant.
ExactResult ucs_exact(const Family& f, const SearchOptions& opt = {});
ExactResult lcs_exact(const Family& f, const SearchOptions& opt = {});

// Orbit-minimal subsets of size <= k under the base-permutation
// automorphisms of f; used as the preferred branching entries when
// SearchOptions::symmetry is set.
std::vector<Mask> symmetry_representatives(const Family& f, int k);

std::string search_result_to_json(const SearchResult& r);

}  // namespace ucs
