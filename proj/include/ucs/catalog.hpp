// Isomorph-free enumeration of containment-maximal families on small bases
// and the persistent hunt for families whose unlabeled compression size
// exceeds their VC-dimension.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucs/family.hpp"
#include "ucs/search.hpp"

namespace ucs {

struct UcsStatus {
  enum class Kind { kExact, kLower, kIndeterminate };
  Kind kind = Kind::kIndeterminate;
  int value = 0;  // exact value, or the best proven lower bound
};

struct CatalogRecord {
  std::vector<std::uint8_t> canon;  // empty when the base exceeds the cap
  int n = 0;
  std::vector<Mask> functions;
  int vc = 0;
  UcsStatus ucs;
  std::optional<int> gap;  // ucs - vc, only when exact
  std::uint64_t nodes = 0;  // search nodes spent on this record
};

std::string record_to_jsonl(const CatalogRecord& r);
// Throws std::runtime_error naming the line number on corrupt input.
CatalogRecord record_from_jsonl(const std::string& line, int lineno);

struct EnumCursor {
  std::vector<Mask> prefix;  // DFS path at interruption
  bool exhausted = false;
};

// Orderly enumeration of containment-maximal families with vc <= d on an
// n-element base: ascending function lists are grown depth-first, pruned
// when the dimension exceeds d, and at every node the greedy ascending
// completion is emitted if its canonical form is new.  Stops early when the
// node budget runs out (cursor marks the spot) or when emit returns false.
EnumCursor enumerate_candidates(
    int n, int d, std::uint64_t node_budget,
    const std::function<bool(const Family&)>& emit, EnumCursor start = {});

struct CatalogBudget {
  std::uint64_t enum_nodes = 1'000'000;
  SearchBudget search;
};

struct GapHuntSummary {
  std::uint64_t candidates = 0;
  std::uint64_t records_appended = 0;
  std::uint64_t gaps_found = 0;
  std::uint64_t enum_nodes = 0;
  std::uint64_t search_nodes = 0;
  bool enumeration_exhausted = false;
};

// Streams candidates from enumerate_candidates, settles each one's
// compression size (sweeping k upward from the dimension under the search
// budget), and appends one JSONL record per new canonical form to out_path.
// With resume, canonical forms already present in the file are skipped.
GapHuntSummary gap_hunt(int n, int d, const std::string& out_path, bool resume,
                        const CatalogBudget& budget, int threads = 1);

// Bounds for the compression size of a join, combining a verified known
// scheme (when one exists for the pair) with budgeted search refutations at
// k = vc, vc+1, ...  Never reports an exact value the runs do not prove.
CatalogRecord probe_join(const std::string& left, const std::string& right,
                         int max_k, const SearchBudget& budget);

std::vector<CatalogRecord> candidate_joins(
    const std::vector<std::pair<std::string, std::string>>& pairs, int max_k,
    const SearchBudget& budget);

}  // namespace ucs
