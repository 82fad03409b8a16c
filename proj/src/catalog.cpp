#include "ucs/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ucs/schemes.hpp"
#include "ucs/tables.hpp"

#include "json.hpp"

namespace ucs {

namespace {

std::string canon_hex(const std::vector<std::uint8_t>& canon) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(canon.size() * 2);
  for (std::uint8_t b : canon) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::vector<std::uint8_t> canon_from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::runtime_error("odd canon length");
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    auto nibble = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      throw std::runtime_error("bad canon digit");
    };
    out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 +
                                            nibble(hex[i + 1])));
  }
  return out;
}

const char* status_name(UcsStatus::Kind k) {
  switch (k) {
    case UcsStatus::Kind::kExact:
      return "exact";
    case UcsStatus::Kind::kLower:
      return "lower";
    case UcsStatus::Kind::kIndeterminate:
      return "indeterminate";
  }
  return "?";
}

}  // namespace

std::string record_to_jsonl(const CatalogRecord& r) {
  nlohmann::ordered_json j;
  j["canon"] = canon_hex(r.canon);
  j["n"] = r.n;
  nlohmann::ordered_json fns = nlohmann::ordered_json::array();
  for (Mask f : r.functions)
    fns.push_back(function_to_string(BoolFunc{r.n, f}));
  j["functions"] = std::move(fns);
  j["vc"] = r.vc;
  j["ucs"] = {{"status", status_name(r.ucs.kind)}, {"value", r.ucs.value}};
  if (r.gap)
    j["gap"] = *r.gap;
  else
    j["gap"] = nullptr;
  j["nodes"] = r.nodes;
  return j.dump();
}

CatalogRecord record_from_jsonl(const std::string& line, int lineno) {
  auto fail = [&](const std::string& msg) -> CatalogRecord {
    throw std::runtime_error("catalog line " + std::to_string(lineno) + ": " +
                             msg);
  };
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return fail("not valid JSON");
  CatalogRecord r;
  try {
    r.canon = canon_from_hex(j.at("canon").get<std::string>());
    r.n = j.at("n").get<int>();
    for (const auto& s : j.at("functions"))
      r.functions.push_back(parse_function_string(s.get<std::string>(), r.n));
    r.vc = j.at("vc").get<int>();
    std::string status = j.at("ucs").at("status").get<std::string>();
    r.ucs.value = j.at("ucs").at("value").get<int>();
    if (status == "exact")
      r.ucs.kind = UcsStatus::Kind::kExact;
    else if (status == "lower")
      r.ucs.kind = UcsStatus::Kind::kLower;
    else if (status == "indeterminate")
      r.ucs.kind = UcsStatus::Kind::kIndeterminate;
    else
      return fail("unknown ucs status '" + status + "'");
    if (!j.at("gap").is_null()) r.gap = j.at("gap").get<int>();
    r.nodes = j.at("nodes").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    return fail(e.what());
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return r;
}

namespace {

// Incremental shattering bookkeeping: for every base subset of size d+1,
// the set of traces already realized, as a bitmask over the 2^(d+1)
// possible assignments.  A family has vc <= d exactly while no tracked
// subset realizes them all.
struct ShatterTracker {
  int n = 0;
  std::vector<Mask> subsets;
  std::vector<std::uint32_t> full;
  std::vector<std::uint32_t> seen;

  void init(int base, int d) {
    n = base;
    subsets.clear();
    full.clear();
    if (d + 1 > base) return;  // nothing can be shattered
    for_each_combination(base, d + 1, [&](Mask x) {
      subsets.push_back(x);
      full.push_back(static_cast<std::uint32_t>(
          (std::uint64_t{1} << (std::uint64_t{1} << (d + 1))) - 1));
    });
    seen.assign(subsets.size(), 0);
  }

  bool can_add(Mask f) const {
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      std::uint32_t ns =
          seen[i] |
          (std::uint32_t{1} << compact_bits(f & subsets[i], subsets[i]));
      if (ns == full[i]) return false;
    }
    return true;
  }

  void add(Mask f) {
    for (std::size_t i = 0; i < subsets.size(); ++i)
      seen[i] |= std::uint32_t{1} << compact_bits(f & subsets[i], subsets[i]);
  }
};

// Ascending greedy completion: extends the family with every function, in
// value order, that keeps the dimension within d.  The result is
// containment-maximal at d.
std::vector<Mask> greedy_complete(const std::vector<Mask>& fns, int n,
                                  const ShatterTracker& base) {
  ShatterTracker tracker = base;
  std::vector<Mask> out = fns;
  const Mask limit = full_mask(n);
  for (Mask g = 0;; ++g) {
    if (!std::binary_search(out.begin(), out.end(), g) && tracker.can_add(g)) {
      out.insert(std::lower_bound(out.begin(), out.end(), g), g);
      tracker.add(g);
    }
    if (g == limit) break;
  }
  return out;
}

struct EnumDriver {
  int n;
  int d;
  std::uint64_t budget;
  const std::function<bool(const Family&)>* emit;
  std::uint64_t nodes = 0;
  bool budget_hit = false;
  std::vector<Mask> path;
  std::vector<Mask> fns;
  std::uint64_t members = 0;  // fns as a bitmask over function values
  ShatterTracker tracker;
  std::vector<std::vector<std::uint8_t>> perm_value;  // value map per perm
  std::set<std::vector<Mask>> completions_seen;
  std::set<std::vector<std::uint8_t>> canon_seen;

  void init_group() {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    const Mask limit = full_mask(n);
    do {
      std::vector<std::uint8_t> table(static_cast<std::size_t>(limit) + 1);
      for (Mask v = 0; v <= limit; ++v)
        table[v] = static_cast<std::uint8_t>(permute_mask(v, perm));
      perm_value.push_back(std::move(table));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  // Lex-least test over the whole permutation-and-flip group.  Sets of
  // equal size compare by their smallest differing element, which is one
  // bit test on the membership masks.  Only images containing function 0
  // can beat a set that contains 0, so flips are restricted to the images
  // of members.  Growing by values above the maximum keeps lex-least
  // prefixes lex-least (dropping the largest member preserves the
  // property), so pruning non-least children walks each class exactly once.
  bool is_lex_least(std::uint64_t bm) const {
    for (const auto& table : perm_value) {
      for (Mask s : fns) {
        std::uint8_t flip = table[s];
        std::uint64_t img = 0;
        for (Mask f : fns) img |= std::uint64_t{1} << (table[f] ^ flip);
        std::uint64_t diff = img ^ bm;
        if (diff != 0 && (img & (diff & (0 - diff)))) return false;
      }
    }
    return true;
  }

  // Processes the node whose function list sits in fns, then its whole
  // subtree.  from = first candidate child value.  Returns false to stop.
  bool visit_node(Mask from) {
    if (nodes >= budget) {
      budget_hit = true;
      return false;
    }
    ++nodes;
    std::vector<Mask> completion = greedy_complete(fns, n, tracker);
    if (!completion.empty() && completions_seen.insert(completion).second) {
      Family fam(n, completion);
      std::vector<std::uint8_t> canon = canonical_form(fam);
      if (canon_seen.insert(std::move(canon)).second) {
        if (!(*emit)(fam)) return false;
      }
    }
    return walk_children(from);
  }

  bool child_passes(Mask g) {
    if (!tracker.can_add(g)) return false;
    fns.push_back(g);
    bool least = is_lex_least(members | (std::uint64_t{1} << g));
    fns.pop_back();
    return least;
  }

  bool walk_children(Mask from) {
    const Mask limit = full_mask(n);
    for (Mask g = from; g <= limit; ++g) {
      if (!child_passes(g)) continue;
      std::vector<std::uint32_t> saved = tracker.seen;
      tracker.add(g);
      fns.push_back(g);
      path.push_back(g);
      members |= std::uint64_t{1} << g;
      bool keep = visit_node(g + 1);
      members &= ~(std::uint64_t{1} << g);
      fns.pop_back();
      path.pop_back();
      tracker.seen = std::move(saved);
      if (!keep) return false;
    }
    return true;
  }

  // Fast-forwards along the stored prefix: ancestors are not re-processed,
  // the node at the prefix is processed in full, and the later siblings of
  // every ancestor follow normally.
  bool resume_walk(const std::vector<Mask>& prefix, std::size_t level) {
    if (level == prefix.size())
      return visit_node(fns.empty() ? 0 : fns.back() + 1);
    const Mask limit = full_mask(n);
    for (Mask g = prefix[level]; g <= limit; ++g) {
      if (!child_passes(g)) continue;
      std::vector<std::uint32_t> saved = tracker.seen;
      tracker.add(g);
      fns.push_back(g);
      path.push_back(g);
      members |= std::uint64_t{1} << g;
      bool keep = g == prefix[level] ? resume_walk(prefix, level + 1)
                                     : visit_node(g + 1);
      members &= ~(std::uint64_t{1} << g);
      fns.pop_back();
      path.pop_back();
      tracker.seen = std::move(saved);
      if (!keep) return false;
    }
    return true;
  }
};

}  // namespace

EnumCursor enumerate_candidates(int n, int d, std::uint64_t node_budget,
                                const std::function<bool(const Family&)>& emit,
                                EnumCursor start) {
  if (n < 1 || n > 6)
    throw std::invalid_argument("enumerate: base must be 1..6");
  if (d < 0 || d > 3)
    throw std::invalid_argument("enumerate: dimension must be 0..3");
  if (start.exhausted) return start;
  EnumDriver drv;
  drv.n = n;
  drv.d = d;
  drv.budget = node_budget;
  drv.emit = &emit;
  drv.tracker.init(n, d);
  drv.init_group();
  bool completed = start.prefix.empty() ? drv.visit_node(0)
                                        : drv.resume_walk(start.prefix, 0);
  EnumCursor cursor;
  cursor.exhausted = completed;
  if (!completed) cursor.prefix = drv.path;
  return cursor;
}

namespace {

// Sweeps k upward from the dimension; FOUND at the first k gives the exact
// value (the dimension is a lower bound, and every smaller k was refuted).
CatalogRecord settle_candidate(const Family& fam, const SearchBudget& budget) {
  CatalogRecord rec;
  rec.n = fam.base_size();
  rec.functions = fam.functions();
  if (fam.base_size() <= 7) rec.canon = canonical_form(fam);
  rec.vc = vc_dimension(fam);
  SearchOptions opt;
  opt.budget = budget;
  int lower = rec.vc;
  for (int k = rec.vc; k <= fam.base_size(); ++k) {
    SearchResult r = decide_ucs(fam, k, opt);
    rec.nodes += r.stats.nodes;
    if (r.decision == Decision::kFound) {
      rec.ucs.kind = UcsStatus::Kind::kExact;
      rec.ucs.value = k;
      rec.gap = k - rec.vc;
      return rec;
    }
    if (r.decision == Decision::kIndeterminate) {
      rec.ucs.kind = UcsStatus::Kind::kIndeterminate;
      rec.ucs.value = lower;
      return rec;
    }
    lower = k + 1;
    rec.ucs.kind = UcsStatus::Kind::kLower;
    rec.ucs.value = lower;
  }
  return rec;
}

}  // namespace

GapHuntSummary gap_hunt(int n, int d, const std::string& out_path, bool resume,
                        const CatalogBudget& budget, int threads) {
  GapHuntSummary summary;
  std::set<std::vector<std::uint8_t>> known;
  if (resume) {
    std::ifstream in(out_path);
    if (in) {
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        known.insert(record_from_jsonl(line, lineno).canon);
      }
    }
  }
  std::ofstream out(out_path, resume ? std::ios::app : std::ios::trunc);
  if (!out)
    throw std::runtime_error("gap_hunt: cannot open output path " + out_path);

  // Candidates are collected in batches and settled by a small worker pool;
  // records are appended in candidate order regardless of which worker
  // finishes first.
  const std::size_t batch_size =
      threads > 1 ? static_cast<std::size_t>(4 * threads) : 1;
  std::vector<Family> batch;
  auto flush_batch = [&]() {
    if (batch.empty()) return;
    std::vector<CatalogRecord> records(batch.size());
    if (threads > 1) {
      std::vector<std::future<CatalogRecord>> futures;
      futures.reserve(batch.size());
      for (const Family& fam : batch)
        futures.push_back(std::async(std::launch::async, settle_candidate, fam,
                                     budget.search));
      for (std::size_t i = 0; i < futures.size(); ++i)
        records[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < batch.size(); ++i)
        records[i] = settle_candidate(batch[i], budget.search);
    }
    for (const CatalogRecord& rec : records) {
      out << record_to_jsonl(rec) << "\n";
      out.flush();
      ++summary.records_appended;
      summary.search_nodes += rec.nodes;
      if (rec.gap && *rec.gap > 0) ++summary.gaps_found;
    }
    batch.clear();
  };

  EnumCursor cursor = enumerate_candidates(
      n, d, budget.enum_nodes,
      [&](const Family& fam) {
        ++summary.candidates;
        if (known.count(canonical_form(fam))) return true;
        batch.push_back(fam);
        if (batch.size() >= batch_size) flush_batch();
        return true;
      });
  flush_batch();
  summary.enumeration_exhausted = cursor.exhausted;
  return summary;
}

namespace {

// Verified rule-table upper bounds for the joins discussed alongside the
// catalog; checked exhaustively before being trusted.
std::optional<int> known_scheme_bound(const std::string& left,
                                      const std::string& right,
                                      const Family& fam) {
  std::optional<TableScheme> scheme;
  if (left == "c5" && right == "c5") scheme = scheme_table1();
  if (left == "w6" && right == "p:1") scheme = scheme_table4();
  if (left == "w6" && right == "w6") scheme = scheme_w6x2();
  if (!scheme) return std::nullopt;
  VerifyOptions opt;
  opt.mode = VerifyMode::kExhaustive;
  VerificationReport rep = verify(scheme->program, fam, opt);
  if (!rep.valid) return std::nullopt;
  return rep.max_compressed_size;
}

}  // namespace

CatalogRecord probe_join(const std::string& left, const std::string& right,
                         int max_k, const SearchBudget& budget) {
  Family fam = join(make_builtin(left), make_builtin(right));
  CatalogRecord rec;
  rec.n = fam.base_size();
  rec.functions = fam.functions();
  if (fam.base_size() <= 7) rec.canon = canonical_form(fam);
  rec.vc = vc_dimension(fam);

  std::optional<int> upper = known_scheme_bound(left, right, fam);
  int lower = rec.vc;
  bool indeterminate = false;
  SearchOptions opt;
  opt.budget = budget;
  for (int k = rec.vc; k <= std::min(max_k, fam.base_size()); ++k) {
    if (upper && lower >= *upper) break;  // bounds already met
    SearchResult r = decide_ucs(fam, k, opt);
    rec.nodes += r.stats.nodes;
    if (r.decision == Decision::kFound) {
      upper = upper ? std::min(*upper, k) : k;
      break;
    }
    if (r.decision == Decision::kIndeterminate) {
      indeterminate = true;
      break;
    }
    lower = k + 1;
  }
  if (upper && lower >= *upper) {
    rec.ucs.kind = UcsStatus::Kind::kExact;
    rec.ucs.value = *upper;
    rec.gap = *upper - rec.vc;
  } else if (indeterminate && lower == rec.vc) {
    rec.ucs.kind = UcsStatus::Kind::kIndeterminate;
    rec.ucs.value = lower;
  } else {
    rec.ucs.kind = UcsStatus::Kind::kLower;
    rec.ucs.value = lower;
  }
  return rec;
}

std::vector<CatalogRecord> candidate_joins(
    const std::vector<std::pair<std::string, std::string>>& pairs, int max_k,
    const SearchBudget& budget) {
  std::vector<CatalogRecord> out;
  out.reserve(pairs.size());
  for (const auto& [left, right] : pairs)
    out.push_back(probe_join(left, right, max_k, budget));
  return out;
}

}  // namespace ucs
