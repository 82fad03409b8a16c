#include "ucs/search.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ucs {

namespace {

// An instance of the covering problem behind scheme existence: one variable
// per decoder entry ranging over all 2^n functions, and one clause per
// labeled sample listing the entries that may cover it.  A clause is
// satisfied once some listed entry's domain sits inside the sample's
// extension set.
struct Instance {
  int num_values = 0;  // 2^n
  int words = 0;       // 64-bit words per entry domain
  int num_vars = 0;
  struct Clause {
    std::vector<std::uint64_t> ext;  // extension set of the sample
    std::vector<int> vars;           // entry order mirrors (size, mask) order
  };
  std::vector<Clause> clauses;
  std::vector<std::vector<int>> var_clauses;
  std::vector<char> preferred;  // branch-priority flags (symmetry option)
};

// Bases above this would need > 2^14 candidate values per entry; the
// decoder search targets small bases and reports anything bigger as a
// blown budget instead of grinding.
constexpr int kMaxSearchBase = 14;
constexpr std::uint64_t kMaxInstanceBytes = 1ull << 29;
constexpr std::uint64_t kMaxStackBytes = 1ull << 30;

std::vector<Mask> subset_keys(int n, int k) {
  std::vector<Mask> keys;
  for (int c = 0; c <= k; ++c)
    for_each_combination(n, c, [&](Mask y) { keys.push_back(y); });
  return keys;
}

void set_bit64(std::vector<std::uint64_t>& w, Mask i) {
  w[i >> 6] |= std::uint64_t{1} << (i & 63);
}

// Extension set of the sample (s, v): all functions agreeing with v on s.
std::vector<std::uint64_t> extension_bits(int n, int words, Mask s, Mask v) {
  std::vector<std::uint64_t> ext(static_cast<std::size_t>(words), 0);
  Mask rest = full_mask(n) & ~s;
  for_each_subset(rest, [&](Mask add) { set_bit64(ext, v | add); });
  return ext;
}

class CoverSolver {
 public:
  CoverSolver(const Instance& inst, const SearchBudget& budget)
      : inst_(inst), budget_(budget) {
    domains_.assign(static_cast<std::size_t>(inst.num_vars) * inst.words,
                    ~std::uint64_t{0});
    int tail = inst.num_values & 63;
    if (tail != 0) {
      std::uint64_t keep = (std::uint64_t{1} << tail) - 1;
      for (int v = 0; v < inst.num_vars; ++v)
        domains_[dom_index(v) + inst.words - 1] &= keep;
    }
    satisfied_.assign(inst.clauses.size(), 0);
    unsatisfied_ = static_cast<int>(inst.clauses.size());
    start_ = std::chrono::steady_clock::now();
  }

  // First-cover branching: the most-constrained clause is decomposed over
  // which of its entries covers it; option i additionally rules out a cover
  // by options before i, so the branches partition the solution space.
  Decision run() {
    std::vector<int> all(static_cast<std::size_t>(inst_.num_vars));
    for (int v = 0; v < inst_.num_vars; ++v)
      all[static_cast<std::size_t>(v)] = v;
    bool conflict = !propagate(all);
    while (true) {
      if (!conflict) {
        if (unsatisfied_ == 0) return Decision::kFound;
        if (over_budget()) return Decision::kIndeterminate;
        int clause = pick_clause();
        Frame f;
        f.dom_mark = dom_trail_.size();
        f.sat_mark = sat_trail_.size();
        f.unsatisfied = unsatisfied_;
        f.clause = clause;
        f.next_option = 0;
        const Instance::Clause& cl =
            inst_.clauses[static_cast<std::size_t>(clause)];
        for (int u : ordered_vars(cl))
          if (relate(u, cl.ext) != Rel::kDisjoint) f.options.push_back(u);
        frames_.push_back(std::move(f));
        conflict = !try_next_option();
      } else {
        conflict = !try_next_option();
        if (conflict && frames_.empty()) return Decision::kNone;
        if (stats.nodes > budget_.max_nodes) return Decision::kIndeterminate;
      }
    }
  }

  // Lowest surviving value of each entry; sound because every satisfied
  // clause keeps its covering entry's whole domain inside the extension set,
  // and domains only shrink afterwards.
  std::vector<Mask> assignment() const {
    std::vector<Mask> out(static_cast<std::size_t>(inst_.num_vars), 0);
    for (int v = 0; v < inst_.num_vars; ++v) {
      const std::uint64_t* d = &domains_[dom_index(v)];
      for (int w = 0; w < inst_.words; ++w)
        if (d[w] != 0) {
          out[static_cast<std::size_t>(v)] =
              static_cast<Mask>(w * 64 + std::countr_zero(d[w]));
          break;
        }
    }
    return out;
  }

  SearchStats stats;

 private:
  struct Frame {
    std::size_t dom_mark = 0;
    std::size_t sat_mark = 0;
    int unsatisfied = 0;
    int clause = -1;
    std::size_t next_option = 0;
    std::vector<int> options;
  };
  struct DomChange {
    std::uint32_t slot;  // index into domains_
    std::uint64_t old;
  };

  std::size_t dom_index(int var) const {
    return static_cast<std::size_t>(var) * inst_.words;
  }

  bool over_budget() {
    if (stats.nodes > budget_.max_nodes) return true;
    if (budget_.max_seconds > 0 && (stats.nodes & 1023) == 0) {
      auto now = std::chrono::steady_clock::now();
      if (std::chrono::duration<double>(now - start_).count() >
          budget_.max_seconds)
        return true;
    }
    return false;
  }

  void set_word(std::size_t slot, std::uint64_t value) {
    if (domains_[slot] == value) return;
    dom_trail_.push_back(DomChange{static_cast<std::uint32_t>(slot),
                                   domains_[slot]});
    domains_[slot] = value;
  }

  void mark_satisfied(int c) {
    satisfied_[static_cast<std::size_t>(c)] = 1;
    sat_trail_.push_back(c);
    --unsatisfied_;
  }

  void undo_to(const Frame& f) {
    while (dom_trail_.size() > f.dom_mark) {
      const DomChange& ch = dom_trail_.back();
      domains_[ch.slot] = ch.old;
      dom_trail_.pop_back();
    }
    while (sat_trail_.size() > f.sat_mark) {
      satisfied_[static_cast<std::size_t>(sat_trail_.back())] = 0;
      sat_trail_.pop_back();
    }
    unsatisfied_ = f.unsatisfied;
  }

  bool domain_empty(int var) const {
    const std::uint64_t* d = &domains_[dom_index(var)];
    for (int w = 0; w < inst_.words; ++w)
      if (d[w]) return false;
    return true;
  }

  // Removes ext from the domain; true while the domain stays nonempty.
  bool subtract_from(int var, const std::vector<std::uint64_t>& ext) {
    std::size_t base = dom_index(var);
    for (int w = 0; w < inst_.words; ++w) {
      std::uint64_t nw =
          domains_[base + w] & ~ext[static_cast<std::size_t>(w)];
      if (nw != domains_[base + w]) set_word(base + w, nw);
    }
    return !domain_empty(var);
  }

  // Advances the top frame to its next feasible option, unwinding exhausted
  // frames.  Returns false when a conflict persists (all frames exhausted or
  // the option immediately fails and no sibling is left after unwinding...
  // callers loop on the return value).
  bool try_next_option() {
    while (!frames_.empty()) {
      Frame& f = frames_.back();
      const Instance::Clause& cl =
          inst_.clauses[static_cast<std::size_t>(f.clause)];
      bool frame_done = false;
      while (f.next_option < f.options.size()) {
        undo_to(f);
        ++stats.nodes;
        if (stats.nodes > budget_.max_nodes) return true;  // caught by run()
        std::size_t i = f.next_option++;
        // rule out covers by the earlier options; if one of them is forced
        // inside the extension set, later options cannot host a first cover
        std::vector<int> dirty;
        bool redundant = false;
        for (std::size_t j = 0; j < i; ++j) {
          if (!subtract_from(f.options[j], cl.ext)) {
            redundant = true;
            break;
          }
          dirty.push_back(f.options[j]);
        }
        if (redundant) {
          frame_done = true;
          break;
        }
        int u = f.options[i];
        if (relate(u, cl.ext) == Rel::kDisjoint) continue;
        shrink_to(u, cl.ext);
        mark_satisfied(f.clause);
        dirty.push_back(u);
        if (propagate(dirty)) return true;
      }
      if (!frame_done && f.next_option < f.options.size()) continue;
      undo_to(f);
      frames_.pop_back();
    }
    return false;
  }

  enum class Rel { kDisjoint, kOverlap, kInside };
  Rel relate(int var, const std::vector<std::uint64_t>& ext) const {
    const std::uint64_t* d = &domains_[dom_index(var)];
    bool any = false, outside = false;
    for (int w = 0; w < inst_.words; ++w) {
      if (d[w] & ext[static_cast<std::size_t>(w)]) any = true;
      if (d[w] & ~ext[static_cast<std::size_t>(w)]) outside = true;
      if (any && outside) return Rel::kOverlap;
    }
    if (!any) return Rel::kDisjoint;
    return outside ? Rel::kOverlap : Rel::kInside;
  }

  bool shrink_to(int var, const std::vector<std::uint64_t>& ext) {
    std::size_t base = dom_index(var);
    bool changed = false;
    for (int w = 0; w < inst_.words; ++w) {
      std::uint64_t nw =
          domains_[base + w] & ext[static_cast<std::size_t>(w)];
      if (nw != domains_[base + w]) {
        changed = true;
        set_word(base + w, nw);
      }
    }
    return changed;
  }

  bool propagate_one(int var) {
    std::vector<int> dirty{var};
    return propagate(dirty);
  }

  // Rescans clauses of dirty variables to a fixpoint.  A clause with no
  // viable entry fails the branch; a clause with exactly one forces that
  // entry's domain into the extension set.
  bool propagate(std::vector<int>& dirty) {
    std::size_t head = 0;
    while (head < dirty.size()) {
      int v = dirty[head++];
      for (int c : inst_.var_clauses[static_cast<std::size_t>(v)]) {
        if (satisfied_[static_cast<std::size_t>(c)]) continue;
        const Instance::Clause& cl =
            inst_.clauses[static_cast<std::size_t>(c)];
        int viable = 0;
        int last = -1;
        bool sat = false;
        for (int u : cl.vars) {
          Rel r = relate(u, cl.ext);
          if (r == Rel::kDisjoint) continue;
          ++viable;
          last = u;
          if (r == Rel::kInside) {
            sat = true;
            break;
          }
        }
        if (sat) {
          mark_satisfied(c);
          continue;
        }
        if (viable == 0) return false;
        if (viable == 1) {
          ++stats.propagations;
          if (shrink_to(last, cl.ext)) dirty.push_back(last);
          mark_satisfied(c);
        }
      }
    }
    return true;
  }

  // Most-constrained clause: fewest viable entries, ties to the lowest
  // clause index.
  int pick_clause() const {
    int best_clause = -1;
    int best_support = 1 << 30;
    for (std::size_t c = 0; c < inst_.clauses.size(); ++c) {
      if (satisfied_[c]) continue;
      const Instance::Clause& cl = inst_.clauses[c];
      int viable = 0;
      for (int u : cl.vars) {
        if (relate(u, cl.ext) != Rel::kDisjoint) ++viable;
        if (viable >= best_support) break;
      }
      if (viable < best_support) {
        best_clause = static_cast<int>(c);
        best_support = viable;
        if (best_support <= 2) break;  // 2 is the fixpoint minimum
      }
    }
    return best_clause;
  }

  // Entry order within a clause: preferred (symmetry representative)
  // entries first when flagged, otherwise the built (size, mask) order.
  std::vector<int> ordered_vars(const Instance::Clause& cl) const {
    if (inst_.preferred.empty()) return cl.vars;
    std::vector<int> out;
    out.reserve(cl.vars.size());
    for (int u : cl.vars)
      if (inst_.preferred[static_cast<std::size_t>(u)]) out.push_back(u);
    for (int u : cl.vars)
      if (!inst_.preferred[static_cast<std::size_t>(u)]) out.push_back(u);
    return out;
  }

  const Instance& inst_;
  SearchBudget budget_;
  std::vector<std::uint64_t> domains_;
  std::vector<char> satisfied_;
  int unsatisfied_ = 0;
  std::vector<DomChange> dom_trail_;
  std::vector<int> sat_trail_;
  std::vector<Frame> frames_;
  std::chrono::steady_clock::time_point start_;
};

// Shared clause construction: one clause per labeled sample in ascending
// (domain, values) order.  var_of maps a kept subset and the sample values
// to the entry variable index.  Returns false when the instance outgrows
// the memory cap.
template <typename VarOf>
bool build_clauses(Instance& inst, const Family& f, int k,
                   std::optional<int> max_sample, VarOf&& var_of) {
  const int n = f.base_size();
  const Mask full = full_mask(n);
  std::vector<Mask> buf;
  std::uint64_t bytes = 0;
  for (Mask s = 0;; ++s) {
    if (!max_sample || popcount(s) <= *max_sample) {
      trace_values(f, s, buf);
      for (Mask v : buf) {
        Instance::Clause cl;
        cl.ext = extension_bits(n, inst.words, s, v);
        int cap = std::min(k, popcount(s));
        for (int c = 0; c <= cap; ++c)
          for_each_subset(s, [&](Mask y) {
            if (popcount(y) != c) return;
            cl.vars.push_back(var_of(y, v));
          });
        bytes += cl.ext.size() * 8 + cl.vars.size() * 4;
        if (bytes > kMaxInstanceBytes) return false;
        inst.clauses.push_back(std::move(cl));
      }
    }
    if (s == full) break;
  }
  inst.var_clauses.assign(static_cast<std::size_t>(inst.num_vars), {});
  for (std::size_t c = 0; c < inst.clauses.size(); ++c)
    for (int u : inst.clauses[c].vars)
      inst.var_clauses[static_cast<std::size_t>(u)].push_back(
          static_cast<int>(c));
  return true;
}

// Runs the solver and hands back the decision plus the raw assignment for
// certificate building.
std::pair<SearchResult, std::vector<Mask>> run_solver(
    const Instance& inst, const Family& f, int k, const SearchOptions& opt) {
  SearchResult res;
  res.family_label = f.label();
  res.k = k;
  res.max_sample_size = opt.max_sample_size;
  auto t0 = std::chrono::steady_clock::now();
  CoverSolver solver(inst, opt.budget);
  res.decision = solver.run();
  res.stats = solver.stats;
  res.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::vector<Mask> assignment;
  if (res.decision == Decision::kFound) assignment = solver.assignment();
  return {std::move(res), std::move(assignment)};
}

}  // namespace

std::vector<Mask> symmetry_representatives(const Family& f, int k) {
  auto auts = automorphisms(f);
  std::vector<Mask> reps;
  for (Mask y : subset_keys(f.base_size(), std::min(k, f.base_size()))) {
    Mask least = y;
    for (const auto& perm : auts)
      least = std::min(least, permute_mask(y, perm));
    if (least == y) reps.push_back(y);
  }
  return reps;
}

SearchResult decide_ucs(const Family& f, int k, const SearchOptions& opt) {
  if (k < 0) throw std::invalid_argument("decide_ucs: negative size");
  const int n = f.base_size();
  if (opt.max_sample_size && (*opt.max_sample_size < 0 || *opt.max_sample_size > n))
    throw std::invalid_argument("decide_ucs: max sample size out of range");
  SearchResult res;
  res.family_label = f.label();
  res.k = k;
  res.max_sample_size = opt.max_sample_size;
  if (n > kMaxSearchBase) return res;  // indeterminate: instance too large

  Instance inst;
  inst.num_values = 1 << n;
  inst.words = (inst.num_values + 63) / 64;
  const int kk = std::min(k, n);
  std::vector<Mask> keys = subset_keys(n, kk);
  inst.num_vars = static_cast<int>(keys.size());
  std::unordered_map<Mask, int> key_index;
  for (std::size_t i = 0; i < keys.size(); ++i)
    key_index[keys[i]] = static_cast<int>(i);
  if (!build_clauses(inst, f, kk, opt.max_sample_size,
                     [&](Mask y, Mask) { return key_index.at(y); }))
    return res;
  if (opt.symmetry) {
    inst.preferred.assign(static_cast<std::size_t>(inst.num_vars), 0);
    for (Mask y : symmetry_representatives(f, kk))
      inst.preferred[static_cast<std::size_t>(key_index.at(y))] = 1;
  }

  auto [result, assignment] = run_solver(inst, f, k, opt);
  if (result.decision == Decision::kFound) {
    std::vector<std::pair<Mask, Mask>> entries;
    for (std::size_t i = 0; i < keys.size(); ++i)
      entries.emplace_back(keys[i], assignment[i]);
    result.unlabeled_certificate = UnlabeledDecoder(n, kk, std::move(entries));
  }
  return result;
}

SearchResult decide_lcs(const Family& f, int k, const SearchOptions& opt) {
  if (k < 0) throw std::invalid_argument("decide_lcs: negative size");
  const int n = f.base_size();
  SearchResult res;
  res.family_label = f.label();
  res.k = k;
  res.max_sample_size = opt.max_sample_size;
  if (n > kMaxSearchBase) return res;

  Instance inst;
  inst.num_values = 1 << n;
  inst.words = (inst.num_values + 63) / 64;
  const int kk = std::min(k, n);
  std::vector<std::pair<Mask, Mask>> keys;  // (subset, values on it)
  for (Mask y : subset_keys(n, kk))
    for_each_subset(y, [&](Mask v) { keys.emplace_back(y, v); });
  inst.num_vars = static_cast<int>(keys.size());
  std::unordered_map<std::uint64_t, int> key_index;
  for (std::size_t i = 0; i < keys.size(); ++i)
    key_index[LabeledDecoder::key(keys[i].first, keys[i].second)] =
        static_cast<int>(i);
  if (!build_clauses(inst, f, kk, opt.max_sample_size, [&](Mask y, Mask v) {
        return key_index.at(LabeledDecoder::key(y, v & y));
      }))
    return res;

  auto [result, assignment] = run_solver(inst, f, k, opt);
  if (result.decision == Decision::kFound) {
    std::vector<std::pair<std::uint64_t, Mask>> entries;
    for (std::size_t i = 0; i < keys.size(); ++i)
      entries.emplace_back(LabeledDecoder::key(keys[i].first, keys[i].second),
                           assignment[i]);
    result.labeled_certificate = LabeledDecoder(n, kk, std::move(entries));
  }
  return result;
}

namespace {

ExactResult exact_sweep(const Family& f, int start_k, bool labeled,
                        const SearchOptions& opt) {
  ExactResult out;
  for (int k = start_k; k <= f.base_size(); ++k) {
    SearchResult r = labeled ? decide_lcs(f, k, opt) : decide_ucs(f, k, opt);
    Decision d = r.decision;
    out.runs.push_back(std::move(r));
    if (d == Decision::kFound) {
      out.value = k;
      return out;
    }
    if (d == Decision::kIndeterminate) return out;
  }
  // keep-ones always yields a scheme of size <= n, so a correct solver
  // cannot fall through here
  throw std::logic_error("exact sweep exhausted every size");
}

}  // namespace

ExactResult ucs_exact(const Family& f, const SearchOptions& opt) {
  return exact_sweep(f, vc_dimension(f), false, opt);
}

ExactResult lcs_exact(const Family& f, const SearchOptions& opt) {
  return exact_sweep(f, 0, true, opt);
}

std::string search_result_to_json(const SearchResult& r) {
  std::ostringstream out;
  const char* d = r.decision == Decision::kFound     ? "found"
                  : r.decision == Decision::kNone    ? "none"
                                                     : "indeterminate";
  out << "{\"decision\":\"" << d << "\",\"k\":" << r.k << ",\"family\":\""
      << r.family_label << "\",\"max_sample\":";
  if (r.max_sample_size)
    out << *r.max_sample_size;
  else
    out << "null";
  out << ",\"nodes\":" << r.stats.nodes
      << ",\"propagations\":" << r.stats.propagations << "}";
  return out.str();
}

}  // namespace ucs
