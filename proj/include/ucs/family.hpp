// Finite boolean concept classes: functions B -> {0,1} on a base of at
// most kMaxBase elements, stored as sorted duplicate-free lists of bit
// vectors, plus the VC machinery and the isomorphism group action.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ucs/bits.hpp"

namespace ucs {

// A total 0/1 function on a base of n elements; bit i = f(i).
struct BoolFunc {
  int n = 0;
  Mask bits = 0;
};

// A labeled sample g = f|_S: values on the sampled positions, zero
// elsewhere (values & ~domain == 0 always).
struct PartialFunc {
  int n = 0;
  Mask domain = 0;
  Mask values = 0;
};

inline bool operator==(const PartialFunc& a, const PartialFunc& b) {
  return a.n == b.n && a.domain == b.domain && a.values == b.values;
}

class Family {
 public:
  // Sorts, deduplicates and validates; throws std::invalid_argument on an
  // empty function list, base size outside 1..kMaxBase, or stray bits.
  Family(int base_size, std::vector<Mask> functions, std::string label = "");

  int base_size() const { return n_; }
  const std::vector<Mask>& functions() const { return fns_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return fns_.size(); }
  bool contains(Mask f) const;

  // Join structure, when this family was built by join(); lets trace
  // enumeration work per block instead of scanning the whole product.
  struct JoinParts;
  const JoinParts* join_parts() const { return parts_.get(); }

  friend Family join(const Family&, const Family&);

 private:
  int n_;
  std::vector<Mask> fns_;
  std::string label_;
  std::shared_ptr<const JoinParts> parts_;
};

struct Family::JoinParts {
  Family left;
  Family right;
};

// Built-in families: "c5", "c5-minus", "c4", "w6", "p:<k>" for 1 <= k <= 8.
Family make_builtin(const std::string& name);

// Product family on the disjoint union of the bases; F occupies the low
// block, G the high block.
Family join(const Family& f, const Family& g);
Family power_join(const Family& f, int copies);

// Distinct traces on `keep`, relabeled to a contiguous 0..|keep|-1 base in
// increasing original order.
Family restrict_to(const Family& f, Mask keep);

Family remove_function(const Family& f, BoolFunc fn);

// Distinct trace values f & s, ascending; shared low-level form of traces().
void trace_values(const Family& f, Mask s, std::vector<Mask>& out);

std::vector<PartialFunc> traces(const Family& f, Mask s);

bool shatters(const Family& f, Mask x);

int vc_dimension(const Family& f);

// True iff no subset of size d+1 is shattered.
bool vc_at_most(const Family& f, int d);

std::uint64_t sauer_shelah_bound(int n, int d);

// True iff every non-member function pushes the VC-dimension above d.
// Requires vc(f) <= d.
bool is_containment_maximal(const Family& f, int d);

// Relabels coordinates: bit perm[i] of the image equals bit i of the
// original.  perm must be a permutation of 0..n-1.
Family permute_base(const Family& f, const std::vector<int>& perm);

// Complements the values on the positions of `flip` in every function.
Family flip_values(const Family& f, Mask flip);

// Lexicographically minimal encoding {n, m, sorted values...} over all base
// permutations combined with value flips.  Only for base_size <= 7 (the
// group of n! * 2^n images is enumerated exhaustively).
std::vector<std::uint8_t> canonical_form(const Family& f);

// Base permutations fixing the family, in lexicographic order.
std::vector<std::vector<int>> automorphisms(const Family& f);

// Every ordered pair of distinct base elements can be mapped to every other
// such pair by an automorphism.
bool is_two_transitive(const Family& f);

// All functions must have equal weight (else std::invalid_argument); true
// iff every pair of base elements lies in exactly lambda one-sets.
bool design_check(const Family& f, int lambda);

// Set inclusion of function lists; bases must match.
bool is_subfamily(const Family& f, const Family& g);

// Text rendering: character i of the string is f(i).
std::string function_to_string(BoolFunc f);
Mask parse_function_string(const std::string& s, int n);

// .fam format: "family <label>" / "base <n>" / "functions <m>" / m lines of
// n characters from {0,1}, ascending by bit-vector value.
void write_fam(std::ostream& out, const Family& f);
Family read_fam(std::istream& in);

}  // namespace ucs
