// Rule-table compression schemes for the pentagon family, its variants and
// their joins, together with the triple geometry they share: in one copy,
// three equal sampled values ("a triple") occupy a position set that
// identifies both the value and the member that produced it.
#pragma once

#include <functional>
#include <vector>

#include "ucs/family.hpp"
#include "ucs/schemes.hpp"

namespace ucs {

enum class TripleTag { kNoTriple, kTriple0, kTriple1 };

struct TripleStatus {
  TripleTag tag = TripleTag::kNoTriple;
  Mask positions = 0;
};

// Position sets that can carry a triple in one copy.  For the pentagon:
// arcs {i,i+1,i+2} carry triple 1s and the remaining 3-sets carry triple 0s.
// For w6: design blocks carry triple 1s, block complements triple 0s.
class TripleGeometry {
 public:
  explicit TripleGeometry(Family family);

  const Family& family() const { return family_; }
  int base_size() const { return family_.base_size(); }
  bool is_one_triple(Mask t) const;
  bool is_zero_triple(Mask t) const;

 private:
  Family family_;
  std::vector<Mask> one_triples_;
  std::vector<Mask> zero_triples_;
};

const TripleGeometry& pentagon_geometry();
const TripleGeometry& w6_geometry();

// Full per-copy classification.  A fully sampled w6 copy carries both a
// triple 1 and a triple 0; pentagon traces carry at most one.
struct CopyStatus {
  bool t1 = false;
  Mask t1_pos = 0;
  bool t0 = false;
  Mask t0_pos = 0;
};

// Throws std::invalid_argument when g is not a trace of the geometry's
// family.
CopyStatus classify_copy(const TripleGeometry& geo, const PartialFunc& g);

// Three-way tag view; reports Triple1 when both triples are present.
TripleStatus classify_trace(const TripleGeometry& geo, const PartialFunc& g);

// The unique element of a 3-subset of Z5 equidistant from the other two.
int central_element(Mask t);

// Same notion on copy indices mod 5.
int central_copy(const std::vector<int>& indices);

// The unique third point of Z5 equidistant from a and b.
int central_partner(int a, int b);

// A rule-table scheme with introspection hooks: which rule compressed a
// sample, and which rule a kept set decodes under.  Rule numbers follow the
// table row order; 0 marks the out-of-table path (the w6*w6 pool).
struct TableScheme {
  SchemeProgram program;
  std::function<int(const PartialFunc&)> rule_of_sample;
  std::function<int(Mask)> rule_of_kept;
};

// Five-rule scheme for c5*c5, size 5.
TableScheme scheme_table1();

// Six-rule scheme for the five-fold pentagon join, size 11.
TableScheme scheme_table2();

// Size-2 decoder table for c5-minus: ten printed entries closed under the
// reflection 0<->4, 1<->3 to cover all sixteen subsets of size <= 2.
UnlabeledDecoder scheme_table3();

// Three-rule scheme for w6*p:1, size 3.
TableScheme scheme_table4();

// Five-rule scheme for w6*w6 plus an injective pool assignment for the 100
// fully sampled function pairs, size 5.
TableScheme scheme_w6x2();

// Pool of kept sets reserved for fully sampled w6*w6 samples: at least four
// positions from one copy, at most five in total.  pool is ascending by
// mask; full_samples ascending by encoded value.
struct W6x2Pool {
  std::vector<Mask> pool;
  std::vector<Mask> full_samples;
};
W6x2Pool w6x2_pool();

// The printed c5-minus table checked against the family, with the searched
// size-2 substitute when the printed rows fail.  The printed table is never
// patched; an invalid outcome is reported verbatim and the substitute is
// clearly labeled.
struct Table3Outcome {
  UnlabeledDecoder printed;
  VerificationReport printed_report;
  std::optional<UnlabeledDecoder> substitute;
  std::string note;
};
Table3Outcome table3_with_fallback();

}  // namespace ucs
