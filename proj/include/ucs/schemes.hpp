// Compression schemes for concept classes: procedural programs (compress +
// decode), table-backed decoders, the correctness verifier, and the product
// and restriction combinators.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucs/family.hpp"

namespace ucs {

// True iff f agrees with g on g's domain.
bool extends(BoolFunc f, const PartialFunc& g);

// A scheme given by its two halves.  compress maps a labeled sample to a
// subset of its domain of at most size_bound elements, or nullopt when no
// admissible subset exists (the verifier records that as a violation, so
// partial decoders can be handled uniformly).  decode depends on the kept
// set alone.
struct SchemeProgram {
  int n = 0;
  int size_bound = 0;
  std::string description;
  std::function<std::optional<Mask>(const PartialFunc&)> compress;
  std::function<Mask(Mask)> decode;
};

// Total map from every base subset of size <= k to a function.
class UnlabeledDecoder {
 public:
  // Validates totality: exactly one entry for each subset with |y| <= k.
  UnlabeledDecoder(int n, int k, std::vector<std::pair<Mask, Mask>> entries);

  int base_size() const { return n_; }
  int size_bound() const { return k_; }
  Mask decode(Mask y) const;

  // Entries in ascending (cardinality, mask) key order.
  std::vector<std::pair<Mask, Mask>> sorted_entries() const;

 private:
  int n_ = 0;
  int k_ = 0;
  std::unordered_map<Mask, Mask> entries_;
};

// Total map from every labeled sub-sample (y, values on y) with |y| <= k to
// a function.
class LabeledDecoder {
 public:
  struct Key {
    Mask domain;
    Mask values;
  };
  LabeledDecoder(int n, int k,
                 std::vector<std::pair<std::uint64_t, Mask>> entries);

  // Builds entry keys: (domain << 32) | values.
  static std::uint64_t key(Mask domain, Mask values) {
    return (std::uint64_t{domain} << 32) | values;
  }

  int base_size() const { return n_; }
  int size_bound() const { return k_; }
  Mask decode(Mask y, Mask values) const;

 private:
  int n_ = 0;
  int k_ = 0;
  std::unordered_map<std::uint64_t, Mask> entries_;
};

// Derives the compressor from a decoder table: the kept set is the first
// y subset of dom(g) with |y| <= k, in ascending (cardinality, mask) order,
// whose decode extends g; nullopt when none does.
SchemeProgram table_to_program(const UnlabeledDecoder& d, const Family& f);

enum class VerifyMode { kExhaustive, kBounded, kRandom, kFullDomainOnly };

struct VerifyOptions {
  VerifyMode mode = VerifyMode::kExhaustive;
  int max_domain = 0;         // bounded mode: |S| <= max_domain
  std::uint64_t samples = 0;  // random mode
  std::uint64_t seed = 0;     // random mode
  int threads = 1;
};

enum class ViolationKind {
  kNoCompression,   // compress returned nullopt
  kNotSubset,       // kept set not inside the sample domain
  kSizeExceeded,    // kept set larger than the size bound
  kDecodeMismatch,  // decoded function disagrees with the sample
};

struct Counterexample {
  PartialFunc sample;
  std::optional<Mask> compressed;
  std::optional<Mask> decoded;
  ViolationKind kind = ViolationKind::kDecodeMismatch;
  int violated_point = -1;  // sampled position where decode disagrees
};

struct VerificationReport {
  bool valid = false;
  VerifyOptions options;
  std::uint64_t checked = 0;
  int max_compressed_size = 0;
  std::optional<Counterexample> counterexample;
};

std::string verify_mode_name(const VerifyOptions& opt);
std::string report_to_text(const VerificationReport& r);
std::string report_to_json(const VerificationReport& r);

// Checks beta(alpha(g)) extends g, alpha(g) subset of dom(g), and
// |alpha(g)| <= size bound over the sample space selected by the mode.
// The whole space is always scanned; the reported counterexample is the
// minimum under (domain mask, trace value), so the report is identical for
// any thread count.
VerificationReport verify(const SchemeProgram& p, const Family& f,
                          const VerifyOptions& opt);

// Same contract with labeled compressed objects g|_y.
VerificationReport verify_labeled(const LabeledDecoder& d, const Family& f,
                                  const VerifyOptions& opt);

// Keeps the sampled positions holding 1; decode turns the kept set into its
// indicator function.  Size bound: the largest member weight.
SchemeProgram keep_ones_scheme(const Family& f);
// Dual: keeps the sampled zeros; decode is the complement indicator.
SchemeProgram keep_zeros_scheme(const Family& f);

// Scheme for join(F, G) from schemes for the parts: samples and kept sets
// split by coordinate block.
SchemeProgram product_scheme(const SchemeProgram& p1, const SchemeProgram& p2);

// Scheme for restrict_to(F, keep) from a scheme for F: samples are scattered
// back onto the original coordinates, decodes compacted onto `keep`.
SchemeProgram restrict_scheme(const SchemeProgram& p, Mask keep);

// .ucs format: "decoder base <n> size <k>" then one line per entry
// ("<sorted comma-separated elements | -> <n-char value string>"), every
// subset of size <= k exactly once, ascending (cardinality, mask).
void write_ucs(std::ostream& out, const UnlabeledDecoder& d);
UnlabeledDecoder read_ucs(std::istream& in);

}  // namespace ucs
