// DIMACS externalization of the decoder-existence problem: one-hot
// variables x[Y,f] ("entry Y decodes to f"), at-least-one / at-most-one
// clauses per entry, and one support clause per labeled sample.  A small
// DPLL solver closes the loop so exported instances can be decided and
// models converted back into decoders.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ucs/family.hpp"
#include "ucs/schemes.hpp"

namespace ucs {

struct CnfInstance {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;  // DIMACS literals
  // decoder shape behind the encoding; var id-1 indexes var_map
  int base_size = 0;
  int size_bound = 0;
  std::vector<std::pair<Mask, Mask>> var_map;  // (entry subset, function)
};

// Builds the instance; throws std::invalid_argument beyond the variable
// budget (2^22 variables).
CnfInstance export_cnf(const Family& f, int k,
                       std::optional<int> max_sample_size = std::nullopt);

// Writer emits "c var <id> <elements|-> <function>" mapping lines before the
// p-line so a model can be decoded without re-deriving the encoding.
void write_dimacs(std::ostream& out, const CnfInstance& inst);
CnfInstance read_dimacs(std::istream& in);

struct DpllResult {
  bool satisfiable = false;
  std::vector<bool> model;  // 1-indexed via model[id-1]
  std::uint64_t nodes = 0;
};

// Unit-propagating DPLL, first-unassigned-variable branching, true first.
DpllResult dpll_solve(const CnfInstance& inst);

// Requires exactly one true x[Y,f] per entry subset in the model.
UnlabeledDecoder decoder_from_model(const CnfInstance& inst,
                                    const std::vector<bool>& model);

}  // namespace ucs
