#include "ucs/schemes.hpp"

#include <algorithm>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ucs {

bool extends(BoolFunc f, const PartialFunc& g) {
  if (f.n != g.n) throw std::invalid_argument("extends: base size mismatch");
  return (f.bits & g.domain) == g.values;
}

namespace {

// Ascending (cardinality, mask) enumeration of all subsets of size <= k.
std::vector<Mask> small_subsets(int n, int k) {
  std::vector<Mask> out;
  for (int c = 0; c <= k; ++c)
    for_each_combination(n, c, [&](Mask y) { out.push_back(y); });
  return out;
}

// First subset of `domain` with at most k elements, in ascending
// (cardinality, mask) order, accepted by `fits`.
template <typename Fits>
std::optional<Mask> first_fitting_subset(Mask domain, int k, Fits&& fits) {
  for (int c = 0; c <= k; ++c) {
    std::optional<Mask> hit;
    for_each_subset(domain, [&](Mask y) {
      if (!hit && popcount(y) == c && fits(y)) hit = y;
    });
    if (hit) return hit;
  }
  return std::nullopt;
}

}  // namespace

UnlabeledDecoder::UnlabeledDecoder(int n, int k,
                                   std::vector<std::pair<Mask, Mask>> entries)
    : n_(n), k_(k) {
  if (n < 1 || n > kMaxBase) throw std::invalid_argument("decoder: bad base");
  if (k < 0 || k > n) throw std::invalid_argument("decoder: bad size bound");
  const Mask full = full_mask(n);
  for (auto [y, f] : entries) {
    if ((y & ~full) || popcount(y) > k)
      throw std::invalid_argument("decoder: entry key outside subsets of size <= k");
    if (f & ~full) throw std::invalid_argument("decoder: value beyond the base");
    if (!entries_.emplace(y, f).second)
      throw std::invalid_argument("decoder: duplicate entry");
  }
  std::size_t expected = 0;
  for (int c = 0; c <= k; ++c)
    for_each_combination(n, c, [&](Mask) { ++expected; });
  if (entries_.size() != expected)
    throw std::invalid_argument("decoder: not total over subsets of size <= k");
}

Mask UnlabeledDecoder::decode(Mask y) const {
  auto it = entries_.find(y);
  if (it == entries_.end())
    throw std::out_of_range("decoder: no entry for that subset");
  return it->second;
}

std::vector<std::pair<Mask, Mask>> UnlabeledDecoder::sorted_entries() const {
  std::vector<std::pair<Mask, Mask>> out;
  out.reserve(entries_.size());
  for (Mask y : small_subsets(n_, k_)) out.emplace_back(y, entries_.at(y));
  return out;
}

LabeledDecoder::LabeledDecoder(
    int n, int k, std::vector<std::pair<std::uint64_t, Mask>> entries)
    : n_(n), k_(k) {
  if (n < 1 || n > kMaxBase) throw std::invalid_argument("decoder: bad base");
  if (k < 0 || k > n) throw std::invalid_argument("decoder: bad size bound");
  const Mask full = full_mask(n);
  for (auto [key, f] : entries) {
    Mask dom = static_cast<Mask>(key >> 32);
    Mask val = static_cast<Mask>(key & 0xFFFFFFFFull);
    if ((dom & ~full) || popcount(dom) > k || (val & ~dom))
      throw std::invalid_argument("labeled decoder: bad entry key");
    if (f & ~full)
      throw std::invalid_argument("labeled decoder: value beyond the base");
    if (!entries_.emplace(key, f).second)
      throw std::invalid_argument("labeled decoder: duplicate entry");
  }
  std::size_t expected = 0;
  for (int c = 0; c <= k; ++c)
    for_each_combination(n, c, [&](Mask y) {
      expected += std::size_t{1} << popcount(y);
    });
  if (entries_.size() != expected)
    throw std::invalid_argument("labeled decoder: not total");
}

Mask LabeledDecoder::decode(Mask y, Mask values) const {
  auto it = entries_.find(key(y, values));
  if (it == entries_.end())
    throw std::out_of_range("labeled decoder: no entry for that sub-sample");
  return it->second;
}

SchemeProgram table_to_program(const UnlabeledDecoder& d, const Family& f) {
  if (d.base_size() != f.base_size())
    throw std::invalid_argument("table_to_program: base size mismatch");
  auto decoder = std::make_shared<UnlabeledDecoder>(d);
  SchemeProgram p;
  p.n = d.base_size();
  p.size_bound = d.size_bound();
  p.description = "table";
  p.compress = [decoder](const PartialFunc& g) {
    int k = std::min(decoder->size_bound(), popcount(g.domain));
    return first_fitting_subset(g.domain, k, [&](Mask y) {
      return extends(BoolFunc{g.n, decoder->decode(y)}, g);
    });
  };
  p.decode = [decoder](Mask y) { return decoder->decode(y); };
  return p;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

struct CheckAccumulator {
  std::uint64_t checked = 0;
  int max_size = 0;
  std::optional<Counterexample> worst;  // minimal (domain, values)

  void merge(const CheckAccumulator& other) {
    checked += other.checked;
    max_size = std::max(max_size, other.max_size);
    if (other.worst &&
        (!worst || std::make_pair(other.worst->sample.domain,
                                  other.worst->sample.values) <
                       std::make_pair(worst->sample.domain,
                                      worst->sample.values)))
      worst = other.worst;
  }
};

// Checks one labeled sample; pushes a counterexample into the accumulator
// when the scheme fails on it.
using SampleChecker =
    std::function<void(const PartialFunc&, CheckAccumulator&)>;

void record_violation(const PartialFunc& g, Counterexample ce,
                      CheckAccumulator& acc) {
  if (!acc.worst || std::make_pair(g.domain, g.values) <
                        std::make_pair(acc.worst->sample.domain,
                                       acc.worst->sample.values))
    acc.worst = std::move(ce);
}

SampleChecker program_checker(const SchemeProgram& p) {
  return [p](const PartialFunc& g, CheckAccumulator& acc) {
    ++acc.checked;
    Counterexample ce;
    ce.sample = g;
    std::optional<Mask> y = p.compress(g);
    if (!y) {
      ce.kind = ViolationKind::kNoCompression;
    } else {
      ce.compressed = y;
      acc.max_size = std::max(acc.max_size, popcount(*y));
      if (!is_subset(*y, g.domain)) {
        ce.kind = ViolationKind::kNotSubset;
      } else if (popcount(*y) > p.size_bound) {
        ce.kind = ViolationKind::kSizeExceeded;
      } else {
        Mask dec = p.decode(*y);
        ce.decoded = dec;
        Mask diff = (dec ^ g.values) & g.domain;
        if (diff == 0) return;  // sample reconstructed
        ce.kind = ViolationKind::kDecodeMismatch;
        ce.violated_point = lowest_bit(diff);
      }
    }
    record_violation(g, std::move(ce), acc);
  };
}

// Runs fn(chunk_index, begin, end, acc) over [0, total) split into
// near-equal contiguous chunks, then merges accumulators in chunk order.
template <typename Fn>
CheckAccumulator parallel_scan(std::uint64_t total, int threads, Fn&& fn) {
  int workers = threads < 1 ? 1 : threads;
  if (static_cast<std::uint64_t>(workers) > total && total > 0)
    workers = static_cast<int>(total);
  if (workers <= 1) {
    CheckAccumulator acc;
    fn(std::uint64_t{0}, total, acc);
    return acc;
  }
  std::vector<CheckAccumulator> parts(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    std::uint64_t begin = total * static_cast<std::uint64_t>(t) /
                          static_cast<std::uint64_t>(workers);
    std::uint64_t end = total * static_cast<std::uint64_t>(t + 1) /
                        static_cast<std::uint64_t>(workers);
    pool.emplace_back([&, t, begin, end] {
      fn(begin, end, parts[static_cast<std::size_t>(t)]);
    });
  }
  for (auto& th : pool) th.join();
  CheckAccumulator acc;
  for (const auto& part : parts) acc.merge(part);
  return acc;
}

VerificationReport run_verification(const SampleChecker& check, const Family& f,
                                    const VerifyOptions& opt) {
  const Mask full = full_mask(f.base_size());
  CheckAccumulator acc;
  switch (opt.mode) {
    case VerifyMode::kExhaustive:
    case VerifyMode::kBounded: {
      int cap = opt.mode == VerifyMode::kBounded ? opt.max_domain
                                                 : f.base_size();
      std::uint64_t domains = std::uint64_t{full} + 1;
      acc = parallel_scan(domains, opt.threads,
                          [&](std::uint64_t begin, std::uint64_t end,
                              CheckAccumulator& local) {
                            std::vector<Mask> buf;
                            for (std::uint64_t s = begin; s < end; ++s) {
                              Mask mask = static_cast<Mask>(s);
                              if (popcount(mask) > cap) continue;
                              trace_values(f, mask, buf);
                              for (Mask v : buf)
                                check(PartialFunc{f.base_size(), mask, v},
                                      local);
                            }
                          });
      break;
    }
    case VerifyMode::kFullDomainOnly: {
      const std::vector<Mask>& fns = f.functions();
      acc = parallel_scan(f.size(), opt.threads,
                          [&](std::uint64_t begin, std::uint64_t end,
                              CheckAccumulator& local) {
                            for (std::uint64_t i = begin; i < end; ++i)
                              check(PartialFunc{f.base_size(), full,
                                                fns[static_cast<std::size_t>(i)]},
                                    local);
                          });
      break;
    }
    case VerifyMode::kRandom: {
      const std::vector<Mask>& fns = f.functions();
      acc = parallel_scan(
          opt.samples, opt.threads,
          [&](std::uint64_t begin, std::uint64_t end, CheckAccumulator& local) {
            for (std::uint64_t i = begin; i < end; ++i) {
              std::uint64_t x = mix64(opt.seed + i * 0x9E3779B97F4A7C15ull);
              Mask fn = fns[static_cast<std::size_t>(x % fns.size())];
              Mask s = static_cast<Mask>(mix64(x)) & full;
              check(PartialFunc{f.base_size(), s, fn & s}, local);
            }
          });
      break;
    }
  }
  VerificationReport r;
  r.valid = !acc.worst.has_value();
  r.options = opt;
  r.checked = acc.checked;
  r.max_compressed_size = acc.max_size;
  r.counterexample = acc.worst;
  return r;
}

}  // namespace

VerificationReport verify(const SchemeProgram& p, const Family& f,
                          const VerifyOptions& opt) {
  if (p.n != f.base_size())
    throw std::invalid_argument("verify: base size mismatch");
  return run_verification(program_checker(p), f, opt);
}

VerificationReport verify_labeled(const LabeledDecoder& d, const Family& f,
                                  const VerifyOptions& opt) {
  if (d.base_size() != f.base_size())
    throw std::invalid_argument("verify_labeled: base size mismatch");
  auto decoder = std::make_shared<LabeledDecoder>(d);
  const int bound = d.size_bound();
  SampleChecker check = [decoder, bound](const PartialFunc& g,
                                         CheckAccumulator& acc) {
    ++acc.checked;
    int cap = std::min(bound, popcount(g.domain));
    auto hit = first_fitting_subset(g.domain, cap, [&](Mask y) {
      return extends(BoolFunc{g.n, decoder->decode(y, g.values & y)}, g);
    });
    if (hit) {
      acc.max_size = std::max(acc.max_size, popcount(*hit));
      return;
    }
    Counterexample ce;
    ce.sample = g;
    ce.kind = ViolationKind::kNoCompression;
    record_violation(g, std::move(ce), acc);
  };
  return run_verification(check, f, opt);
}

SchemeProgram keep_ones_scheme(const Family& f) {
  int bound = 0;
  for (Mask fn : f.functions()) bound = std::max(bound, popcount(fn));
  SchemeProgram p;
  p.n = f.base_size();
  p.size_bound = bound;
  p.description = "keep-ones";
  p.compress = [](const PartialFunc& g) -> std::optional<Mask> {
    return g.values;
  };
  p.decode = [](Mask y) { return y; };
  return p;
}

SchemeProgram keep_zeros_scheme(const Family& f) {
  int bound = 0;
  for (Mask fn : f.functions())
    bound = std::max(bound, f.base_size() - popcount(fn));
  const Mask full = full_mask(f.base_size());
  SchemeProgram p;
  p.n = f.base_size();
  p.size_bound = bound;
  p.description = "keep-zeros";
  p.compress = [](const PartialFunc& g) -> std::optional<Mask> {
    return g.domain & ~g.values;
  };
  p.decode = [full](Mask y) { return full & ~y; };
  return p;
}

SchemeProgram product_scheme(const SchemeProgram& p1, const SchemeProgram& p2) {
  if (p1.n + p2.n > kMaxBase)
    throw std::invalid_argument("product_scheme: combined base too large");
  const int nl = p1.n;
  const Mask low = full_mask(nl);
  SchemeProgram p;
  p.n = p1.n + p2.n;
  p.size_bound = p1.size_bound + p2.size_bound;
  p.description = "product:" + p1.description + "," + p2.description;
  p.compress = [p1, p2, nl, low](const PartialFunc& g) -> std::optional<Mask> {
    PartialFunc g1{p1.n, g.domain & low, g.values & low};
    PartialFunc g2{p2.n, g.domain >> nl, g.values >> nl};
    std::optional<Mask> y1 = p1.compress(g1);
    std::optional<Mask> y2 = p2.compress(g2);
    if (!y1 || !y2) return std::nullopt;
    return *y1 | (*y2 << nl);
  };
  p.decode = [p1, p2, nl, low](Mask y) {
    return p1.decode(y & low) | (p2.decode(y >> nl) << nl);
  };
  return p;
}

SchemeProgram restrict_scheme(const SchemeProgram& p, Mask keep) {
  if (keep == 0) throw std::invalid_argument("restrict_scheme: empty keep set");
  if (keep & ~full_mask(p.n))
    throw std::invalid_argument("restrict_scheme: keep set beyond the base");
  SchemeProgram out;
  out.n = popcount(keep);
  out.size_bound = p.size_bound;
  out.description = "restrict:" + p.description;
  out.compress = [p, keep](const PartialFunc& g) -> std::optional<Mask> {
    PartialFunc wide{p.n, scatter_bits(g.domain, keep),
                     scatter_bits(g.values, keep)};
    std::optional<Mask> y = p.compress(wide);
    if (!y) return std::nullopt;
    return compact_bits(*y, keep);
  };
  out.decode = [p, keep](Mask y) {
    return compact_bits(p.decode(scatter_bits(y, keep)), keep);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

std::string verify_mode_name(const VerifyOptions& opt) {
  switch (opt.mode) {
    case VerifyMode::kExhaustive:
      return "exhaustive";
    case VerifyMode::kBounded:
      return "bounded:" + std::to_string(opt.max_domain);
    case VerifyMode::kRandom:
      return "random:" + std::to_string(opt.samples) + ":" +
             std::to_string(opt.seed);
    case VerifyMode::kFullDomainOnly:
      return "full-domain-only";
  }
  return "?";
}

namespace {

const char* violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::kNoCompression:
      return "no-compression";
    case ViolationKind::kNotSubset:
      return "kept-set-not-in-domain";
    case ViolationKind::kSizeExceeded:
      return "size-exceeded";
    case ViolationKind::kDecodeMismatch:
      return "decode-mismatch";
  }
  return "?";
}

std::string mask_to_set_string(Mask m) {
  if (m == 0) return "-";
  std::string out;
  for (int i : elements_of(m)) {
    if (!out.empty()) out += ",";
    out += std::to_string(i);
  }
  return out;
}

std::string sample_to_string(const PartialFunc& g) {
  std::string out;
  for (int i = 0; i < g.n; ++i)
    out += test_bit(g.domain, i) ? (test_bit(g.values, i) ? '1' : '0') : '.';
  return out;
}

}  // namespace

std::string report_to_text(const VerificationReport& r) {
  std::ostringstream out;
  out << (r.valid ? "valid" : "INVALID") << " mode=" << verify_mode_name(r.options)
      << " checked=" << r.checked
      << " max-compressed-size=" << r.max_compressed_size << "\n";
  if (r.counterexample) {
    const Counterexample& ce = *r.counterexample;
    out << "counterexample: sample=" << sample_to_string(ce.sample)
        << " violation=" << violation_name(ce.kind);
    if (ce.compressed)
      out << " kept={" << mask_to_set_string(*ce.compressed) << "}";
    if (ce.decoded)
      out << " decoded="
          << function_to_string(BoolFunc{ce.sample.n, *ce.decoded});
    if (ce.violated_point >= 0) out << " at=" << ce.violated_point;
    out << "\n";
  }
  return out.str();
}

std::string report_to_json(const VerificationReport& r) {
  std::ostringstream out;
  out << "{\"valid\":" << (r.valid ? "true" : "false") << ",\"mode\":\""
      << verify_mode_name(r.options) << "\",\"checked\":" << r.checked
      << ",\"max_compressed_size\":" << r.max_compressed_size;
  if (r.counterexample) {
    const Counterexample& ce = *r.counterexample;
    out << ",\"counterexample\":{\"sample\":\"" << sample_to_string(ce.sample)
        << "\",\"violation\":\"" << violation_name(ce.kind) << "\"";
    if (ce.compressed)
      out << ",\"kept\":\"" << mask_to_set_string(*ce.compressed) << "\"";
    if (ce.decoded)
      out << ",\"decoded\":\""
          << function_to_string(BoolFunc{ce.sample.n, *ce.decoded}) << "\"";
    if (ce.violated_point >= 0) out << ",\"at\":" << ce.violated_point;
    out << "}";
  }
  out << "}";
  return out.str();
}

// ---------------------------------------------------------------------------
// Decoder file format
// ---------------------------------------------------------------------------

void write_ucs(std::ostream& out, const UnlabeledDecoder& d) {
  out << "decoder base " << d.base_size() << " size " << d.size_bound() << "\n";
  for (auto [y, f] : d.sorted_entries())
    out << mask_to_set_string(y) << " "
        << function_to_string(BoolFunc{d.base_size(), f}) << "\n";
}

UnlabeledDecoder read_ucs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(".ucs: empty file");
  std::istringstream head(line);
  std::string w1, w2, w3;
  int n = 0, k = 0;
  if (!(head >> w1 >> w2 >> n >> w3 >> k) || w1 != "decoder" || w2 != "base" ||
      w3 != "size")
    throw std::runtime_error(".ucs: expected 'decoder base <n> size <k>'");
  std::vector<std::pair<Mask, Mask>> entries;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string set_str, val_str;
    if (!(ls >> set_str >> val_str) || !(ls >> std::ws).eof())
      throw std::runtime_error(".ucs line " + std::to_string(lineno) +
                               ": expected '<set> <values>'");
    Mask y = 0;
    if (set_str != "-") {
      std::istringstream ss(set_str);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        int e = std::stoi(tok);
        if (e < 0 || e >= n)
          throw std::runtime_error(".ucs line " + std::to_string(lineno) +
                                   ": element out of range");
        y |= Mask{1} << e;
      }
    }
    entries.emplace_back(y, parse_function_string(val_str, n));
  }
  return UnlabeledDecoder(n, k, std::move(entries));
}

}  // namespace ucs
