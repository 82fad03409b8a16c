#include "ucs/tables.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ucs/search.hpp"

namespace ucs {

TripleGeometry::TripleGeometry(Family family) : family_(std::move(family)) {
  const Mask full = full_mask(family_.base_size());
  // Triple-1 position sets are exactly the weight-3 one-sets of members;
  // triple-0 sets the three-element zero-sets.
  for (Mask f : family_.functions()) {
    if (popcount(f) == 3) one_triples_.push_back(f);
    if (popcount(full & ~f) == 3) zero_triples_.push_back(full & ~f);
  }
  std::sort(one_triples_.begin(), one_triples_.end());
  one_triples_.erase(std::unique(one_triples_.begin(), one_triples_.end()),
                     one_triples_.end());
  std::sort(zero_triples_.begin(), zero_triples_.end());
  zero_triples_.erase(std::unique(zero_triples_.begin(), zero_triples_.end()),
                      zero_triples_.end());
  for (Mask t : one_triples_)
    if (is_zero_triple(t))
      throw std::invalid_argument(
          "triple geometry: a position set carries both triple types");
}

bool TripleGeometry::is_one_triple(Mask t) const {
  return std::binary_search(one_triples_.begin(), one_triples_.end(), t);
}

bool TripleGeometry::is_zero_triple(Mask t) const {
  return std::binary_search(zero_triples_.begin(), zero_triples_.end(), t);
}

const TripleGeometry& pentagon_geometry() {
  static const TripleGeometry geo(make_builtin("c5"));
  return geo;
}

const TripleGeometry& w6_geometry() {
  static const TripleGeometry geo(make_builtin("w6"));
  return geo;
}

CopyStatus classify_copy(const TripleGeometry& geo, const PartialFunc& g) {
  bool is_trace = false;
  for (Mask f : geo.family().functions())
    if ((f & g.domain) == g.values) {
      is_trace = true;
      break;
    }
  if (!is_trace)
    throw std::invalid_argument("classify: sample is not a trace of the copy");
  CopyStatus st;
  Mask ones = g.values;
  Mask zeros = g.domain & ~g.values;
  if (popcount(ones) == 3) {
    st.t1 = true;
    st.t1_pos = ones;
  }
  if (popcount(zeros) == 3) {
    st.t0 = true;
    st.t0_pos = zeros;
  }
  return st;
}

TripleStatus classify_trace(const TripleGeometry& geo, const PartialFunc& g) {
  CopyStatus st = classify_copy(geo, g);
  if (st.t1) return {TripleTag::kTriple1, st.t1_pos};
  if (st.t0) return {TripleTag::kTriple0, st.t0_pos};
  return {TripleTag::kNoTriple, 0};
}

namespace {

int pentagon_distance(int a, int b) {
  int d = (a - b + 5) % 5;
  return std::min(d, 5 - d);
}

}  // namespace

int central_element(Mask t) {
  if (popcount(t) != 3)
    throw std::invalid_argument("central_element: need exactly 3 positions");
  std::vector<int> e = elements_of(t);
  int found = -1;
  for (int i = 0; i < 3; ++i) {
    int a = e[(i + 1) % 3], b = e[(i + 2) % 3];
    if (pentagon_distance(e[i], a) == pentagon_distance(e[i], b)) {
      if (found >= 0) throw std::logic_error("central_element: not unique");
      found = e[i];
    }
  }
  if (found < 0) throw std::logic_error("central_element: none found");
  return found;
}

int central_copy(const std::vector<int>& indices) {
  if (indices.size() != 3)
    throw std::invalid_argument("central_copy: need exactly 3 indices");
  Mask t = 0;
  for (int i : indices) {
    if (i < 0 || i > 4)
      throw std::invalid_argument("central_copy: index out of range");
    t |= Mask{1} << i;
  }
  if (popcount(t) != 3)
    throw std::invalid_argument("central_copy: indices not distinct");
  return central_element(t);
}

int central_partner(int a, int b) {
  int found = -1;
  for (int c = 0; c < 5; ++c) {
    if (c == a || c == b) continue;
    if (pentagon_distance(c, a) == pentagon_distance(c, b)) {
      if (found >= 0) throw std::logic_error("central_partner: not unique");
      found = c;
    }
  }
  if (found < 0) throw std::logic_error("central_partner: none found");
  return found;
}

// ---------------------------------------------------------------------------
// Two-copy scheme (table 1, and the regular part of w6*w6)
// ---------------------------------------------------------------------------

namespace {

// Rule conditions in row order; every sample of the join matches one
// (full-full w6 samples are diverted to the pool before this runs).
int two_copy_rule(const CopyStatus& s1, const CopyStatus& s2) {
  if (!s1.t1 && !s1.t0 && !s2.t1 && !s2.t0) return 1;  // no triples
  if (s1.t1 && !s2.t1) return 2;                       // keep all 1's
  if (s1.t0 && !s2.t0) return 3;                       // keep all 0's
  if (s2.t1 && !s1.t0) return 4;  // keep copy-2 triple and copy-1 0's
  if (s2.t0 && !s1.t1) return 5;  // keep copy-2 triple and copy-1 1's
  return 0;
}

Mask two_copy_compress(int rule, const PartialFunc& g, int n1,
                       const CopyStatus& s2) {
  Mask low = full_mask(n1);
  Mask zeros = g.domain & ~g.values;
  switch (rule) {
    case 1:
    case 2:
      return g.values;
    case 3:
      return zeros;
    case 4:
      return (s2.t1_pos << n1) | (zeros & low);
    case 5:
      return (s2.t0_pos << n1) | (g.values & low);
  }
  throw std::logic_error("two_copy_compress: no rule applies");
}

// Which rule produced a kept set: a kept 3-set inside one copy was a triple
// in the sample and its positions reveal the type.
int two_copy_kept_rule(const TripleGeometry& g1, const TripleGeometry& g2,
                       Mask kept, int n1) {
  Mask k1 = kept & full_mask(n1);
  Mask k2 = kept >> n1;
  if (popcount(k2) == 3 && g2.is_one_triple(k2)) return 4;
  if (popcount(k2) == 3 && g2.is_zero_triple(k2)) return 5;
  if (popcount(k1) == 3 && g1.is_one_triple(k1)) return 2;
  if (popcount(k1) == 3 && g1.is_zero_triple(k1)) return 3;
  return 1;
}

Mask two_copy_decode(int rule, Mask kept, int n1, int n2) {
  Mask k1 = kept & full_mask(n1);
  Mask k2 = kept >> n1;
  Mask full1 = full_mask(n1), full2 = full_mask(n2);
  switch (rule) {
    case 1:
    case 2:
      return kept;  // kept positions decode to 1, the rest to 0
    case 3:
      return (full1 & ~k1) | ((full2 & ~k2) << n1);
    case 4:
      return (full1 & ~k1) | (k2 << n1);
    case 5:
      return k1 | (((full2 & ~k2)) << n1);
  }
  throw std::logic_error("two_copy_decode: bad rule");
}

TableScheme make_two_copy_scheme(const TripleGeometry& g1,
                                 const TripleGeometry& g2,
                                 std::string description) {
  const int n1 = g1.base_size();
  const int n2 = g2.base_size();
  auto split = [n1, n2](const PartialFunc& g) {
    PartialFunc a{n1, g.domain & full_mask(n1), g.values & full_mask(n1)};
    PartialFunc b{n2, g.domain >> n1, g.values >> n1};
    return std::make_pair(a, b);
  };
  TableScheme t;
  t.program.n = n1 + n2;
  t.program.size_bound = 5;
  t.program.description = std::move(description);
  t.program.compress = [&g1, &g2, split, n1](const PartialFunc& g)
      -> std::optional<Mask> {
    auto [a, b] = split(g);
    CopyStatus s1 = classify_copy(g1, a);
    CopyStatus s2 = classify_copy(g2, b);
    int rule = two_copy_rule(s1, s2);
    if (rule == 0) throw std::logic_error("two-copy scheme: uncovered sample");
    return two_copy_compress(rule, g, n1, s2);
  };
  t.program.decode = [&g1, &g2, n1, n2](Mask kept) {
    return two_copy_decode(two_copy_kept_rule(g1, g2, kept, n1), kept, n1, n2);
  };
  t.rule_of_sample = [&g1, &g2, split](const PartialFunc& g) {
    auto [a, b] = split(g);
    return two_copy_rule(classify_copy(g1, a), classify_copy(g2, b));
  };
  t.rule_of_kept = [&g1, &g2, n1](Mask kept) {
    return two_copy_kept_rule(g1, g2, kept, n1);
  };
  return t;
}

}  // namespace

TableScheme scheme_table1() {
  return make_two_copy_scheme(pentagon_geometry(), pentagon_geometry(),
                              "table1-c5x2");
}

// ---------------------------------------------------------------------------
// Five-copy pentagon scheme (table 2)
// ---------------------------------------------------------------------------

namespace {

struct FiveCopyView {
  std::array<PartialFunc, 5> local;
  std::array<CopyStatus, 5> status;
  std::vector<int> t1s, t0s;
  int fifth = -1;      // the copy with neither triple, when a + b == 4
  int fifth_ones = 0;  // number of sampled 1s in that copy
};

FiveCopyView split_five(const PartialFunc& g) {
  FiveCopyView v;
  for (int i = 0; i < 5; ++i) {
    v.local[i] = PartialFunc{5, (g.domain >> (5 * i)) & full_mask(5),
                             (g.values >> (5 * i)) & full_mask(5)};
    v.status[i] = classify_copy(pentagon_geometry(), v.local[i]);
    if (v.status[i].t1) v.t1s.push_back(i);
    if (v.status[i].t0) v.t0s.push_back(i);
  }
  if (v.t1s.size() + v.t0s.size() == 4) {
    for (int i = 0; i < 5; ++i)
      if (!v.status[i].t1 && !v.status[i].t0) v.fifth = i;
    v.fifth_ones = popcount(v.local[v.fifth].values);
  }
  return v;
}

// Row conditions in order; with a copies holding a triple 1 and b holding a
// triple 0, the rows read: a=0 | b=0 | b=1 | a=1,b>=2 | a,b>=2 without a
// single-1 fifth copy | a=b=2 with one.
int five_copy_rule(const FiveCopyView& v) {
  std::size_t a = v.t1s.size(), b = v.t0s.size();
  if (a == 0) return 1;
  if (b == 0) return 2;
  if (b == 1) return 3;
  if (a == 1) return 4;
  if (!(v.fifth >= 0 && v.fifth_ones == 1)) return 5;
  return 6;
}

// Pentagon member determined by a triple: an arc centred at c reconstructs
// to its indicator, a non-arc 3-set centred at c has zeros {c-2, c, c+2}.
Mask member_from_triple1_center(int c) {
  return (Mask{1} << ((c + 4) % 5)) | (Mask{1} << c) | (Mask{1} << ((c + 1) % 5));
}

Mask member_from_triple0_center(int c) {
  Mask zeros = (Mask{1} << ((c + 3) % 5)) | (Mask{1} << c) |
               (Mask{1} << ((c + 2) % 5));
  return full_mask(5) & ~zeros;
}

Mask five_copy_compress(int rule, const FiveCopyView& v, const PartialFunc& g) {
  auto triple_of = [&](int i) {
    return v.status[i].t1 ? v.status[i].t1_pos : v.status[i].t0_pos;
  };
  Mask kept = 0;
  switch (rule) {
    case 1:
      return g.values;
    case 2: {
      int i = v.t1s.front();
      kept = v.status[i].t1_pos << (5 * i);
      for (int j = 0; j < 5; ++j)
        if (j != i) kept |= (v.local[j].domain & ~v.local[j].values) << (5 * j);
      return kept;
    }
    case 3:
      return g.domain & ~g.values;
    case 4: {
      std::vector<int> chosen = {v.t1s.front(), v.t0s[0], v.t0s[1]};
      int centre = central_copy(chosen);
      Mask chosen_mask = 0;
      for (int i : chosen) chosen_mask |= Mask{1} << i;
      for (int i : chosen) {
        Mask t = triple_of(i);
        if (i == centre)
          kept |= (Mask{1} << central_element(t)) << (5 * i);
        else
          kept |= t << (5 * i);
      }
      for (int j = 0; j < 5; ++j)
        if (!test_bit(chosen_mask, j)) kept |= v.local[j].values << (5 * j);
      return kept;
    }
    case 5: {
      for (int i : v.t1s) kept |= v.status[i].t1_pos << (5 * i);
      for (int i : v.t0s)
        kept |= (Mask{1} << central_element(v.status[i].t0_pos)) << (5 * i);
      if (v.fifth >= 0) kept |= v.local[v.fifth].values << (5 * v.fifth);
      return kept;
    }
    case 6: {
      for (int i : v.t1s) kept |= v.status[i].t1_pos << (5 * i);
      for (int i : v.t0s) {
        Mask t = v.status[i].t0_pos;
        kept |= (t & ~(Mask{1} << central_element(t))) << (5 * i);
      }
      kept |= v.local[v.fifth].values << (5 * v.fifth);
      return kept;
    }
  }
  throw std::logic_error("five_copy_compress: bad rule");
}

struct FiveKept {
  std::array<Mask, 5> part;
  std::array<int, 5> count;
  std::vector<int> triples;  // copies whose kept set has 3 elements
  bool all_arcs = true;
};

FiveKept split_kept(Mask kept) {
  FiveKept k;
  for (int i = 0; i < 5; ++i) {
    k.part[i] = (kept >> (5 * i)) & full_mask(5);
    k.count[i] = popcount(k.part[i]);
    if (k.count[i] == 3) {
      k.triples.push_back(i);
      if (!pentagon_geometry().is_one_triple(k.part[i])) k.all_arcs = false;
    }
  }
  return k;
}

// Dispatch from the kept set alone: the number of kept triples, their
// types, and for the last two rows the per-copy count profile.
int five_copy_kept_rule(const FiveKept& k) {
  if (k.triples.empty()) return 1;
  if (k.triples.size() == 1)
    return pentagon_geometry().is_one_triple(k.part[k.triples[0]]) ? 2 : 3;
  if (!k.all_arcs) return 4;
  std::array<int, 5> sorted = k.count;
  std::sort(sorted.begin(), sorted.end());
  if (sorted == std::array<int, 5>{1, 2, 2, 3, 3}) return 6;
  return 5;
}

Mask five_copy_decode(int rule, const FiveKept& k) {
  std::array<Mask, 5> fn{};
  auto indicator = [&](int i) { fn[i] = k.part[i]; };
  auto complement = [&](int i) { fn[i] = full_mask(5) & ~k.part[i]; };
  switch (rule) {
    case 1:
      for (int i = 0; i < 5; ++i) indicator(i);
      break;
    case 2: {
      int t = k.triples[0];
      for (int i = 0; i < 5; ++i) i == t ? indicator(i) : complement(i);
      break;
    }
    case 3:
      for (int i = 0; i < 5; ++i) complement(i);
      break;
    case 4: {
      int i = k.triples[0], j = k.triples[1];
      int centre = central_partner(i, j);
      bool both_zero = !pentagon_geometry().is_one_triple(k.part[i]) &&
                       !pentagon_geometry().is_one_triple(k.part[j]);
      for (int x = 0; x < 5; ++x) {
        if (x == i || x == j) {
          pentagon_geometry().is_one_triple(k.part[x]) ? indicator(x)
                                                       : complement(x);
        } else if (x == centre) {
          int e = lowest_bit(k.part[x]);
          fn[x] = both_zero ? member_from_triple1_center(e)
                            : member_from_triple0_center(e);
        } else {
          indicator(x);
        }
      }
      break;
    }
    case 5:
      for (int x = 0; x < 5; ++x) {
        if (k.count[x] == 3) {
          indicator(x);
        } else if (k.count[x] == 1) {
          fn[x] = member_from_triple0_center(lowest_bit(k.part[x]));
        } else {
          indicator(x);  // the fifth copy, holding 0 or 2 ones
        }
      }
      break;
    case 6:
      for (int x = 0; x < 5; ++x) {
        if (k.count[x] == 3) {
          indicator(x);
        } else if (k.count[x] == 2) {
          auto e = elements_of(k.part[x]);
          fn[x] = member_from_triple0_center(central_partner(e[0], e[1]));
        } else {
          indicator(x);  // the fifth copy's single 1
        }
      }
      break;
    default:
      throw std::logic_error("five_copy_decode: bad rule");
  }
  Mask out = 0;
  for (int i = 0; i < 5; ++i) out |= fn[i] << (5 * i);
  return out;
}

}  // namespace

TableScheme scheme_table2() {
  TableScheme t;
  t.program.n = 25;
  t.program.size_bound = 11;
  t.program.description = "table2-c5pow5";
  t.program.compress = [](const PartialFunc& g) -> std::optional<Mask> {
    FiveCopyView v = split_five(g);
    return five_copy_compress(five_copy_rule(v), v, g);
  };
  t.program.decode = [](Mask kept) {
    FiveKept k = split_kept(kept);
    return five_copy_decode(five_copy_kept_rule(k), k);
  };
  t.rule_of_sample = [](const PartialFunc& g) {
    return five_copy_rule(split_five(g));
  };
  t.rule_of_kept = [](Mask kept) {
    return five_copy_kept_rule(split_kept(kept));
  };
  return t;
}

// ---------------------------------------------------------------------------
// c5-minus decoder (table 3)
// ---------------------------------------------------------------------------

namespace {

Mask reflect5(Mask m) {
  Mask out = 0;
  for (int i = 0; i < 5; ++i)
    if (test_bit(m, i)) out |= Mask{1} << (4 - i);
  return out;
}

}  // namespace

UnlabeledDecoder scheme_table3() {
  // The ten printed rows; the remaining six entries follow by the reflection
  // 0<->4, 1<->3 applied to both the kept set and the decoded values.
  const std::vector<std::pair<Mask, const char*>> printed = {
      {0b00000, "10001"}, {0b00001, "00101"}, {0b00010, "11001"},
      {0b00100, "10101"}, {0b00011, "01001"}, {0b00101, "01001"},
      {0b01001, "00111"}, {0b10001, "01010"}, {0b00110, "11100"},
      {0b01010, "01010"},
  };
  std::map<Mask, Mask> entries;
  for (auto [y, s] : printed) {
    Mask v = parse_function_string(s, 5);
    auto [it, fresh] = entries.emplace(y, v);
    if (!fresh && it->second != v)
      throw std::logic_error("table3: inconsistent printed rows");
  }
  for (auto [y, s] : printed) {
    Mask ry = reflect5(y);
    Mask rv = reflect5(parse_function_string(s, 5));
    auto [it, fresh] = entries.emplace(ry, rv);
    if (!fresh && it->second != rv)
      throw std::logic_error("table3: reflection clashes with a printed row");
  }
  std::vector<std::pair<Mask, Mask>> list(entries.begin(), entries.end());
  return UnlabeledDecoder(5, 2, std::move(list));
}

Table3Outcome table3_with_fallback() {
  Table3Outcome out{scheme_table3(), {}, std::nullopt, ""};
  Family c5m = make_builtin("c5-minus");
  VerifyOptions opt;
  opt.mode = VerifyMode::kExhaustive;
  out.printed_report = verify(table_to_program(out.printed, c5m), c5m, opt);
  if (out.printed_report.valid) {
    out.note = "printed table verified exhaustively";
    return out;
  }
  std::ostringstream note;
  note << "printed table FAILED exhaustive verification: "
       << report_to_text(out.printed_report)
       << "substituted a searched size-2 decoder";
  SearchResult sr = decide_ucs(c5m, 2);
  if (sr.decision != Decision::kFound || !sr.unlabeled_certificate)
    throw std::logic_error("table3 fallback: no size-2 decoder found");
  out.substitute = sr.unlabeled_certificate;
  out.note = note.str();
  return out;
}

// ---------------------------------------------------------------------------
// w6 * p:1 scheme (table 4)
// ---------------------------------------------------------------------------

namespace {

constexpr Mask kW6Part = 0b0111111;
constexpr Mask kExtraBit = Mask{1} << 6;

int table4_rule(const PartialFunc& g) {
  PartialFunc w{6, g.domain & kW6Part, g.values & kW6Part};
  CopyStatus st = classify_copy(w6_geometry(), w);
  bool extra_is_one = (g.domain & kExtraBit) && (g.values & kExtraBit);
  if (!extra_is_one) return 1;  // extra unsampled or sampled 0
  return st.t0 ? 2 : 3;
}

int table4_kept_rule(Mask kept) {
  if (kept & kExtraBit) return 3;
  if (popcount(kept) == 3 && w6_geometry().is_zero_triple(kept)) return 2;
  return 1;
}

}  // namespace

TableScheme scheme_table4() {
  TableScheme t;
  t.program.n = 7;
  t.program.size_bound = 3;
  t.program.description = "table4-w6p1";
  t.program.compress = [](const PartialFunc& g) -> std::optional<Mask> {
    PartialFunc w{6, g.domain & kW6Part, g.values & kW6Part};
    CopyStatus st = classify_copy(w6_geometry(), w);
    switch (table4_rule(g)) {
      case 1:
        return g.values & kW6Part;  // the 1's of the w6 block
      case 2:
        return st.t0_pos;
      case 3:
        return kExtraBit | (w.domain & ~w.values);
      default:
        return std::nullopt;
    }
  };
  t.program.decode = [](Mask kept) -> Mask {
    switch (table4_kept_rule(kept)) {
      case 3:
        return (kW6Part & ~(kept & kW6Part)) | kExtraBit;
      case 2:
        return (kW6Part & ~kept) | kExtraBit;
      default:
        return kept;  // kept positions 1, everything else (incl. extra) 0
    }
  };
  t.rule_of_sample = table4_rule;
  t.rule_of_kept = table4_kept_rule;
  return t;
}

// ---------------------------------------------------------------------------
// w6 * w6 scheme with the full-sample pool
// ---------------------------------------------------------------------------

W6x2Pool w6x2_pool() {
  W6x2Pool out;
  for (Mask m = 0; m <= full_mask(12); ++m) {
    int c1 = popcount(m & full_mask(6));
    int c2 = popcount(m >> 6);
    if ((c1 >= 4 || c2 >= 4) && c1 + c2 <= 5) out.pool.push_back(m);
  }
  const Family w6 = make_builtin("w6");
  for (Mask f2 : w6.functions())
    for (Mask f1 : w6.functions()) out.full_samples.push_back(f1 | (f2 << 6));
  std::sort(out.full_samples.begin(), out.full_samples.end());
  return out;
}

TableScheme scheme_w6x2() {
  static const W6x2Pool pool = w6x2_pool();
  if (pool.pool.size() != 222 || pool.full_samples.size() != 100)
    throw std::logic_error("w6x2: pool construction out of shape");
  // Fully sampled function pairs in ascending encoding order are matched to
  // pool masks in ascending order; the pool is disjoint from the five-rule
  // kept sets, which never keep more than three positions per copy.
  static const auto maps = [] {
    std::pair<std::map<Mask, Mask>, std::map<Mask, Mask>> m;
    for (std::size_t i = 0; i < pool.full_samples.size(); ++i) {
      m.first[pool.full_samples[i]] = pool.pool[i];
      m.second[pool.pool[i]] = pool.full_samples[i];
    }
    return m;
  }();

  TableScheme base = make_two_copy_scheme(w6_geometry(), w6_geometry(), "w6x2");
  TableScheme t;
  t.program.n = 12;
  t.program.size_bound = 5;
  t.program.description = "w6x2";
  t.program.compress = [base](const PartialFunc& g) -> std::optional<Mask> {
    if (g.domain == full_mask(12)) {
      auto it = maps.first.find(g.values);
      if (it == maps.first.end())
        throw std::invalid_argument("w6x2: full sample is not a member pair");
      return it->second;
    }
    return base.program.compress(g);
  };
  t.program.decode = [base](Mask kept) {
    if (popcount(kept & full_mask(6)) >= 4 || popcount(kept >> 6) >= 4) {
      auto it = maps.second.find(kept);
      return it == maps.second.end() ? Mask{0} : it->second;
    }
    return base.program.decode(kept);
  };
  t.rule_of_sample = [base](const PartialFunc& g) {
    return g.domain == full_mask(12) ? 0 : base.rule_of_sample(g);
  };
  t.rule_of_kept = [base](Mask kept) {
    if (popcount(kept & full_mask(6)) >= 4 || popcount(kept >> 6) >= 4)
      return 0;
    return base.rule_of_kept(kept);
  };
  return t;
}

}  // namespace ucs
