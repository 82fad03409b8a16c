#include "ucs/family.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ucs {

Family::Family(int base_size, std::vector<Mask> functions, std::string label)
    : n_(base_size), fns_(std::move(functions)), label_(std::move(label)) {
  if (n_ < 1 || n_ > kMaxBase)
    throw std::invalid_argument("family: base size must be in 1.." +
                                std::to_string(kMaxBase));
  if (fns_.empty()) throw std::invalid_argument("family: no functions");
  const Mask full = full_mask(n_);
  for (Mask f : fns_)
    if (f & ~full)
      throw std::invalid_argument("family: function has bits beyond the base");
  std::sort(fns_.begin(), fns_.end());
  fns_.erase(std::unique(fns_.begin(), fns_.end()), fns_.end());
}

bool Family::contains(Mask f) const {
  return std::binary_search(fns_.begin(), fns_.end(), f);
}

namespace {

Family make_c5() {
  // Members take the values 1-0-0-1 on four consecutive pentagon vertices;
  // equivalently the one-set is a distance-2 pair {i, i+2} or an arc
  // {i, i+1, i+2} (the free fifth vertex chooses between the two shapes).
  std::vector<Mask> fns;
  for (int i = 0; i < 5; ++i) {
    Mask pair = (Mask{1} << i) | (Mask{1} << ((i + 2) % 5));
    Mask arc = pair | (Mask{1} << ((i + 1) % 5));
    fns.push_back(pair);
    fns.push_back(arc);
  }
  return Family(5, std::move(fns), "c5");
}

Family make_p(int k) {
  if (k < 1 || k > 8)
    throw std::invalid_argument("p:<k> requires 1 <= k <= 8");
  std::vector<Mask> fns(std::size_t{1} << k);
  std::iota(fns.begin(), fns.end(), Mask{0});
  return Family(k, std::move(fns), "p:" + std::to_string(k));
}

Family make_w6() {
  // Extend every pentagon function to a sixth element so that each member
  // has exactly three ones: weight-2 members get a 1, weight-3 members a 0.
  Family c5 = make_c5();
  std::vector<Mask> fns;
  for (Mask f : c5.functions())
    fns.push_back(popcount(f) == 2 ? (f | (Mask{1} << 5)) : f);
  return Family(6, std::move(fns), "w6");
}

}  // namespace

Family make_builtin(const std::string& name) {
  if (name == "c5") return make_c5();
  if (name == "c5-minus") {
    // Drop the member 0-1-1-1-0 (ones on the arc {1,2,3}).
    return remove_function(make_c5(), BoolFunc{5, 0b01110});
  }
  if (name == "c4") {
    Family c4 = restrict_to(make_c5(), 0b11011);
    return Family(c4.base_size(), c4.functions(), "c4");
  }
  if (name == "w6") return make_w6();
  if (name.rfind("p:", 0) == 0) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(name.substr(2), &used);
      if (used != name.size() - 2) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad power family name: " + name);
    }
    return make_p(k);
  }
  throw std::invalid_argument("unknown family name: " + name);
}

Family join(const Family& f, const Family& g) {
  int n = f.base_size() + g.base_size();
  if (n > kMaxBase)
    throw std::invalid_argument("join: combined base exceeds " +
                                std::to_string(kMaxBase));
  std::vector<Mask> fns;
  fns.reserve(f.size() * g.size());
  for (Mask b : g.functions())
    for (Mask a : f.functions())
      fns.push_back(a | (b << f.base_size()));
  std::string label = f.label().empty() || g.label().empty()
                          ? ""
                          : f.label() + "*" + g.label();
  Family out(n, std::move(fns), label);
  out.parts_ = std::make_shared<const Family::JoinParts>(Family::JoinParts{f, g});
  return out;
}

Family power_join(const Family& f, int copies) {
  if (copies < 1) throw std::invalid_argument("power_join: need >= 1 copies");
  Family out = f;
  for (int i = 1; i < copies; ++i) out = join(out, f);
  return out;
}

Family restrict_to(const Family& f, Mask keep) {
  if (keep == 0) throw std::invalid_argument("restrict: empty base subset");
  if (keep & ~full_mask(f.base_size()))
    throw std::invalid_argument("restrict: subset has bits beyond the base");
  std::vector<Mask> fns;
  fns.reserve(f.size());
  for (Mask fn : f.functions()) fns.push_back(compact_bits(fn, keep));
  return Family(popcount(keep), std::move(fns), "");
}

Family remove_function(const Family& f, BoolFunc fn) {
  if (fn.n != f.base_size())
    throw std::invalid_argument("remove_function: base size mismatch");
  if (!f.contains(fn.bits))
    throw std::invalid_argument("remove_function: function not in family");
  if (f.size() < 2)
    throw std::invalid_argument("remove_function: family would become empty");
  std::vector<Mask> fns;
  fns.reserve(f.size() - 1);
  for (Mask g : f.functions())
    if (g != fn.bits) fns.push_back(g);
  std::string label = f.label() == "c5" && fn.bits == 0b01110 ? "c5-minus" : "";
  return Family(f.base_size(), std::move(fns), label);
}

namespace {

// Merges the (already ascending) per-block trace lists of a join into the
// ascending list for the whole base.
void combine_join_traces(const Family& f, Mask s, std::vector<Mask>& out) {
  const Family::JoinParts& parts = *f.join_parts();
  int nl = parts.left.base_size();
  std::vector<Mask> left, right;
  trace_values(parts.left, s & full_mask(nl), left);
  trace_values(parts.right, s >> nl, right);
  out.clear();
  out.reserve(left.size() * right.size());
  for (Mask r : right)
    for (Mask l : left) out.push_back(l | (r << nl));
}

}  // namespace

void trace_values(const Family& f, Mask s, std::vector<Mask>& out) {
  if (f.join_parts() != nullptr) {
    combine_join_traces(f, s, out);
    return;
  }
  out.clear();
  int bits = popcount(s);
  std::size_t cap = bits >= 20 ? f.size() : std::size_t{1} << bits;
  if (cap > f.size()) cap = f.size();
  for (Mask fn : f.functions()) {
    Mask v = fn & s;
    auto it = std::lower_bound(out.begin(), out.end(), v);
    if (it == out.end() || *it != v) {
      out.insert(it, v);
      if (out.size() == cap) break;  // every possible trace already seen
    }
  }
}

std::vector<PartialFunc> traces(const Family& f, Mask s) {
  if (s & ~full_mask(f.base_size()))
    throw std::invalid_argument("traces: subset has bits beyond the base");
  std::vector<Mask> vals;
  trace_values(f, s, vals);
  std::vector<PartialFunc> out;
  out.reserve(vals.size());
  for (Mask v : vals) out.push_back(PartialFunc{f.base_size(), s, v});
  return out;
}

bool shatters(const Family& f, Mask x) {
  if (x & ~full_mask(f.base_size()))
    throw std::invalid_argument("shatters: subset has bits beyond the base");
  std::vector<Mask> vals;
  trace_values(f, x, vals);
  return vals.size() == (std::size_t{1} << popcount(x));
}

bool vc_at_most(const Family& f, int d) {
  if (d >= f.base_size()) return true;
  bool ok = true;
  for_each_combination(f.base_size(), d + 1, [&](Mask x) {
    if (ok && shatters(f, x)) ok = false;
  });
  return ok;
}

int vc_dimension(const Family& f) {
  int vc = 0;
  for (int size = 1; size <= f.base_size(); ++size) {
    bool any = false;
    for_each_combination(f.base_size(), size, [&](Mask x) {
      if (!any && shatters(f, x)) any = true;
    });
    if (!any) break;
    vc = size;
  }
  return vc;
}

std::uint64_t sauer_shelah_bound(int n, int d) {
  if (d < 0 || d > n) throw std::invalid_argument("sauer_shelah: need 0<=d<=n");
  std::uint64_t sum = 0, binom = 1;
  for (int i = 0; i <= d; ++i) {
    sum += binom;
    binom = binom * static_cast<std::uint64_t>(n - i) /
            static_cast<std::uint64_t>(i + 1);
  }
  return sum;
}

bool is_containment_maximal(const Family& f, int d) {
  if (!vc_at_most(f, d))
    throw std::invalid_argument("is_containment_maximal: vc already above d");
  const Mask limit = full_mask(f.base_size());
  for (Mask g = 0;; ++g) {
    if (!f.contains(g)) {
      std::vector<Mask> fns = f.functions();
      fns.push_back(g);
      if (vc_at_most(Family(f.base_size(), std::move(fns)), d)) return false;
    }
    if (g == limit) break;
  }
  return true;
}

namespace {

void check_permutation(const std::vector<int>& perm, int n) {
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permutation has wrong length");
  Mask seen = 0;
  for (int p : perm) {
    if (p < 0 || p >= n || test_bit(seen, p))
      throw std::invalid_argument("not a permutation of the base");
    seen |= Mask{1} << p;
  }
}

}  // namespace

Family permute_base(const Family& f, const std::vector<int>& perm) {
  check_permutation(perm, f.base_size());
  std::vector<Mask> fns;
  fns.reserve(f.size());
  for (Mask fn : f.functions()) fns.push_back(permute_mask(fn, perm));
  return Family(f.base_size(), std::move(fns), "");
}

Family flip_values(const Family& f, Mask flip) {
  if (flip & ~full_mask(f.base_size()))
    throw std::invalid_argument("flip_values: bits beyond the base");
  if (flip == 0) return f;
  std::vector<Mask> fns;
  fns.reserve(f.size());
  for (Mask fn : f.functions()) fns.push_back(fn ^ flip);
  return Family(f.base_size(), std::move(fns), "");
}

std::vector<std::uint8_t> canonical_form(const Family& f) {
  const int n = f.base_size();
  if (n > 7)
    throw std::invalid_argument("canonical_form: base size capped at 7");
  const Mask full = full_mask(n);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Mask> valmap(std::size_t{1} << n);
  std::vector<Mask> best, cand;
  do {
    for (Mask v = 0; v <= full; ++v) valmap[v] = permute_mask(v, perm);
    for (Mask flip = 0; flip <= full; ++flip) {
      cand.clear();
      for (Mask fn : f.functions()) cand.push_back(valmap[fn] ^ flip);
      std::sort(cand.begin(), cand.end());
      if (best.empty() || cand < best) best = cand;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<std::uint8_t> enc;
  enc.reserve(best.size() + 2);
  enc.push_back(static_cast<std::uint8_t>(n));
  enc.push_back(static_cast<std::uint8_t>(best.size()));
  for (Mask v : best) enc.push_back(static_cast<std::uint8_t>(v));
  return enc;
}

std::vector<std::vector<int>> automorphisms(const Family& f) {
  const int n = f.base_size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  std::vector<Mask> image;
  do {
    image.clear();
    for (Mask fn : f.functions()) image.push_back(permute_mask(fn, perm));
    std::sort(image.begin(), image.end());
    if (image == f.functions()) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

bool is_two_transitive(const Family& f) {
  const int n = f.base_size();
  auto auts = automorphisms(f);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          if (c == d) continue;
          bool hit = false;
          for (const auto& perm : auts)
            if (perm[a] == c && perm[b] == d) {
              hit = true;
              break;
            }
          if (!hit) return false;
        }
    }
  return true;
}

bool design_check(const Family& f, int lambda) {
  int w = popcount(f.functions().front());
  for (Mask fn : f.functions())
    if (popcount(fn) != w)
      throw std::invalid_argument("design_check: functions have mixed weights");
  const int n = f.base_size();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Mask pair = (Mask{1} << a) | (Mask{1} << b);
      int count = 0;
      for (Mask fn : f.functions())
        if ((fn & pair) == pair) ++count;
      if (count != lambda) return false;
    }
  return true;
}

bool is_subfamily(const Family& f, const Family& g) {
  if (f.base_size() != g.base_size())
    throw std::invalid_argument("is_subfamily: base size mismatch");
  for (Mask fn : f.functions())
    if (!g.contains(fn)) return false;
  return true;
}

std::string function_to_string(BoolFunc f) {
  std::string s(static_cast<std::size_t>(f.n), '0');
  for (int i = 0; i < f.n; ++i)
    if (test_bit(f.bits, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

Mask parse_function_string(const std::string& s, int n) {
  if (static_cast<int>(s.size()) != n)
    throw std::invalid_argument("function string has wrong length: " + s);
  Mask out = 0;
  for (int i = 0; i < n; ++i) {
    char c = s[static_cast<std::size_t>(i)];
    if (c == '1')
      out |= Mask{1} << i;
    else if (c != '0')
      throw std::invalid_argument("function string has a bad character: " + s);
  }
  return out;
}

void write_fam(std::ostream& out, const Family& f) {
  out << "family " << (f.label().empty() ? "unnamed" : f.label()) << "\n";
  out << "base " << f.base_size() << "\n";
  out << "functions " << f.size() << "\n";
  for (Mask fn : f.functions())
    out << function_to_string(BoolFunc{f.base_size(), fn}) << "\n";
}

namespace {

std::string next_line(std::istream& in, int& lineno) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(".fam: unexpected end of file at line " +
                             std::to_string(lineno + 1));
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Family read_fam(std::istream& in) {
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(".fam line " + std::to_string(lineno) + ": " + msg);
  };
  std::string line = next_line(in, lineno);
  if (line.rfind("family ", 0) != 0) fail("expected 'family <label>'");
  std::string label = line.substr(7);
  if (label.empty() || label.find(' ') != std::string::npos)
    fail("bad family label");

  line = next_line(in, lineno);
  std::istringstream bs(line);
  std::string word;
  int n = 0;
  if (!(bs >> word >> n) || word != "base" || !(bs >> std::ws).eof())
    fail("expected 'base <n>'");

  line = next_line(in, lineno);
  std::istringstream fs(line);
  std::size_t m = 0;
  if (!(fs >> word >> m) || word != "functions" || !(fs >> std::ws).eof())
    fail("expected 'functions <m>'");

  std::vector<Mask> fns;
  fns.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    line = next_line(in, lineno);
    Mask v = 0;
    try {
      v = parse_function_string(line, n);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (!fns.empty() && v <= fns.back())
      fail(v == fns.back() ? "duplicate function" : "functions not ascending");
    fns.push_back(v);
  }
  std::string extra;
  if (std::getline(in, extra) && !extra.empty())
    throw std::runtime_error(".fam: trailing content after function list");
  return Family(n, std::move(fns), label == "unnamed" ? "" : label);
}

}  // namespace ucs
