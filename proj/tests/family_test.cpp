#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "ucs/family.hpp"

using namespace ucs;

namespace {

// Brute-force trace counter, independent of trace_values: collects f & s
// into a std::set.
std::size_t oracle_trace_count(const Family& f, Mask s) {
  std::set<Mask> seen;
  for (Mask fn : f.functions()) seen.insert(fn & s);
  return seen.size();
}

// Brute-force count of all distinct labeled samples (S, f|_S) of a family.
std::uint64_t oracle_partial_function_count(const Family& f) {
  std::set<std::pair<Mask, Mask>> seen;
  const Mask full = full_mask(f.base_size());
  for (Mask s = 0;; ++s) {
    for (Mask fn : f.functions()) seen.insert({s, fn & s});
    if (s == full) break;
  }
  return seen.size();
}

bool is_arc(Mask t) {  // three consecutive pentagon vertices
  for (int i = 0; i < 5; ++i) {
    Mask arc = (Mask{1} << i) | (Mask{1} << ((i + 1) % 5)) |
               (Mask{1} << ((i + 2) % 5));
    if (t == arc) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("builtin constructions") {
  Family c5 = make_builtin("c5");
  CHECK(c5.size() == 10);
  CHECK(c5.base_size() == 5);
  // Membership rule: f is a member iff it takes 1-0-0-1 on four consecutive
  // vertices.
  for (Mask f = 0; f < 32; ++f) {
    bool rule = false;
    for (int i = 0; i < 5 && !rule; ++i)
      rule = test_bit(f, i) && !test_bit(f, (i + 1) % 5) &&
             !test_bit(f, (i + 2) % 5) && test_bit(f, (i + 3) % 5);
    CHECK(c5.contains(f) == rule);
  }

  Family p3 = make_builtin("p:3");
  CHECK(p3.size() == 8);
  CHECK(p3.base_size() == 3);

  Family c4 = make_builtin("c4");
  CHECK(c4.base_size() == 4);
  CHECK(c4.size() == 9);

  Family w6 = make_builtin("w6");
  CHECK(w6.size() == 10);
  CHECK(w6.base_size() == 6);
  for (Mask f : w6.functions()) CHECK(popcount(f) == 3);

  Family c5m = make_builtin("c5-minus");
  CHECK(c5m.size() == 9);
  CHECK(!c5m.contains(0b01110));

  CHECK_THROWS_AS(make_builtin("c6"), std::invalid_argument);
  CHECK_THROWS_AS(make_builtin("p:0"), std::invalid_argument);
  CHECK_THROWS_AS(make_builtin("p:9"), std::invalid_argument);
}

TEST_CASE("join and power_join") {
  Family c5 = make_builtin("c5");
  Family j = join(c5, c5);
  CHECK(j.size() == 100);
  CHECK(j.base_size() == 10);

  // Restriction of the join to the first block gives back the left factor.
  Family back = restrict_to(j, full_mask(5));
  CHECK(back.functions() == c5.functions());

  Family p1 = make_builtin("p:1");
  Family p3 = make_builtin("p:3");
  CHECK(power_join(p1, 3).functions() == p3.functions());
  CHECK(power_join(c5, 1).functions() == c5.functions());
  CHECK(join(power_join(c5, 2), c5).functions() ==
        power_join(c5, 3).functions());

  // Join with a single-function family keeps the size.
  Family single(1, {1});
  CHECK(join(c5, single).size() == c5.size());

  CHECK(power_join(c5, 5).base_size() == 25);
  CHECK_THROWS_AS(power_join(c5, 6), std::invalid_argument);
}

TEST_CASE("restrict and remove") {
  Family c5 = make_builtin("c5");
  Family c4 = make_builtin("c4");
  CHECK(restrict_to(c5, 0b11011).functions() == c4.functions());
  CHECK(restrict_to(c5, full_mask(5)).functions() == c5.functions());
  CHECK(restrict_to(c5, 0b11011).size() == 9);
  CHECK_THROWS_AS(restrict_to(c5, 0), std::invalid_argument);

  Family c5m = remove_function(c5, BoolFunc{5, 0b01110});
  CHECK(c5m.functions() == make_builtin("c5-minus").functions());
  CHECK(c5m.size() == 9);
  CHECK_THROWS_AS(remove_function(c5, BoolFunc{5, 0}), std::invalid_argument);

  // Some 3-subset sees only 6 traces once the member is gone.
  bool some_six = false;
  for_each_combination(5, 3, [&](Mask t) {
    std::size_t count = oracle_trace_count(c5m, t);
    CHECK(traces(c5m, t).size() == count);
    if (count == 6) some_six = true;
  });
  CHECK(some_six);
}

TEST_CASE("traces") {
  Family c5 = make_builtin("c5");
  for_each_combination(5, 3, [&](Mask t) {
    auto tr = traces(c5, t);
    CHECK(tr.size() == 7);
    CHECK(tr.size() == oracle_trace_count(c5, t));
    bool has_zero = false, has_full = false;
    for (const auto& g : tr) {
      if (g.values == 0) has_zero = true;
      if (g.values == t) has_full = true;
    }
    // Arcs never produce the constant-0 trace, non-arcs never the
    // constant-1 trace.
    CHECK(has_zero == !is_arc(t));
    CHECK(has_full == is_arc(t));
  });

  auto empty = traces(c5, 0);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].values == 0);

  // Determinism: ascending by trace value.
  auto tr = traces(c5, 0b00111);
  for (std::size_t i = 1; i < tr.size(); ++i)
    CHECK(tr[i - 1].values < tr[i].values);

  // Join-structured families enumerate the same traces as a flat copy.
  Family j = join(c5, make_builtin("p:1"));
  Family flat(j.base_size(), j.functions());
  for (Mask s = 0; s <= full_mask(6); ++s) {
    std::vector<Mask> a, b;
    trace_values(j, s, a);
    trace_values(flat, s, b);
    CHECK(a == b);
  }
}

TEST_CASE("shattering and vc dimension") {
  Family c5 = make_builtin("c5");
  CHECK(shatters(c5, 0b00011));
  CHECK(!shatters(c5, 0b00111));
  CHECK(shatters(c5, 0));
  for_each_combination(5, 2, [&](Mask x) { CHECK(shatters(c5, x)); });
  for_each_combination(5, 3, [&](Mask x) { CHECK(!shatters(c5, x)); });

  CHECK(vc_dimension(c5) == 2);
  CHECK(vc_dimension(make_builtin("w6")) == 2);
  CHECK(vc_dimension(make_builtin("c4")) == 2);
  CHECK(vc_dimension(make_builtin("c5-minus")) == 2);
  CHECK(vc_dimension(make_builtin("p:4")) == 4);
  CHECK(vc_dimension(Family(3, {5})) == 0);

  // Additivity on joins of the small builtins.
  const char* names[] = {"c5", "c5-minus", "c4", "w6", "p:1", "p:2"};
  for (const char* a : names)
    for (const char* b : names) {
      Family fa = make_builtin(a), fb = make_builtin(b);
      if (fa.base_size() + fb.base_size() > 12) continue;
      CHECK(vc_dimension(join(fa, fb)) == vc_dimension(fa) + vc_dimension(fb));
    }

  // Monotonicity under restriction and under subfamilies.
  CHECK(vc_dimension(restrict_to(c5, 0b01011)) <= vc_dimension(c5));
  CHECK(vc_dimension(make_builtin("c5-minus")) <= vc_dimension(c5));
}

TEST_CASE("sauer-shelah bound") {
  CHECK(sauer_shelah_bound(5, 2) == 16);
  CHECK(sauer_shelah_bound(7, 0) == 1);
  CHECK(sauer_shelah_bound(4, 2) == 11);
  CHECK(make_builtin("c5").size() < sauer_shelah_bound(5, 2));
  for (const char* name : {"c5", "c5-minus", "c4", "w6", "p:3"}) {
    Family f = make_builtin(name);
    CHECK(f.size() <=
          sauer_shelah_bound(f.base_size(), vc_dimension(f)));
  }
  for (int k = 1; k <= 4; ++k) {
    Family p = make_builtin("p:" + std::to_string(k));
    CHECK(p.size() == sauer_shelah_bound(k, k));
  }
}

TEST_CASE("containment maximality") {
  Family c5 = make_builtin("c5");
  CHECK(is_containment_maximal(c5, 2));
  CHECK(is_containment_maximal(make_builtin("p:3"), 3));
  // Putting the deleted function back into c5-minus keeps the dimension at
  // two, so c5-minus is not maximal.
  CHECK(!is_containment_maximal(make_builtin("c5-minus"), 2));
  CHECK_THROWS_AS(is_containment_maximal(c5, 1), std::invalid_argument);
}

TEST_CASE("group action and invariance") {
  Family c5 = make_builtin("c5");
  std::vector<int> rot = {1, 2, 3, 4, 0};
  CHECK(permute_base(c5, rot).functions() == c5.functions());
  CHECK(flip_values(c5, 0).functions() == c5.functions());
  CHECK(vc_dimension(flip_values(c5, 0b00001)) == 2);

  Family w6 = make_builtin("w6");
  std::vector<int> perm6 = {2, 0, 1, 4, 5, 3};
  Mask flip = 0b010101;
  for (const Family& base : {c5, w6}) {
    std::vector<int> perm(base.base_size());
    for (int i = 0; i < base.base_size(); ++i)
      perm[i] = (i + 1) % base.base_size();
    Family img = flip_values(permute_base(base, perm), flip & full_mask(base.base_size()));
    CHECK(img.size() == base.size());
    CHECK(vc_dimension(img) == vc_dimension(base));
    CHECK(canonical_form(img) == canonical_form(base));
  }
  (void)perm6;

  CHECK_THROWS_AS(permute_base(c5, {0, 1, 2, 3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(permute_base(c5, {0, 1, 2}), std::invalid_argument);
}

TEST_CASE("canonical form") {
  Family c5 = make_builtin("c5");
  std::vector<int> rot = {1, 2, 3, 4, 0};
  CHECK(canonical_form(c5) == canonical_form(permute_base(c5, rot)));
  CHECK(canonical_form(c5) == canonical_form(flip_values(c5, 0b01000)));
  CHECK(canonical_form(c5) != canonical_form(make_builtin("c5-minus")));
  CHECK_THROWS_AS(canonical_form(join(c5, c5)), std::invalid_argument);
}

TEST_CASE("automorphisms, design, subfamily") {
  Family w6 = make_builtin("w6");
  CHECK(is_two_transitive(w6));
  CHECK(design_check(w6, 2));
  CHECK(!design_check(w6, 1));
  CHECK_THROWS_AS(design_check(make_builtin("c5"), 2), std::invalid_argument);

  // The pentagon rotations are automorphisms of c5.
  Family c5 = make_builtin("c5");
  auto auts = automorphisms(c5);
  CHECK(auts.size() == 10);  // dihedral group of the pentagon

  // c5 sits inside p:1 * c4 once the centre element is routed to the free
  // coordinate: base order there is (p:1 bit, then c4 on 0,1,3,4).
  Family pc = join(make_builtin("p:1"), make_builtin("c4"));
  std::vector<int> relabel = {1, 2, 0, 3, 4};
  CHECK(is_subfamily(permute_base(c5, relabel), Family(5, pc.functions())));

  // w6 restricted to the pentagon block is c5; blocks and block complements
  // are disjoint collections.
  CHECK(restrict_to(w6, 0b011111).functions() == c5.functions());
  std::set<Mask> blocks, complements;
  for (Mask f : w6.functions()) {
    blocks.insert(f);
    complements.insert(full_mask(6) & ~f);
  }
  for (Mask b : blocks) CHECK(complements.count(b) == 0);
}

TEST_CASE("fam file round trip and rejection") {
  Family p3 = make_builtin("p:3");
  std::ostringstream out;
  write_fam(out, p3);
  std::istringstream in(out.str());
  Family back = read_fam(in);
  CHECK(back.functions() == p3.functions());
  CHECK(back.base_size() == 3);
  std::ostringstream out2;
  write_fam(out2, back);
  CHECK(out.str() == out2.str());

  auto expect_reject = [](const std::string& text) {
    std::istringstream bad(text);
    CHECK_THROWS_AS(read_fam(bad), std::runtime_error);
  };
  expect_reject("family x\nbase 2\nfunctions 2\n01\n01\n");  // duplicate
  expect_reject("family x\nbase 2\nfunctions 3\n00\n01\n");  // short list
  expect_reject("family x\nbase 2\nfunctions 1\n0 1\n");     // stray space
  expect_reject("family x\nbase 2\nfunctions 1\n012\n");     // wrong length
  expect_reject("family x\nbase 2\nfunctions 1\n02\n");      // bad character
  expect_reject("family x\nbase 2\nfunctions 2\n01\n00\n");  // not ascending
}

TEST_CASE("partial function count oracle") {
  // Frozen totals used elsewhere: c5 has 176 labeled samples, the two-copy
  // join therefore 176^2.
  Family c5 = make_builtin("c5");
  CHECK(oracle_partial_function_count(c5) == 176);
  std::uint64_t total = 0;
  for (Mask s = 0; s <= full_mask(5); ++s) total += traces(c5, s).size();
  CHECK(total == 176);
}
