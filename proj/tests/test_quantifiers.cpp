#include <doctest.h>

#include "teamq/quantifiers.hpp"

using namespace teamq;

namespace {

Subset set_of(std::initializer_list<Element> es) {
  Subset s;
  for (auto e : es) s = s.with(e);
  return s;
}

// All values of one-row functions, as a family over a 1-row team.
FunctionFamily one_row(std::initializer_list<Subset> values) {
  FunctionFamily f{1, {}};
  for (auto v : values) f.functions.push_back({v});
  f.normalize();
  return f;
}

Team one_row_team() { return Team({"x"}, {{0}}); }

}  // namespace

TEST_CASE("localization") {
  auto m2 = anonymous_structure(2);
  CHECK(q_forall().localize(m2) == std::vector<Subset>{set_of({0, 1})});
  CHECK(q_exists().localize(m2) == std::vector<Subset>{set_of({0}), set_of({1}), set_of({0, 1})});
  auto three = q_exactly(3).localize(anonymous_structure(4));
  CHECK(three.size() == 4);
  for (auto s : three) CHECK(s.size() == 3);
  // card(S) ≥ card(M)/2
  CHECK(q_most().localize(anonymous_structure(3)).size() == 4);
  CHECK(q_trivial().localize(m2).size() == 4);
}

TEST_CASE("closure properties") {
  auto m3 = anonymous_structure(3);
  CHECK(is_monotone_on(q_exists(), m3));
  CHECK(is_union_closed_on(q_exists(), m3));
  CHECK(is_emptyset_free_on(q_exists(), m3));

  auto single = MostowskiQuantifier::extensional("only_a", {{3, {{"a"}}}});
  CHECK(is_union_closed_on(single, m3));
  CHECK_FALSE(is_monotone_on(single, m3));

  CHECK_FALSE(is_monotone_on(q_exactly(2), m3));
  CHECK_FALSE(is_union_closed_on(q_exactly(2), m3));
  CHECK_FALSE(is_emptyset_free_on(q_atmost(1), m3));
  CHECK_THROWS(is_monotone_on(q_exists(), anonymous_structure(7)));
}

TEST_CASE("monotone implies union-closed") {
  for (std::size_t n = 1; n <= 4; ++n) {
    auto m = anonymous_structure(n);
    for (const auto& q : {q_exists(), q_forall(), q_most(), q_atleast(2), q_exactly(1), q_atmost(2), q_trivial()})
      if (is_monotone_on(q, m)) CHECK(is_union_closed_on(q, m));
  }
}

TEST_CASE("existential lift") {
  auto m4 = anonymous_structure(4);
  auto e3 = lift_E(q_exactly(3));
  CHECK_FALSE(e3.accepts(m4, FunctionFamily{1, {}}));
  CHECK(lift_E(q_forall()).accepts(m4, one_row({Subset::full(4), set_of({0})})));
  FunctionFamily big{1, {}};
  for (auto s : all_functions(1, 4))
    if (s[0].size() >= 3) big.functions.push_back(s);
  CHECK(e3.accepts(m4, big));
  CHECK_FALSE(e3.accepts(m4, one_row({Subset::full(4)})));
}

TEST_CASE("bounded lifts") {
  auto m2 = anonymous_structure(2);
  auto b1 = lift_B(q_exactly(1));
  CHECK_FALSE(b1.accepts(m2, FunctionFamily{1, {}}));
  CHECK_FALSE(b1.accepts(m2, one_row({set_of({0}), set_of({0, 1})})));
  CHECK(b1.accepts(m2, one_row({set_of({0}), set_of({1})})));

  auto bp = lift_Bprime(q_exactly(1));
  CHECK_FALSE(bp.accepts(m2, FunctionFamily{1, {}}));
  CHECK(bp.accepts(m2, one_row({set_of({0}), set_of({1})})));
  CHECK_FALSE(bp.accepts(m2, one_row({set_of({0}), set_of({0, 1})})));

  // Monotone Q: B̂ and Ê agree on downward-closed families (meaning sets of
  // downward-closed formulas).
  auto all = all_functions(1, 2);
  for (std::uint32_t mask = 0; mask < 16; ++mask) {
    FunctionFamily f{1, {}};
    for (std::size_t i = 0; i < 4; ++i)
      if (mask >> i & 1) f.functions.push_back(all[i]);
    bool closed = true;
    for (const auto& g : f.functions)
      for (const auto& h : all)
        if (h[0].subset_of(g[0]) && !f.contains(h)) closed = false;
    if (!closed) continue;
    CHECK(lift_B(q_atleast(1)).accepts(m2, f) == lift_E(q_atleast(1)).accepts(m2, f));
  }
}

TEST_CASE("most_functions counts singleton-valued members") {
  auto m2 = anonymous_structure(2);
  auto most = most_functions();
  CHECK(most.accepts(m2, one_row({set_of({0}), set_of({1})})));
  CHECK(most.accepts(m2, one_row({set_of({0})})));
  CHECK_FALSE(most.accepts(m2, one_row({set_of({0, 1}), Subset{}})));
}

TEST_CASE("counting team quantifier") {
  auto m2 = anonymous_structure(2);
  auto c2 = hat_count_functions(2);
  CHECK(c2.accepts(m2, one_row({set_of({0}), set_of({1})})));
  CHECK(c2.accepts(m2, one_row({Subset{}, set_of({1})})));
  CHECK_FALSE(c2.accepts(m2, one_row({set_of({0})})));
  CHECK_FALSE(hat_count_functions(2, true).accepts(m2, one_row({Subset{}, set_of({1})})));
  // The only function on the empty team is the empty function, which is banned.
  CHECK_FALSE(hat_count_functions(1).accepts(m2, FunctionFamily{0, {{}}}));
}

TEST_CASE("team monotonicity") {
  auto m2 = anonymous_structure(2);
  auto x = one_row_team();
  CHECK(team_monotone_on(hat_exists(), m2, x).holds);
  CHECK_FALSE(team_monotone_on(hat_exactly_nm(1), m2, x).holds);
  CHECK(team_monotone_on(lift_E(q_exactly(1)), m2, x).holds);
  CHECK(team_monotone_on(lift_E(q_most()), m2, x).exhaustive);
}

TEST_CASE("permutation invariance") {
  auto m2 = anonymous_structure(2);
  Team both({"x"}, {{0}, {1}});
  CHECK(permutation_invariant_on(lift_E(q_exactly(1)), m2, both).holds);
  CHECK(permutation_invariant_on(hat_count_functions(2), m2, both).holds);
  auto only_a = MostowskiQuantifier::extensional("only_a", {{2, {{"a"}}}});
  CHECK_FALSE(permutation_invariant_on(lift_E(only_a), m2, both).holds);
}

TEST_CASE("cardinality and quality conditions") {
  auto m2 = anonymous_structure(2);
  for (const auto& x : {Team::unit(), one_row_team(), Team({"x"}, {{0}, {1}})}) {
    auto strict = cardinality_condition_on(hat_count_functions(2), m2, x);
    CHECK(strict.holds);
    CHECK(quality_condition_on(hat_count_functions(2), m2, x).holds);
    // strict ⇒ invariant
    CHECK(permutation_invariant_on(hat_count_functions(2), m2, x).holds);
  }
  // A nontrivial existential lift violates the strict condition.
  auto e1 = cardinality_condition_on(lift_E(q_exactly(1)), m2, one_row_team());
  CHECK_FALSE(e1.holds);
  CHECK_FALSE(e1.witness.empty());
}

TEST_CASE("registry names and configuration") {
  Registry reg;
  CHECK(reg.has_mostowski("exactly3"));
  CHECK(reg.has_mostowski("most"));
  CHECK(reg.has_team("liftE_atleast2"));
  CHECK(reg.has_team("count_functions3"));
  CHECK_FALSE(reg.has_mostowski("nonsense"));
  CHECK_THROWS_AS(reg.mostowski("nonsense"), QuantifierError);

  reg.load_config(
      "mostowski half = 2 * card(S) == card(M)\n"
      "extensional pick @size2 = {a}, {a,b}\n"
      "team liftE_half_alias = liftE(half)\n"
      "team three = count_functions(3, nonempty)\n");
  auto half = reg.mostowski("half");
  CHECK(half->localize(anonymous_structure(4)).size() == 6);
  CHECK(half->localize(anonymous_structure(3)).empty());
  CHECK(reg.mostowski("pick")->localize(2) == std::vector<Subset>{set_of({0}), set_of({0, 1})});
  CHECK(reg.has_team("liftE_half_alias"));
  CHECK(reg.has_team("three"));
  CHECK_THROWS_AS(reg.load_config("mostowski broken = card(S) >>= 1\n"), QuantifierError);
}

TEST_CASE("condition expressions") {
  auto p = parse_condition("card(S) + 1 > card(M) / 2");
  CHECK(p(1, 3));
  CHECK_FALSE(p(0, 4));
  CHECK(parse_condition("-(card(S)) <= 0")(5, 5));
}
