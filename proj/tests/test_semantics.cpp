#include <doctest.h>

#include "teamq/semantics.hpp"
#include "teamq/verify.hpp"

using namespace teamq;

namespace {

Formula p(const char* s) { return parse_formula(s); }

Structure with_p(std::size_t n, std::initializer_list<const char*> ps) {
  std::string text = "domain:";
  for (std::size_t i = 0; i < n; ++i) text += " " + default_element_name(i);
  text += "\nrel P/1:";
  for (auto a : ps) text += std::string(" ") + a;
  return parse_structure(text + "\n");
}

const Registry& reg() {
  static Registry r;
  return r;
}

EvalConfig with(Strategy s) {
  EvalConfig c;
  c.strategy = s;
  return c;
}

}  // namespace

TEST_CASE("Tarskian semantics with Mostowski quantifiers") {
  CHECK(eval_tarski(with_p(2, {"a"}), {}, p("(E x P(x))"), reg()));
  CHECK_FALSE(eval_tarski(with_p(2, {}), {}, p("(E x P(x))"), reg()));
  CHECK(eval_tarski(with_p(4, {"a", "b", "c"}), {}, p("(Q.exactly3 x P(x))"), reg()));
  CHECK_FALSE(eval_tarski(with_p(4, {"a", "b", "c", "d"}), {}, p("(Q.exactly3 x P(x))"), reg()));
  CHECK(eval_tarski(with_p(4, {"a", "b"}), {}, p("(Q.most x P(x))"), reg()));
  CHECK_THROWS_AS(eval_tarski(with_p(2, {}), {}, p("(E x/{y}) P(x)"), reg()), EvalError);
}

TEST_CASE("Engström clause on sentences") {
  CHECK(eval_team(with_p(4, {"a", "b", "c"}), Team::unit(), p("(Q.exactly3 x P(x))"), reg()));
  // The team clause reads exactly3 as "at least three".
  CHECK(eval_team(with_p(4, {"a", "b", "c", "d"}), Team::unit(), p("(Q.exactly3 x P(x))"), reg()));
  CHECK_FALSE(eval_team(with_p(4, {"a", "b"}), Team::unit(), p("(Q.exactly3 x P(x))"), reg()));
  for (const char* psi : {"P(x)", "~P(x)", "x = x", "(P(x) & ~P(x))"})
    for (std::size_t n = 1; n <= 3; ++n) {
      auto f = make_quant(QuantKind::mostowski, "x", p(psi), {}, "atmost2");
      CHECK(eval_team(with_p(n, {"a"}), Team::unit(), f, reg()));
    }
  Registry r;
  r.load_config("extensional Qa @size2 = {a}\n");
  CHECK(eval_team(with_p(2, {}), Team::unit(), p("(Q.Qa x x = x)"), r));
}

TEST_CASE("empty team property") {
  auto m = with_p(3, {"a"});
  Team empty({"x"}, {});
  for (const char* f : {"P(x)", "(E y/{x}) x = y", "(A y (Q.exactly2 z/{y}) (R(x,z) | P(y)))", "(P(x) | /{x} ~P(x))"}) {
    auto g = p(f);
    auto s = parse_structure("domain: a b c\nrel P/1: a\nrel R/2: (a,b)\n");
    CHECK(eval_team(s, empty, g, reg()));
  }
  CHECK(eval_team(m, empty, p("x != x"), reg()));
}

TEST_CASE("IF signalling and slashed quantifiers") {
  auto m = anonymous_structure(2);
  auto f = p("(A x (E y/{x}) x = y)");
  CHECK_FALSE(eval_team(m, Team::unit(), f, reg()));
  CHECK(eval_team(anonymous_structure(1), Team::unit(), f, reg()));
  // With z copying x, y may depend on z instead.
  auto g = p("(A x (E z (x = z & (E y/{x}) x = y)))");
  CHECK(eval_team(m, Team::unit(), g, reg()));
}

TEST_CASE("strict and lax existentials agree") {
  EvalConfig strict;
  strict.mode = ExistsMode::strict;
  auto s = parse_structure("domain: a b c\nrel P/1: a b\nrel R/2: (a,b) (b,a) (c,c)\n");
  for (const char* f : {"(A x (E y/{x}) R(x,y))", "(A x (E y R(x,y)))", "(E x (P(x) | /{x} ~P(x)))",
                        "(A x (E y/{x}) (P(y) | R(x,y)))"}) {
    auto g = p(f);
    for (auto st : {Strategy::reference, Strategy::full}) {
      EvalConfig lax = with(st);
      EvalConfig str = strict;
      str.strategy = st;
      CHECK(eval_team(s, Team::unit(), g, reg(), lax) == eval_team(s, Team::unit(), g, reg(), str));
    }
  }
}

TEST_CASE("slashed disjunction needs W-uniform splits") {
  auto m = anonymous_structure(2);
  Team x({"x"}, {{0}, {1}});
  auto m1 = parse_structure("domain: a b\nrel P/1: a\n");
  CHECK(eval_team(m1, x, p("(P(x) | ~P(x))"), reg()));
  CHECK_FALSE(eval_team(m1, x, p("(P(x) | /{x} ~P(x))"), reg()));
  CHECK(eval_team(m, x, p("(x = x | /{x} x != x)"), reg()));
}

TEST_CASE("dependence sets") {
  auto m = anonymous_structure(2);
  Team x({"x", "z"}, {{0, 0}, {1, 1}});
  // y may depend on x only.
  CHECK(eval_team(m, x, p("(E y\\{x}) y = x"), reg()));
  CHECK(eval_team(m, x, p("(E y\\{z}) y = x"), reg()));
  Team y({"x", "z"}, {{0, 0}, {0, 1}});
  CHECK_FALSE(eval_team(m, y, p("(E y\\{x}) y = z"), reg()));
  CHECK(eval_team(m, y, p("(E y\\{z}) y = z"), reg()));
}

TEST_CASE("unsuitable teams are rejected") {
  CHECK_THROWS_AS(eval_team(anonymous_structure(2), Team::unit(), p("P(x)"), reg()), EvalError);
}

TEST_CASE("meaning sets") {
  auto m = with_p(2, {"a", "b"});
  Team one({"z"}, {{0}});
  auto ms = meaning_set(m, one, p("P(v)"), "v", {}, reg());
  CHECK(ms.functions.size() == 4);
  auto none = meaning_set(m, one, p("v != v"), "v", {}, reg());
  REQUIRE(none.functions.size() == 1);
  CHECK(none.functions[0][0].empty());
  auto empty = meaning_set(m, Team({"z"}, {}), p("P(v)"), "v", {}, reg());
  CHECK(empty.functions.size() == 1);

  auto small = with_p(3, {"a", "c"});
  auto init = sentence_initial_meaning(small, p("P(v)"), "v", reg());
  CHECK(init.size() == 4);
  for (auto s : init) CHECK(s.subset_of(Subset{0b101}));
  CHECK(sentence_initial_meaning(small, p("v = v"), "v", reg()).size() == 8);
}

TEST_CASE("team quantifiers") {
  auto m = with_p(3, {"a", "b"});
  CHECK(eval_team(m, Team::unit(), p("(TQ.hat_exists x P(x))"), reg()));
  CHECK_FALSE(eval_team(m, Team::unit(), p("(TQ.hat_forall x P(x))"), reg()));
  CHECK(eval_team(m, Team::unit(), p("(TQ.liftE_atleast2 x P(x))"), reg()));
  CHECK_FALSE(eval_team(m, Team::unit(), p("(TQ.liftE_exactly3 x P(x))"), reg()));
}

TEST_CASE("bounded clause") {
  auto m4 = with_p(4, {"a", "b", "c", "d"});
  auto f = p("(Q.exactly3 x P(x))");
  CHECK_FALSE(eval_bounded(m4, Team::unit(), f, reg()));
  CHECK(eval_bounded(with_p(4, {"a", "b", "c"}), Team::unit(), f, reg()));
  CHECK_FALSE(eval_team(m4, Team::unit(), p("(TQ.liftB_exactly3 x P(x))"), reg()));

  // First-order body: ⊨ᵇ agrees with the Mostowski reading row by row.
  auto s = parse_structure("domain: a b c\nrel R/2: (a,a) (a,b) (b,a) (b,b) (c,a)\n");
  Team x({"y"}, {{0}, {1}, {2}});
  auto g = p("(Q.exactly2 x R(y,x))");
  bool rows = true;
  for (const auto& a : x.assignments()) rows = rows && eval_tarski(s, a, g, reg());
  CHECK(eval_bounded(s, x, g, reg()) == rows);
  EvalConfig raw;
  raw.bounded = BoundedMode::raw;
  CHECK(eval_bounded(s, x, g, reg(), raw) == rows);
}

TEST_CASE("fast strategies agree with the literal clauses") {
  CorpusOptions c;
  c.quantifiers = {"E", "A", "Q.exactly2", "Q.atleast2", "Q.most", "TQ.liftE_exactly1", "TQ.liftB_most"};
  c.slashes = true;
  c.connective_slashes = true;
  c.depth = 3;
  auto corpus = generate_corpus(c, 40, 3);
  SearchBounds b;
  b.size = 2;
  b.max_rows = 3;
  b.max_teams = 16;
  std::size_t checked = 0;
  for (const auto& f : corpus) {
    for_each_structure(signature_of(f), b, [&](const Structure& m) {
      Evaluator ref(m, reg(), with(Strategy::reference));
      Evaluator dc(m, reg(), with(Strategy::downward_closed));
      Evaluator full(m, reg(), with(Strategy::full));
      std::mt19937_64 rng(checked);
      for (const auto& x : sample_teams(m, free_variables(f), b, rng)) {
        bool r;
        try {
          r = ref.satisfies(x, f);
        } catch (const GuardError&) {
          continue;  // literal 3-way split too large
        }
        CHECK_MESSAGE(dc.satisfies(x, f) == r, print(f));
        CHECK_MESSAGE(full.satisfies(x, f) == r, print(f));
        ++checked;
      }
    });
  }
  CHECK(checked > 500);
}

TEST_CASE("memo can be disabled without changing results") {
  auto s = parse_structure("domain: a b c\nrel R/2: (a,b) (b,c) (c,a)\n");
  auto f = p("(A x (Q.atleast2 y/{x}) (R(x,y) | /{x} (E z R(y,z))))");
  EvalConfig off;
  off.memo = false;
  Evaluator a(s, reg()), b(s, reg(), off);
  CHECK(a.satisfies(Team::unit(), f) == b.satisfies(Team::unit(), f));
  CHECK(b.memo_entries() == 0);
}
