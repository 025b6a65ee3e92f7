#include <doctest.h>

#include "teamq/syntax.hpp"

using namespace teamq;

namespace {

Formula p(const char* s) { return parse_formula(s); }

}  // namespace

TEST_CASE("parsing the grammar") {
  auto f = p("(E x/{y}) P(x)");
  REQUIRE(f->kind == NodeKind::quant);
  CHECK(f->quant == QuantKind::exists);
  CHECK(f->var == "x");
  CHECK(f->slash == VarSet{"y"});
  CHECK_FALSE(f->backslash);
  CHECK(f->body()->relation == "P");

  auto most = p("(Q.most x (Q.most y/{x}) R(x,y))");
  REQUIRE(most->body()->kind == NodeKind::quant);
  CHECK(most->qname == "most");
  CHECK(most->body()->slash == VarSet{"x"});

  auto d = p("(P(x) | /{x} Q(x))");
  CHECK(d->kind == NodeKind::disj);
  CHECK(d->slash == VarSet{"x"});

  auto dep = p("(E y\\{x}) R(x,y)");
  CHECK(dep->backslash);
  CHECK(dep->slash == VarSet{"x"});

  auto lits = p("((x != #c & ~P(y)) | (TQ.most_functions z) z = z)");
  CHECK(lits->kind == NodeKind::disj);
}

TEST_CASE("printing is canonical and parses back") {
  for (const char* s : {"(E x/{y}) P(x)", "(Q.most x (Q.most y/{x}) R(x,y))", "(P(x) | /{x} Q(x))",
                        "(A x (E y/{x,z}) (R(x,y) & /{w} ~P(#c)))", "(E y\\{x}) (x = y | x != y)",
                        "(TQ.liftE_exactly2 x/{y}) P(x)"}) {
    auto f = p(s);
    CHECK(equal(parse_formula(print(f)), f));
    CHECK(print(parse_formula(print(f))) == print(f));
  }
}

TEST_CASE("syntax errors carry a position") {
  CHECK_THROWS_AS(p("(E x P(x)"), SyntaxError);
  CHECK_THROWS_AS(p("P(x) &"), SyntaxError);
  CHECK_THROWS_AS(p("(E x/{y P(x))"), SyntaxError);
  try {
    p("(P(x) ^ P(y))");
    FAIL("no error");
  } catch (const SyntaxError& e) {
    CHECK(e.position() > 0);
  }
}

TEST_CASE("free variables") {
  CHECK(free_variables(p("(E z (E y/{x}) R(y,z))")) == VarSet{"x"});
  CHECK(free_variables(p("R(x,y)")) == VarSet{"x", "y"});
  CHECK(free_variables(p("(P(x) | /{w} P(y))")) == VarSet{"x", "y", "w"});
  CHECK(free_variables(p("(E x P(#c))")).empty());
}

TEST_CASE("substitution") {
  CHECK(equal(substitute(p("P(x)"), "x", "z"), p("P(z)")));
  CHECK(equal(substitute(p("(E x P(x))"), "x", "z"), p("(E x P(x))")));
  CHECK(equal(substitute(p("(E y/{x}) R(x,y)"), "x", "z"), p("(E y/{z}) R(z,y)")));
  CHECK_THROWS_AS(substitute(p("(P(x) & P(z))"), "x", "z"), std::invalid_argument);
}

TEST_CASE("slash_all and slash_nonempty") {
  CHECK(equal(slash_all(p("(E y P(y))"), {"v"}), p("(E y/{v}) P(y)")));
  CHECK(equal(slash_nonempty(p("(E y P(y))"), {"v"}), p("(E y P(y))")));
  CHECK(equal(slash_nonempty(p("((E y/{x}) P(y) | Q(z))"), {"v"}), p("((E y/{x,v}) P(y) | Q(z))")));
  CHECK(equal(slash_all(p("(P(x) & Q(x))"), {"v"}), p("(P(x) & /{v} Q(x))")));
  // Dependence sets are not slash sets.
  CHECK(equal(slash_all(p("(E y\\{x}) P(y)"), {"v"}), p("(E y\\{x}) P(y)")));
  CHECK(equal(unslash(p("(E y/{v,x}) P(y)"), "v"), p("(E y/{x}) P(y)")));
}

TEST_CASE("slash_all and slash_nonempty differ exactly on empty slash sets") {
  auto f = p("(A x ((E y/{x}) R(x,y) | (E z P(z))))");
  auto all = slash_all(f, {"v"});
  auto nonempty = slash_nonempty(f, {"v"});
  CHECK(print(all) == "(A x/{v}) ((E y/{v,x}) R(x,y) | /{v} (E z/{v}) P(z))");
  CHECK(print(nonempty) == "(A x) ((E y/{v,x}) R(x,y) | (E z) P(z))");
}

TEST_CASE("occurrences by path") {
  auto f = p("(A x (P(x) & (E y R(x,y))))");
  CHECK(equal(subformula_at(f, {0, 1}), p("(E y R(x,y))")));
  CHECK(equal(replace_occurrence(f, {0, 0}, p("x = x")), p("(A x (x = x & (E y R(x,y))))")));
  CHECK(equal(replace_occurrence(f, {}, p("P(z)")), p("P(z)")));
  CHECK_THROWS(subformula_at(f, {1}));
  CHECK(print_path({0, 1}) == "[0,1]");
}

TEST_CASE("regularity and prenex form") {
  auto f = p("(E x P(x))");
  CHECK(is_regular(f));
  CHECK(is_strongly_regular(f));
  CHECK(is_prenex(f));
  CHECK_FALSE(is_regular(p("(E x (E x P(x)))")));
  CHECK_FALSE(is_regular(p("(P(x) & (E x Q(x)))")));
  CHECK(is_regular(p("((E x P(x)) & (E x Q(x)))")));
  CHECK_FALSE(is_strongly_regular(p("((E x P(x)) & (E x Q(x)))")));
  CHECK_FALSE(is_prenex(p("(P(y) & (E x Q(x)))")));
  CHECK(is_prenex(p("(A x (E y/{x}) (P(x) | /{x} R(x,y)))")));
}

TEST_CASE("fragment predicates") {
  CHECK(is_first_order(p("(A x (Q.most y R(x,y)))")));
  CHECK_FALSE(is_first_order(p("(A x (E y/{x}) R(x,y))")));
  CHECK_FALSE(is_first_order(p("(P(x) & /{y} P(y))")));
  CHECK(is_plain_first_order(p("(A x (E y R(x,y)))")));
  CHECK_FALSE(is_plain_first_order(p("(Q.most y P(y))")));
  CHECK(has_team_quantifier(p("(E x (TQ.hat_exists y R(x,y)))")));
  CHECK(has_backslash(p("(E y\\{x}) R(x,y)")));
  CHECK(is_sentence(p("(A x (E y R(x,y)))")));
  CHECK_FALSE(is_sentence(p("(A x (E y/{z}) R(x,y))")));
}

TEST_CASE("signature and prefix split") {
  auto f = p("(A x (E y (R(x,y) & P(#c))))");
  auto sig = signature_of(f);
  CHECK(sig.relations == std::map<std::string, std::size_t>{{"P", 1}, {"R", 2}});
  CHECK(sig.constants == std::set<std::string>{"c"});
  auto split = split_prefix(f);
  CHECK(split.prefix.size() == 2);
  CHECK(split.matrix->kind == NodeKind::conj);
  CHECK_THROWS(signature_of(p("(P(x) & P(x,y))")));
}
