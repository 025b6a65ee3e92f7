#include <doctest.h>

#include "teamq/rewrite.hpp"
#include "teamq/verify.hpp"

using namespace teamq;

namespace {

Formula p(const char* s) { return parse_formula(s); }

const Registry& reg() {
  static Registry r;
  return r;
}

RewriteContext ctx(bool bounded = false) {
  RewriteContext c;
  c.registry = &reg();
  c.bounded = bounded;
  return c;
}

SearchBounds small() {
  SearchBounds b;
  b.size = 3;
  b.max_rows = 4;
  b.max_teams = 64;
  return b;
}

void check_sound(const RewriteStep& s) {
  for (const auto& v : s.z) {
    CHECK_FALSE(free_variables(s.before).count(v));
    CHECK_FALSE(free_variables(s.result).count(v));
  }
  auto v = z_equivalent(s.before, s.result, s.z, reg(), small());
  CHECK_MESSAGE(v.holds, print_step(s) << " " << print(s.before) << " => " << print(s.result));
}

}  // namespace

TEST_CASE("weak extraction") {
  auto s = weak_extract(p("((E x P(x)) | P(y))"), {}, ctx());
  CHECK(print(s.result) == "(E x) (P(x) | /{x} P(y))");
  CHECK(s.z == VarSet{"x"});
  CHECK(print_step(s) == "RULE weak_extract AT [] Z={x}");
  check_sound(s);

  auto q = weak_extract(p("((Q.most x P(x)) | P(y))"), {}, ctx());
  CHECK(q.result->qname == "most");
  check_sound(q);
  // exactly(3)^M is empty below size 3.
  CHECK_THROWS_AS(weak_extract(p("((Q.exactly3 x P(x)) | P(y))"), {}, ctx()), RewriteError);

  // The quantifier may sit on the right.
  check_sound(weak_extract(p("(P(y) | (A x R(x,y)))"), {}, ctx()));
  CHECK_THROWS_AS(weak_extract(p("((E x P(x)) | P(x))"), {}, ctx()), RewriteError);
  CHECK_THROWS_AS(weak_extract(p("(P(x) | P(y))"), {}, ctx()), RewriteError);
}

TEST_CASE("conjunction extraction is oracle-only and needs emptyset-free quantifiers") {
  auto s = and_extract(p("((E x P(x)) & P(y))"), {}, ctx());
  CHECK(s.oracle_only);
  check_sound(s);
  check_sound(and_extract(p("((Q.atleast2 x R(x,y)) & ~P(y))"), {}, ctx()));
  CHECK_THROWS_AS(and_extract(p("((Q.atmost1 x P(x)) & P(y))"), {}, ctx()), RewriteError);
}

TEST_CASE("renaming") {
  auto a = rename_bound_a(p("(E x P(x))"), {}, "z");
  CHECK(equal(a.result, p("(E z P(z))")));
  CHECK(a.z == VarSet{"x", "z"});
  check_sound(a);
  check_sound(rename_bound_a(p("(Q.most x (E y/{x}) R(x,y))"), {}, "u"));
  auto b = rename_bound_b(p("(A x (E y/{x}) R(x,y))"), {}, "z");
  CHECK(b.z == VarSet{"z"});
  check_sound(b);
  CHECK_THROWS_AS(rename_bound_a(p("(E x P(z))"), {}, "z"), RewriteError);
  CHECK_THROWS_AS(rename_bound_a(p("(E x/{x}) P(x)"), {}, "u"), RewriteError);
}

TEST_CASE("strong regularization") {
  auto f = p("((E x P(x)) & (E x ~P(x)))");
  auto r = strong_regularize(f);
  CHECK(is_strongly_regular(r.formula));
  for (const auto& v : bound_variables(r.formula)) CHECK_FALSE(bound_variables(f).count(v));
  CHECK(z_equivalent(f, r.formula, r.z, reg(), small()).holds);
  auto g = p("P(x)");
  CHECK(equal(strong_regularize(g).formula, g));
  auto h = p("(A x (E y/{x}) (R(x,y) | (E x P(x))))");
  auto rh = strong_regularize(h);
  CHECK(is_strongly_regular(rh.formula));
  CHECK(z_equivalent(h, rh.formula, rh.z, reg(), small()).holds);
}

TEST_CASE("slash elimination") {
  auto r = slash_elim_R(p("(Q.most v (P(v) | /{v} P(y)))"), {});
  CHECK(equal(r.result, p("(Q.most v (P(v) | P(y)))")));
  check_sound(r);
  check_sound(slash_elim_exists(p("(E v/{y}) (P(v) | /{v,y} R(y,y))"), {}));
  check_sound(slash_elim_forall(p("(A v (R(v,y) | /{v} (E u/{v}) P(u)))"), {}));
  CHECK_THROWS_AS(slash_elim_R(p("(Q.most v (P(v) | P(y)))"), {}), RewriteError);
  CHECK_THROWS_AS(slash_elim_exists(p("(E v/{y}) (P(v) | /{v,w} P(y))"), {}), RewriteError);
}

TEST_CASE("verticalization") {
  auto s = verticalize(slash_all(p("(E u (A w) R(u,w))"), {"v"}), {}, "v");
  CHECK(s.z.empty());
  check_sound(s);
  auto back = deverticalize(s.result, {}, "v");
  CHECK(equal(back.before, s.result));
  check_sound(back);
  CHECK_THROWS_AS(verticalize(p("(E v P(v))"), {}, "v"), RewriteError);
}

TEST_CASE("strong extraction") {
  auto s = strong_extract(p("((A x R(x,y)) | P(y))"), {}, ctx());
  CHECK(s.z.empty());
  check_sound(s);
  auto q = strong_extract(p("((Q.most x P(x)) | (E y/{z}) R(y,z))"), {}, ctx());
  CHECK(q.z == VarSet{"x"});
  check_sound(q);
  CHECK_THROWS_AS(strong_extract(p("((E x P(x)) | P(x))"), {}, ctx()), RewriteError);
}

TEST_CASE("swapping independent quantifiers") {
  auto s = swap_quantifiers(p("(Q.atleast2 u (Q.atleast2 v/{u}) R(u,v))"), {}, ctx());
  CHECK(equal(s.result, p("(Q.atleast2 v (Q.atleast2 u/{v}) R(u,v))")));
  CHECK(s.z == VarSet{"u", "v"});
  check_sound(s);
  check_sound(swap_quantifiers(p("(E v (Q.exactly3 u/{v}) R(u,v))"), {}, ctx()));
  // Not emptyset-free.
  CHECK_THROWS_AS(swap_quantifiers(p("(Q.atmost1 u (Q.atleast2 v/{u}) R(u,v))"), {}, ctx()), RewriteError);
  // Inner slash set lacks the outer variable.
  CHECK_THROWS_AS(swap_quantifiers(p("(Q.atleast2 u (Q.atleast2 v) R(u,v))"), {}, ctx()), RewriteError);
  CHECK_THROWS_AS(swap_quantifiers(p("(Q.exactly1 u (E v/{u}) R(u,v))"), {}, ctx(true)), RewriteError);
}

TEST_CASE("dropping slash sets") {
  auto e = drop_existential_slashes(p("(E x (E y/{x}) R(x,y))"), {0});
  CHECK(equal(e.result, p("(E x (E y R(x,y)))")));
  check_sound(e);
  CHECK_THROWS_AS(drop_existential_slashes(p("(A x (E y/{x}) R(x,y))"), {0}), RewriteError);
  CHECK_THROWS_AS(drop_existential_slashes(p("(Q.most x (E y/{x}) R(x,y))"), {0}), RewriteError);

  auto u = drop_universal_slashes(p("(A x/{y}) P(x)"), {});
  CHECK(equal(u.result, p("(A x P(x))")));
  check_sound(u);
  check_sound(drop_universal_slashes(p("(E y (P(y) & /{y} (A x/{y}) R(x,y)))"), {0}));
}

TEST_CASE("modulus must avoid free variables") {
  // Renaming x to y would capture the free y.
  CHECK_THROWS_AS(rename_bound_a(p("(R(y,y) & (E x P(x)))"), {1}, "y"), RewriteError);
  // A variable bound above the occurrence cannot be used as a modulus.
  CHECK_THROWS_AS(weak_extract(p("(E y ((E y P(y)) | P(x)))"), {0}, ctx()), RewriteError);
}

TEST_CASE("rule dispatch and applicable rules") {
  auto f = p("((E x P(x)) | P(y))");
  auto s = apply_rule("weak_extract", f, {}, ctx());
  CHECK(s.rule == "weak_extract");
  CHECK_THROWS_AS(apply_rule("nonsense", f, {}, ctx()), RewriteError);
  CHECK_THROWS_AS(apply_rule("rename_a", f, {0}, ctx()), RewriteError);
  bool found = false;
  for (const auto& st : applicable_rules(f, ctx())) found = found || st.rule == "strong_extract";
  CHECK(found);
  CHECK(rule_names().size() == 13);
}

TEST_CASE("prenex normal form") {
  auto f = p("((E x P(x)) | (E y ~P(y)))");
  auto r = prenexify(f, ctx());
  CHECK(is_prenex(r.formula));
  CHECK(is_strongly_regular(r.formula));
  CHECK(split_prefix(r.formula).prefix.size() == 2);
  CHECK(sentence_equivalent(f, r.formula, reg(), small()).holds);
  CHECK(z_equivalent(f, r.formula, {}, reg(), small()).holds);

  auto already = p("(A v1 (E v2/{v1}) R(v1,v2))");
  CHECK(equal(prenexify(already, ctx()).formula, already));

  auto mixed = p("((Q.most x P(x)) | /{z} (A y (E z R(y,z))))");
  auto rm = prenexify(mixed, ctx());
  CHECK(is_prenex(rm.formula));
  CHECK(z_equivalent(mixed, rm.formula, rm.z, reg(), small()).holds);

  auto conj = p("((E x P(x)) & (A y R(y,y)))");
  auto rc = prenexify(conj, ctx());
  CHECK(is_prenex(rc.formula));
  CHECK(sentence_equivalent(conj, rc.formula, reg(), small()).holds);

  CHECK_THROWS_AS(prenexify(p("(TQ.hat_exists x P(x))"), ctx()), RewriteError);
}

TEST_CASE("primality reduction") {
  auto stuck = primality_reduce(p("(A x (E y/{x}) R(x,y))"), ctx());
  CHECK_FALSE(stuck.reduced);

  auto e = primality_reduce(p("(E x (E y/{x}) R(x,y))"), ctx());
  REQUIRE(e.reduced);
  CHECK(equal(e.formula, p("(E x (E y R(x,y)))")));
  CHECK(e.steps.size() == 1);

  auto plain = p("(A x (E y R(x,y)))");
  auto t = primality_reduce(plain, ctx());
  CHECK(t.reduced);
  CHECK(t.steps.empty());
  CHECK(equal(t.formula, plain));

  // Swap first, then drop.
  auto sw = primality_reduce(p("(Q.atleast2 u (E v/{u}) R(u,v))"), ctx());
  REQUIRE(sw.reduced);
  CHECK(sentence_equivalent(p("(Q.atleast2 u (E v/{u}) R(u,v))"), sw.formula, reg(), small()).holds);

  CHECK_THROWS_AS(primality_reduce(p("(E y/{x}) R(x,y)"), ctx()), RewriteError);
}

TEST_CASE("paths") {
  CHECK(parse_path("").empty());
  CHECK(parse_path("0.1") == Path{0, 1});
  CHECK(parse_path("[0,1]") == Path{0, 1});
  CHECK(parse_path("[]").empty());
  CHECK_THROWS(parse_path("0.x"));
  CHECK_THROWS_AS(weak_extract(p("P(x)"), {0, 0}, ctx()), RewriteError);
}
