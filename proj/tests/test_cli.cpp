#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "teamq/cli.hpp"

using namespace teamq;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / ("teamq_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

bool has(const Run& r, const std::string& s) { return r.out.find(s) != std::string::npos; }

}  // namespace

TEST_CASE("eval") {
  auto m3 = write_temp("m3.txt", "domain: a b c d\nrel P/1: a b c\n");
  auto m4 = write_temp("m4.txt", "domain: a b c d\nrel P/1: a b c d\n");
  auto r = run({"eval", "--structure", m3, "--expr", "(Q.exactly3 x P(x))"});
  CHECK(r.code == 0);
  CHECK(r.out == "RESULT true\n");
  auto b = run({"eval", "--structure", m4, "--expr", "(Q.exactly3 x P(x))", "--bounded"});
  CHECK(b.code == 1);
  CHECK(b.out == "RESULT false\n");
  CHECK(run({"eval", "--structure", m4, "--expr", "(Q.exactly3 x P(x))"}).code == 0);
  CHECK(run({"eval", "--structure", m4, "--expr", "(Q.exactly3 x P(x))", "--tarski"}).code == 1);

  auto team = write_temp("team.txt", "vars: x\nx=a\nx=d\n");
  CHECK(run({"eval", "--structure", m3, "--team", team, "--expr", "P(x)"}).code == 1);
  auto f = write_temp("f.txt", "(E y/{x}) P(y)\n");
  CHECK(run({"eval", "--structure", m3, "--team", team, "--formula", f}).code == 0);
}

TEST_CASE("input errors exit with 2") {
  auto m = write_temp("m2.txt", "domain: a b\n");
  auto r = run({"eval", "--structure", m, "--expr", "(Q.foo x x = x)"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"eval", "--structure", m, "--expr", "(E x"}).code == 2);
  CHECK(run({"eval", "--structure", "/nonexistent/file", "--expr", "x = x"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"check", "nonsense"}).code == 2);
}

TEST_CASE("meaning") {
  auto m = write_temp("mp.txt", "domain: a b\nrel P/1: a\n");
  auto r = run({"meaning", "--structure", m, "--expr", "(E v P(v))"});
  CHECK(r.code == 0);
  CHECK(has(r, "MEANING count=2"));
  CHECK(has(r, "INITIAL"));
}

TEST_CASE("equiv") {
  auto r = run({"equiv", "--expr", "(E x P(x))", "--expr2", "(A x P(x))"});
  CHECK(r.code == 1);
  CHECK(has(r, "RESULT false"));
  CHECK(has(r, "structure:"));
  auto s = run({"equiv", "--expr", "(A x/{y}) P(x)", "--expr2", "(A x P(x))", "--size", "2"});
  CHECK(s.code == 0);
  CHECK(has(s, "RESULT true"));
  auto z = run({"equiv", "--expr", "(E x P(x))", "--expr2", "(E z P(z))", "--modulus", "x,z", "--size", "2"});
  CHECK(z.code == 0);
}

TEST_CASE("rewrite, prenex and primality") {
  auto r = run({"rewrite", "--expr", "((E x P(x)) | P(y))", "--rule", "weak_extract", "--verify", "--size", "2"});
  CHECK(r.code == 0);
  CHECK(has(r, "RULE weak_extract AT [] Z={x}"));
  CHECK(has(r, "FORMULA (E x) (P(x) | /{x} P(y))"));
  auto l = run({"rewrite", "--expr", "((E x P(x)) | P(y))"});
  CHECK(has(l, "APPLICABLE RULE weak_extract"));
  CHECK(run({"rewrite", "--expr", "P(x)", "--rule", "weak_extract"}).code == 2);

  auto p = run({"prenex", "--expr", "((E x P(x)) | (E y ~P(y)))", "--verify", "--size", "2"});
  CHECK(p.code == 0);
  CHECK(has(p, "RULE rename_a"));
  CHECK(has(p, "RESULT true"));

  auto stuck = run({"primality", "--expr", "(A x (E y/{x}) R(x,y))"});
  CHECK(stuck.code == 1);
  auto ok = run({"primality", "--expr", "(E x (E y/{x}) R(x,y))"});
  CHECK(ok.code == 0);
  CHECK(has(ok, "RULE drop_existential AT [0]"));
}

TEST_CASE("check and qinfo") {
  auto c = run({"check", "empty_team", "--formulas", "5", "--size", "2"});
  CHECK(c.code == 0);
  CHECK(has(c, "SUITE empty_team HOLDS cases="));

  auto q = run({"qinfo", "exactly2", "--size", "3"});
  CHECK(q.code == 0);
  CHECK(has(q, "monotone false"));
  CHECK(has(q, "emptyset_free true"));
  auto t = run({"qinfo", "liftE_exactly1", "--size", "2"});
  CHECK(t.code == 0);
  CHECK(has(t, "QUANTIFIER liftE_exactly1 team size=2"));

  auto cfg = write_temp("q.cfg", "mostowski half = 2 * card(S) == card(M)\n");
  auto h = run({"qinfo", "half", "--size", "2", "--quantifiers", cfg});
  CHECK(h.code == 0);
  CHECK(has(h, "Q^M = {a} {b}"));
}
