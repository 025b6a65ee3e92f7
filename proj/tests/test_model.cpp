#include <doctest.h>

#include <random>

#include "teamq/model.hpp"

using namespace teamq;

namespace {

Structure two() { return parse_structure("domain: a b\n"); }

Team team_x(std::vector<Element> xs) {
  std::vector<Row> rows;
  for (auto a : xs) rows.push_back({a});
  return Team({"x"}, rows);
}

}  // namespace

TEST_CASE("structure and team text formats round-trip") {
  auto m = parse_structure("domain: a b c\nrel P/1: a b\nrel R/2: (a,b) (b,c)\nconst c0 = a\n");
  CHECK(m.size() == 3);
  CHECK(m.holds("R", {0, 1}));
  CHECK_FALSE(m.holds("R", {1, 0}));
  CHECK(m.constant("c0") == 0);
  CHECK(parse_structure(print_structure(m)) == m);

  auto x = parse_team("vars: x y\nx=a y=b\nx=c y=c\n", m);
  CHECK(x.size() == 2);
  CHECK(parse_team(print_team(x, m), m) == x);
  CHECK(parse_team(print_team(Team::unit(), m), m) == Team::unit());
  CHECK(parse_team("vars: x\n", m).empty());
}

TEST_CASE("malformed structures are rejected") {
  CHECK_THROWS_AS(parse_structure("rel P/1: a\n"), ModelError);
  CHECK_THROWS_AS(parse_structure("domain: a\nrel P/1: b\n"), ModelError);
  CHECK_THROWS_AS(parse_structure("domain: a a\n"), ModelError);
  CHECK_THROWS_AS(parse_structure("domain: a\nrel R/2: (a)\n"), ModelError);
}

TEST_CASE("duplicate") {
  auto m = two();
  CHECK(duplicate(Team({}, {}), m, "x").empty());
  CHECK(duplicate(Team::unit(), m, "x") == team_x({0, 1}));
  Team y({"y"}, {{0}});
  CHECK(duplicate(y, m, "y") == Team({"y"}, {{0}, {1}}));
}

TEST_CASE("supplement") {
  auto m = two();
  Team s = team_x({0});
  CHECK(supplement(s, SupplementFunction(s, {Subset{}}), "y").empty());
  CHECK(supplement(s, SupplementFunction(s, {Subset{3}}), "y") == Team({"x", "y"}, {{0, 0}, {0, 1}}));
  Team two_rows = team_x({0, 1});
  CHECK(supplement(two_rows, SupplementFunction(two_rows, {Subset::single(0), Subset{}}), "y") ==
        Team({"x", "y"}, {{0, 0}}));
  CHECK_THROWS_AS(SupplementFunction(two_rows, {Subset{}}), ModelError);
}

TEST_CASE("V-equivalence and uniformity") {
  Assignment s{{"x", 0}, {"y", 0}}, t{{"x", 0}, {"y", 1}};
  CHECK(v_equivalent(s, s, {}));
  CHECK(v_equivalent(s, t, {"y"}));
  CHECK_FALSE(v_equivalent(s, t, {}));

  Team x = team_x({0, 1});
  SupplementFunction f(x, {Subset::single(0), Subset::single(1)});
  CHECK(is_uniform(f, {}));
  CHECK_FALSE(is_uniform(f, {"x"}));
  Team one = team_x({0});
  CHECK(is_uniform(SupplementFunction(one, {Subset{1}}), {"x"}));
}

TEST_CASE("uniform classes") {
  Team x({"x", "y"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(uniform_classes(x, {}).size() == 4);
  CHECK(uniform_classes(x, {"x", "y"}).size() == 1);
  CHECK(uniform_classes(x, {"y"}).size() == 2);
}

TEST_CASE("uniform function enumeration") {
  std::vector<Subset> four{Subset{0}, Subset{1}, Subset{2}, Subset{3}};
  CHECK(enumerate_uniform_functions(team_x({0}), {}, four).size() == 4);
  CHECK(enumerate_uniform_functions(Team({"x"}, {}), {}, four).size() == 1);

  // Two classes, three candidates: filter every raw function by is_uniform.
  Team x({"x", "y"}, {{0, 0}, {0, 1}, {1, 0}});
  std::vector<Subset> three{Subset{1}, Subset{2}, Subset{3}};
  auto uniform = enumerate_uniform_functions(x, {"y"}, three);
  CHECK(uniform.size() == 9);
  std::size_t filtered = 0;
  for (auto a : three)
    for (auto b : three)
      for (auto c : three) {
        SupplementFunction f(x, {a, b, c});
        if (is_uniform(f, {"y"})) {
          ++filtered;
          CHECK(std::find(uniform.begin(), uniform.end(), f) != uniform.end());
        }
      }
  CHECK(filtered == 9);
}

TEST_CASE("uniform subsets") {
  Team x({"x", "y"}, {{0, 0}, {0, 1}});
  auto rows = x.assignments();
  CHECK(uniform_subset(rows, x, {"y"}));
  CHECK(uniform_subset({}, x, {"y"}));
  CHECK_FALSE(uniform_subset({rows[0]}, x, {"y"}));
  CHECK(uniform_subset({rows[0]}, x, {}));
}

TEST_CASE("restriction, drop, relation and renaming") {
  Team x({"x", "y"}, {{0, 0}, {0, 1}, {1, 1}});
  CHECK(restrict(x, {"x"}) == team_x({0, 1}));
  CHECK(drop(x, "y") == team_x({0, 1}));
  CHECK(relation_of(x, {"y", "x"}) == std::set<std::vector<Element>>{{0, 0}, {1, 0}, {1, 1}});
  CHECK(rename(x, "y", "z") == Team({"x", "z"}, {{0, 0}, {0, 1}, {1, 1}}));
}

TEST_CASE("v-expansions restrict back to the team") {
  auto m = two();
  Team x = team_x({0, 1});
  auto exps = v_expansions(x, "y", m);
  // Each row gets a nonempty set of y values: 3 * 3 expansions.
  CHECK(exps.size() == 9);
  for (const auto& e : exps) CHECK(restrict(e, {"x"}) == x);
}

TEST_CASE("duplication and supplementation invariants on random teams") {
  std::mt19937_64 rng(7);
  auto m = parse_structure("domain: a b c\n");
  for (int i = 0; i < 50; ++i) {
    std::vector<Row> rows;
    for (Element a = 0; a < 3; ++a)
      for (Element b = 0; b < 3; ++b)
        if (rng() % 2) rows.push_back({a, b});
    Team x({"x", "y"}, rows);
    Team d = duplicate(x, m, "z");
    CHECK(restrict(d, {"x", "y"}) == x);
    CHECK(d.size() <= x.size() * 3);
    std::vector<Subset> choices;
    for (std::size_t r = 0; r < x.size(); ++r) choices.push_back(Subset{static_cast<std::uint32_t>(rng() % 8)});
    Team s = supplement(x, SupplementFunction(x, choices), "z");
    for (const auto& a : s.assignments()) CHECK(d.contains(a));

    // ∼_V is an equivalence relation.
    auto as = x.assignments();
    if (as.size() >= 3) {
      VarSet v{"y"};
      CHECK(v_equivalent(as[0], as[0], v));
      CHECK(v_equivalent(as[0], as[1], v) == v_equivalent(as[1], as[0], v));
      if (v_equivalent(as[0], as[1], v) && v_equivalent(as[1], as[2], v)) CHECK(v_equivalent(as[0], as[2], v));
    }
  }
}
