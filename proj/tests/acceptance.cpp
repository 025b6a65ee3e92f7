// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance              all criteria
//   acceptance --criterion N

#include <chrono>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teamq/verify.hpp"

using namespace teamq;

namespace {

const Registry& reg() {
  static Registry r;
  return r;
}

SuiteOptions opts(std::size_t formulas) {
  SuiteOptions o;
  o.formulas = formulas;
  return o;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  // `v` should hold.
  void need(const std::string& label, const Verdict& v) {
    lines.push_back(report(label, v));
    pass = pass && v.holds;
  }
  // `v` should fail, i.e. a witness should be found.
  void need_witness(const std::string& label, const Verdict& v) {
    lines.push_back(report(label, v));
    if (v.holds) lines.push_back("no witness found\n");
    pass = pass && !v.holds;
  }
};

const std::vector<std::string> mixed{"E", "A", "Q.exactly2", "Q.atleast2", "Q.most"};

Outcome c1() {
  Outcome o;
  o.need("downward_closure", suite_downward_closure(reg(), mixed, opts(200)));
  return o;
}

Outcome c2() {
  Outcome o;
  o.need("empty_team", suite_empty_team(reg(), mixed, opts(200)));
  return o;
}

Outcome c3() {
  Outcome o;
  o.need("locality_DF", suite_locality_DF(reg(), mixed, opts(200)));
  return o;
}

Outcome c4() {
  Outcome o;
  o.need_witness("nonlocality_IF", suite_nonlocality_witness(reg(), {"E", "A"}, true, opts(200)));
  o.need_witness("nonlocality_most_functions",
                 suite_nonlocality_witness(reg(), {"E", "A", "TQ.most_functions"}, false, opts(200)));
  return o;
}

// Cross-check: translated side evaluated with meaning sets materialized (no witness search).
SuiteOptions lift_cross_opts() {
  auto s = opts(30);
  s.bounds.max_rows = 3;
  s.translated_strategy = Strategy::downward_closed;
  return s;
}

Outcome c5() {
  Outcome o;
  for (const char* q : {"exactly3", "atleast2", "most"})
    o.need(std::string("lift_E_") + q, suite_lift_E(reg(), q, opts(100)));
  o.need("lift_E_most (dc strategy)", suite_lift_E(reg(), "most", lift_cross_opts()));
  return o;
}

Outcome c6() {
  Outcome o;
  for (const char* q : {"exactly3", "atleast2", "most"})
    o.need(std::string("lift_B_") + q, suite_lift_B(reg(), q, opts(100)));
  o.need("lift_B_most (dc strategy)", suite_lift_B(reg(), "most", lift_cross_opts()));
  return o;
}

Outcome c7() {
  Outcome o;
  for (const char* q : {"atleast2", "most"})
    o.need(std::string("bounded_agreement_") + q, suite_monotone_bounded_agreement(reg(), q, opts(100)));
  o.need_witness("bounded_agreement_exactly2", suite_monotone_bounded_agreement(reg(), "exactly2", opts(100)));
  return o;
}

Outcome c8() {
  Outcome o;
  o.need("conservativity_atleast2", suite_flat_conservativity(reg(), "atleast2", opts(200)));
  o.need_witness("conservativity_exactly2", suite_flat_conservativity(reg(), "exactly2", opts(200)));
  return o;
}

Outcome c9() {
  Outcome o;
  for (const auto& r : rewrite_soundness(reg(), 50, opts(0))) {
    bool enough = r.instances >= 50;
    o.lines.push_back("RULE " + r.rule + " instances=" + std::to_string(r.instances) + " " +
                      (r.verdict.holds ? "HOLDS" : "FAILS") + (enough ? "" : " (too few instances)") + "\n");
    if (!r.verdict.holds) o.lines.push_back(report(r.rule, r.verdict));
    o.pass = o.pass && r.verdict.holds && enough;
  }
  return o;
}

Outcome c10() {
  Outcome o;
  o.need_witness("bounded_swap_exactly1", suite_bounded_swap_failure(reg(), "exactly1"));
  return o;
}

Outcome c11() {
  Outcome o;
  o.need("hat_agreement", suite_hat_agreement(reg(), opts(100)));
  return o;
}

Outcome c12() {
  Outcome o;
  o.need("strict_count_functions2", suite_logicality(reg(), "count_functions2", 2, 2));
  o.need("strict_count_functions3", suite_logicality(reg(), "count_functions3", 2, 2));
  o.need_witness("strict_liftE_exactly3", suite_logicality(reg(), "liftE_exactly3", 2, 2));
  // Supplementary: a lift whose Q is nontrivial on |M| = 2.
  auto e1 = suite_logicality(reg(), "liftE_exactly1", 2, 2);
  o.lines.push_back(report("strict_liftE_exactly1 (supplementary)", e1));
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"downward closure", c1},
    {"empty team property", c2},
    {"locality of DF including exactly2", c3},
    {"non-locality witnesses (IF, most_functions)", c4},
    {"lift_E equivalence", c5},
    {"lift_B equivalence (uniform)", c6},
    {"monotone agreement of team and bounded clauses", c7},
    {"flat monotone conservativity", c8},
    {"rewrite soundness", c9},
    {"bounded swap failure", c10},
    {"hat_exists / hat_forall agreement", c11},
    {"logicality classifier", c12},
};

bool run(std::size_t n) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = criteria[n - 1].second();
  } catch (const std::exception& e) {
    o.pass = false;
    o.lines.push_back(std::string("error: ") + e.what() + "\n");
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& l : o.lines) std::cout << "  " << l;
  std::cout << "CRITERION " << n << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << criteria[n - 1].first << " ("
            << static_cast<long>(secs) << "s)" << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::size_t only = 0;
  app.add_option("--criterion", only, "run one criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  bool ok = true;
  if (only) return run(only) ? 0 : 1;
  for (std::size_t n = 1; n <= criteria.size(); ++n) ok = run(n) && ok;
  return ok ? 0 : 1;
}
