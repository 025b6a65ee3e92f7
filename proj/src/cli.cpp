#include "teamq/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "teamq/rewrite.hpp"
#include "teamq/semantics.hpp"
#include "teamq/verify.hpp"

namespace teamq {

namespace {

// Input problems: reported with exit status 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Options {
  std::string structure, team, formula, expr, formula2, expr2, quantifiers;
  bool strict = false;
  std::string bounded;
  std::string strategy;
  std::size_t size = 3, extra = 1, formulas = 200;
  std::uint64_t seed = 1;
  bool tarski = false;
  std::string modulus, rule, at, arg, suite, qname;
  bool verify = false;
};

void check_names(const Formula& f, const Registry& reg) {
  if (f->kind == NodeKind::quant) {
    if (f->quant == QuantKind::mostowski && !reg.has_mostowski(f->qname))
      throw InputError("unknown quantifier Q." + f->qname);
    if (f->quant == QuantKind::team && !reg.has_team(f->qname)) throw InputError("unknown team quantifier TQ." + f->qname);
  }
  for (const auto& c : children(f)) check_names(c, reg);
}

class Session {
 public:
  explicit Session(const Options& o) : o_(o) {
    if (!o.quantifiers.empty()) {
      try {
        reg_.load_config(read_file(o.quantifiers));
      } catch (const QuantifierError& e) {
        throw InputError(o.quantifiers + ": " + e.what());
      }
    }
    cfg_.mode = o.strict ? ExistsMode::strict : ExistsMode::lax;
    if (o.bounded == "uniform") {
      cfg_.bounded = BoundedMode::uniform;
    } else if (o.bounded == "raw") {
      cfg_.bounded = BoundedMode::raw;
    } else if (!o.bounded.empty()) {
      throw InputError("--bounded takes uniform or raw");
    }
    if (o.strategy == "reference") {
      cfg_.strategy = Strategy::reference;
    } else if (o.strategy == "downward_closed") {
      cfg_.strategy = Strategy::downward_closed;
    } else if (!o.strategy.empty() && o.strategy != "full") {
      throw InputError("--strategy takes reference, downward_closed or full");
    }
  }

  const Registry& registry() const { return reg_; }
  const EvalConfig& config() const { return cfg_; }

  Structure structure() const {
    if (o_.structure.empty()) throw InputError("--structure is required");
    try {
      return parse_structure(read_file(o_.structure));
    } catch (const ModelError& e) {
      throw InputError(o_.structure + ": " + e.what());
    }
  }

  Team team(const Structure& m) const {
    if (o_.team.empty()) return Team::unit();
    try {
      return parse_team(read_file(o_.team), m);
    } catch (const ModelError& e) {
      throw InputError(o_.team + ": " + e.what());
    }
  }

  Formula formula(bool second = false) const {
    const std::string& path = second ? o_.formula2 : o_.formula;
    const std::string& text = second ? o_.expr2 : o_.expr;
    std::string source = !path.empty() ? read_file(path) : text;
    std::string where = !path.empty() ? path : (second ? "--expr2" : "--expr");
    if (source.empty()) throw InputError(second ? "--formula2 or --expr2 is required" : "--formula or --expr is required");
    Formula f;
    try {
      f = parse_formula(source);
    } catch (const SyntaxError& e) {
      throw InputError(where + ": " + e.what());
    }
    check_names(f, reg_);
    return f;
  }

  SearchBounds bounds() const {
    SearchBounds b;
    b.size = o_.size;
    b.extra = o_.extra;
    b.seed = o_.seed;
    return b;
  }

 private:
  const Options& o_;
  Registry reg_;
  EvalConfig cfg_;
};

VarSet parse_varlist(const std::string& s) {
  VarSet out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '{' || c == '}') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

std::string print_varset(const VarSet& s) {
  std::string out = "{";
  for (const auto& v : s) out += (out.size() > 1 ? "," : "") + v;
  return out + "}";
}

std::string print_row(const Team& x, std::size_t i, const Structure& m) {
  if (x.variables().empty()) return "∅";
  std::string out;
  for (std::size_t k = 0; k < x.variables().size(); ++k)
    out += (k ? " " : "") + x.variables()[k] + "=" + m.name(x.rows()[i][k]);
  return out;
}

int cmd_eval(const Session& s, const Options& o, std::ostream& out) {
  Structure m = s.structure();
  Team x = s.team(m);
  Formula f = s.formula();
  bool r;
  if (o.tarski) {
    r = true;
    for (const auto& a : x.assignments()) r = r && eval_tarski(m, a, f, s.registry());
  } else {
    Evaluator ev(m, s.registry(), s.config());
    r = ev.satisfies(x, f);
  }
  out << "RESULT " << (r ? "true" : "false") << '\n';
  return r ? 0 : 1;
}

int cmd_meaning(const Session& s, std::ostream& out) {
  Structure m = s.structure();
  Team x = s.team(m);
  Formula f = s.formula();
  if (f->kind != NodeKind::quant) throw InputError("meaning needs a formula headed by a quantifier");
  Evaluator ev(m, s.registry(), s.config());
  MeaningSet ms = ev.meaning_set(x, f->body(), f->var, f->slash, f->backslash);
  out << "MEANING count=" << ms.functions.size() << '\n';
  for (std::size_t i = 0; i < ms.functions.size(); ++i) {
    out << "F" << i + 1 << ':';
    if (ms.base.empty()) out << " (empty function)";
    for (std::size_t r = 0; r < ms.base.size(); ++r)
      out << (r ? ";" : "") << ' ' << print_row(ms.base, r, m) << " ↦ " << print_subset(ms.functions[i][r], m);
    out << '\n';
  }
  if (x == Team::unit()) {
    std::vector<Subset> init;
    for (const auto& fn : ms.functions) init.push_back(fn[0]);
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
    out << "INITIAL";
    for (auto v : init) out << ' ' << print_subset(v, m);
    out << '\n';
  }
  return 0;
}

int cmd_equiv(const Session& s, const Options& o, std::ostream& out) {
  Formula a = s.formula(), b = s.formula(true);
  Verdict v = z_equivalent(a, b, parse_varlist(o.modulus), s.registry(), s.bounds(), s.config());
  out << "RESULT " << (v.holds ? "true" : "false") << " cases=" << v.cases << '\n';
  if (!v.reason.empty()) out << "reason: " << v.reason << '\n';
  if (v.counterexample) out << print_counterexample(*v.counterexample);
  return v.holds ? 0 : 1;
}

RewriteContext context(const Session& s) {
  return RewriteContext{&s.registry(), s.config().bounded != BoundedMode::off, 6};
}

int cmd_rewrite(const Session& s, const Options& o, std::ostream& out) {
  Formula f = s.formula();
  RewriteContext ctx = context(s);
  if (o.rule.empty()) {
    for (const auto& st : applicable_rules(f, ctx)) out << "APPLICABLE " << print_step(st) << '\n';
    return 0;
  }
  RewriteStep st = apply_rule(o.rule, f, parse_path(o.at), ctx, o.arg);
  out << print_step(st) << '\n';
  out << "FORMULA " << print(st.result) << '\n';
  if (!o.verify) return 0;
  Verdict v = z_equivalent(st.before, st.result, st.z, s.registry(), s.bounds(), s.config());
  out << "RESULT " << (v.holds ? "true" : "false") << " cases=" << v.cases << '\n';
  if (v.counterexample) out << print_counterexample(*v.counterexample);
  return v.holds ? 0 : 1;
}

int cmd_prenex(const Session& s, const Options& o, std::ostream& out) {
  Formula f = s.formula();
  RewriteResult r = prenexify(f, context(s));
  for (const auto& st : r.steps) out << print_step(st) << '\n';
  out << "Z=" << print_varset(r.z) << '\n';
  out << "FORMULA " << print(r.formula) << '\n';
  if (!o.verify || !is_sentence(f)) return 0;
  Verdict v = sentence_equivalent(f, r.formula, s.registry(), s.bounds(), s.config());
  out << "RESULT " << (v.holds ? "true" : "false") << " cases=" << v.cases << '\n';
  if (v.counterexample) out << print_counterexample(*v.counterexample);
  return v.holds ? 0 : 1;
}

int cmd_primality(const Session& s, std::ostream& out) {
  PrimalityResult r = primality_reduce(s.formula(), context(s));
  for (const auto& st : r.steps) out << print_step(st) << '\n';
  out << "EXPLORED " << r.explored << '\n';
  out << "FORMULA " << print(r.formula) << '\n';
  out << "RESULT " << (r.reduced ? "true" : "false") << '\n';
  return r.reduced ? 0 : 1;
}

int cmd_check(const Session& s, const Options& o, std::ostream& out) {
  auto names = suite_names();
  if (std::find(names.begin(), names.end(), o.suite) == names.end()) throw InputError("unknown suite " + o.suite);
  SuiteOptions so;
  so.bounds = s.bounds();
  so.seed = o.seed;
  so.formulas = o.formulas;
  so.eval = s.config();
  if (o.suite == "rewrite_soundness") {
    Verdict total;
    for (const auto& r : rewrite_soundness(s.registry(), 50, so)) {
      out << "RULE " << r.rule << " instances=" << r.instances << ' ' << (r.verdict.holds ? "HOLDS" : "FAILS")
          << '\n';
      total.cases += r.verdict.cases;
      if (!r.verdict.holds && total.holds) {
        total.holds = false;
        total.reason = r.rule + ": " + r.verdict.reason;
        total.counterexample = r.verdict.counterexample;
      }
    }
    out << report(o.suite, total);
    return total.holds ? 0 : 1;
  }
  Verdict v = run_suite(o.suite, s.registry(), so);
  out << report(o.suite, v);
  return v.holds ? 0 : 1;
}

void print_check(std::ostream& out, const std::string& label, const PropertyCheck& c) {
  out << label << ' ' << (c.holds ? "true" : "false") << " cases=" << c.cases
      << (c.exhaustive ? " exhaustive" : " sampled") << '\n';
  if (!c.holds && !c.witness.empty()) out << "  witness: " << c.witness << '\n';
}

int cmd_qinfo(const Session& s, const Options& o, std::ostream& out) {
  const Registry& reg = s.registry();
  Structure m = anonymous_structure(o.size);
  if (reg.has_mostowski(o.qname)) {
    auto q = reg.mostowski(o.qname);
    out << "QUANTIFIER " << o.qname << " mostowski size=" << o.size << '\n';
    if (!q->description().empty()) out << "definition: " << q->description() << '\n';
    out << "Q^M =";
    for (auto v : q->localize(m)) out << ' ' << print_subset(v, m);
    out << '\n';
    if (o.size <= 6) {
      out << "monotone " << (is_monotone_on(*q, m) ? "true" : "false") << '\n';
      out << "union_closed " << (is_union_closed_on(*q, m) ? "true" : "false") << '\n';
      out << "emptyset_free " << (is_emptyset_free_on(*q, m) ? "true" : "false") << '\n';
    }
    return 0;
  }
  if (!reg.has_team(o.qname)) throw InputError("unknown quantifier " + o.qname);
  auto q = reg.team(o.qname);
  out << "QUANTIFIER " << o.qname << " team size=" << o.size << '\n';
  std::vector<std::pair<std::string, Team>> teams{{"{∅}", Team::unit()}};
  std::vector<Row> rows;
  for (std::size_t i = 0; i < m.size(); ++i) rows.push_back({static_cast<Element>(i)});
  teams.emplace_back("M/x", Team({"x"}, rows));
  FamilyBounds fb;
  fb.seed = o.seed;
  for (const auto& [label, x] : teams) {
    out << "team " << label << '\n';
    print_check(out, "  team_monotone", team_monotone_on(*q, m, x, fb));
    print_check(out, "  permutation_invariant", permutation_invariant_on(*q, m, x, fb));
    print_check(out, "  cardinality_condition", cardinality_condition_on(*q, m, x, fb));
    print_check(out, "  quality_condition", quality_condition_on(*q, m, x, fb));
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Team semantics with generalized quantifiers", "teamq"};
  app.require_subcommand(1);

  auto inputs = [&](CLI::App* c, bool structure, bool second) {
    if (structure) {
      c->add_option("--structure", o.structure, "structure file");
      c->add_option("--team", o.team, "team file (default: the unit team)");
    }
    c->add_option("--formula", o.formula, "formula file");
    c->add_option("--expr", o.expr, "formula text");
    if (second) {
      c->add_option("--formula2", o.formula2, "second formula file");
      c->add_option("--expr2", o.expr2, "second formula text");
    }
    c->add_option("--quantifiers", o.quantifiers, "quantifier config file");
    c->add_flag("--strict", o.strict, "strict existential clause");
    c->add_flag("--bounded{uniform}", o.bounded, "bounded clause: uniform or raw");
    c->add_option("--strategy", o.strategy, "reference, downward_closed or full");
  };
  auto search = [&](CLI::App* c) {
    c->add_option("--size", o.size, "largest domain size");
    c->add_option("--extra", o.extra, "extra team variables");
    c->add_option("--seed", o.seed, "sampling seed");
  };

  auto* eval = app.add_subcommand("eval", "M,X satisfies the formula?");
  inputs(eval, true, false);
  eval->add_flag("--tarski", o.tarski, "Tarskian semantics row by row");

  auto* meaning = app.add_subcommand("meaning", "meaning set of the head quantifier");
  inputs(meaning, true, false);

  auto* equiv = app.add_subcommand("equiv", "brute-force Z-equivalence");
  inputs(equiv, false, true);
  search(equiv);
  equiv->add_option("--modulus", o.modulus, "variables Z, comma separated");

  auto* rewrite = app.add_subcommand("rewrite", "apply one rule, or list the applicable ones");
  inputs(rewrite, false, false);
  search(rewrite);
  rewrite->add_option("--rule", o.rule, "rule name");
  rewrite->add_option("--at", o.at, "occurrence path, e.g. 0.1");
  rewrite->add_option("--arg", o.arg, "variable argument for renaming and verticalization");
  rewrite->add_flag("--verify", o.verify, "check the step with the oracle");

  auto* prenex = app.add_subcommand("prenex", "prenex normal form");
  inputs(prenex, false, false);
  search(prenex);
  prenex->add_flag("--verify", o.verify, "check sentence truth with the oracle");

  auto* primality = app.add_subcommand("primality", "reduce a regular prenex sentence to first-order form");
  inputs(primality, false, false);

  auto* check = app.add_subcommand("check", "run a theorem suite");
  check->add_option("suite", o.suite, "suite name")->required();
  search(check);
  check->add_option("--formulas", o.formulas, "corpus size");
  check->add_option("--quantifiers", o.quantifiers, "quantifier config file");
  check->add_flag("--strict", o.strict, "strict existential clause");
  check->add_option("--strategy", o.strategy, "reference, downward_closed or full");

  auto* qinfo = app.add_subcommand("qinfo", "localized table and closure properties");
  qinfo->add_option("name", o.qname, "quantifier name")->required();
  qinfo->add_option("--size", o.size, "domain size");
  qinfo->add_option("--quantifiers", o.quantifiers, "quantifier config file");
  qinfo->add_option("--seed", o.seed, "sampling seed for family checks");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Session s(o);
    if (*eval) return cmd_eval(s, o, out);
    if (*meaning) return cmd_meaning(s, out);
    if (*equiv) return cmd_equiv(s, o, out);
    if (*rewrite) return cmd_rewrite(s, o, out);
    if (*prenex) return cmd_prenex(s, o, out);
    if (*primality) return cmd_primality(s, out);
    if (*check) return cmd_check(s, o, out);
    if (*qinfo) return cmd_qinfo(s, o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const RewriteError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace teamq
