#include "teamq/verify.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace teamq {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9e3779b97f4a7c15ull ^ (b + 0x632be59bd9b4e019ull + (a << 6) + (a >> 2));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ull;
  return x ^ (x >> 29);
}

void fail(Verdict& v, Counterexample c) {
  v.holds = false;
  if (!v.counterexample) v.counterexample = std::move(c);
}

std::string fresh_name(const VarSet& avoid) {
  for (int i = 1;; ++i) {
    std::string v = "t" + std::to_string(i);
    if (!avoid.count(v)) return v;
  }
}

VarSet vars_of(const std::vector<Formula>& fs) {
  VarSet out;
  for (const auto& f : fs) {
    auto a = all_variables(f);
    out.insert(a.begin(), a.end());
  }
  return out;
}

// The assignment-space row with the given index, variables in sorted order.
Row row_at(std::size_t n, std::size_t vars, std::uint64_t index) {
  Row r(vars);
  for (std::size_t i = vars; i-- > 0;) {
    r[i] = static_cast<Element>(index % n);
    index /= n;
  }
  return r;
}

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (out > (1ull << 40) / std::max<std::uint64_t>(b, 1)) throw GuardError("assignment space too large");
    out *= b;
  }
  return out;
}

Team singleton(const Team& x, std::size_t i) { return Team(x.variables(), {x.rows()[i]}); }

}  // namespace

// ---------------------------------------------------------------- reports

std::string print_counterexample(const Counterexample& c) {
  std::ostringstream out;
  out << "structure:\n" << print_structure(c.structure);
  out << "team:\n" << print_team(c.team, c.structure);
  if (c.formula) out << "formula: " << print(c.formula) << '\n';
  if (c.other) out << "other: " << print(c.other) << '\n';
  if (!c.note.empty()) out << "note: " << c.note << '\n';
  return out.str();
}

std::string report(const std::string& suite, const Verdict& v) {
  std::ostringstream out;
  if (v.holds) {
    out << "SUITE " << suite << " HOLDS cases=" << v.cases;
    if (v.skipped) out << " skipped=" << v.skipped;
    out << '\n';
    return out.str();
  }
  out << "SUITE " << suite << " FAILS cases=" << v.cases << '\n';
  if (!v.reason.empty()) out << "reason: " << v.reason << '\n';
  if (v.counterexample) out << print_counterexample(*v.counterexample);
  return out.str();
}

// ---------------------------------------------------------------- enumeration

std::uint64_t count_structures(const Signature& sig, std::size_t n) {
  std::uint64_t bits = 0;
  for (const auto& [r, k] : sig.relations) bits += ipow(n, k);
  if (bits > 40) throw GuardError("too many relation tables");
  return (1ull << bits) * ipow(n, sig.constants.size());
}

Structure structure_at(const Signature& sig, std::size_t n, std::uint64_t index) {
  std::vector<std::string> dom;
  for (std::size_t i = 0; i < n; ++i) dom.push_back(default_element_name(i));
  std::map<std::string, Relation> rels;
  for (const auto& [name, k] : sig.relations) {
    Relation rel;
    rel.arity = k;
    std::uint64_t tuples = ipow(n, k);
    for (std::uint64_t t = 0; t < tuples; ++t) {
      if (index & 1) rel.tuples.insert(row_at(n, k, t));
      index >>= 1;
    }
    rels.emplace(name, std::move(rel));
  }
  std::map<std::string, Element> consts;
  for (const auto& c : sig.constants) {
    consts[c] = static_cast<Element>(index % n);
    index /= n;
  }
  return Structure(dom, rels, consts);
}

std::vector<Structure> enumerate_structures(const Signature& sig, std::size_t n) {
  std::vector<Structure> out;
  for (std::size_t k = 1; k <= n; ++k) {
    std::uint64_t c = count_structures(sig, k);
    if (c > (1u << 20)) throw GuardError("too many structures");
    for (std::uint64_t i = 0; i < c; ++i) out.push_back(structure_at(sig, k, i));
  }
  return out;
}

void for_each_structure(const Signature& sig, const SearchBounds& b,
                        const std::function<void(const Structure&)>& fn) {
  for (std::size_t n = 1; n <= b.size; ++n) {
    std::uint64_t c = count_structures(sig, n);
    if (b.max_structures_per_size == 0 || c <= b.max_structures_per_size) {
      for (std::uint64_t i = 0; i < c; ++i) fn(structure_at(sig, n, i));
      continue;
    }
    // Sample, always keeping the all-empty and all-full interpretations.
    std::mt19937_64 rng(mix(b.seed, n));
    std::uniform_int_distribution<std::uint64_t> pick(0, c - 1);
    std::set<std::uint64_t> chosen{0, c - 1};
    while (chosen.size() < b.max_structures_per_size) chosen.insert(pick(rng));
    for (auto i : chosen) fn(structure_at(sig, n, i));
  }
}

std::vector<Team> enumerate_teams(const Structure& m, const VarSet& u) {
  std::uint64_t space = ipow(m.size(), u.size());
  if (space > 20) throw GuardError("team space too large to enumerate");
  std::vector<std::string> vars(u.begin(), u.end());
  std::vector<Team> out;
  for (std::uint64_t mask = 0; mask < (1ull << space); ++mask) {
    std::vector<Row> rows;
    for (std::uint64_t i = 0; i < space; ++i)
      if (mask >> i & 1) rows.push_back(row_at(m.size(), u.size(), i));
    out.emplace_back(vars, std::move(rows));
  }
  return out;
}

std::vector<Team> sample_teams(const Structure& m, const VarSet& u, const SearchBounds& b, std::mt19937_64& rng) {
  std::uint64_t space = ipow(m.size(), u.size());
  if (space < 63 && (1ull << space) <= b.max_teams) return enumerate_teams(m, u);
  std::vector<std::string> vars(u.begin(), u.end());
  std::set<std::vector<std::uint64_t>> seen{{}};
  std::vector<Team> out{Team(vars, {})};
  std::uniform_int_distribution<std::uint64_t> pick_row(0, space - 1);
  std::uniform_int_distribution<std::size_t> pick_size(1, static_cast<std::size_t>(std::min<std::uint64_t>(space, b.max_rows)));
  for (std::size_t tries = 0; out.size() < b.max_teams && tries < 8 * b.max_teams; ++tries) {
    std::set<std::uint64_t> idx;
    std::size_t k = pick_size(rng);
    while (idx.size() < k) idx.insert(pick_row(rng));
    std::vector<std::uint64_t> key(idx.begin(), idx.end());
    if (!seen.insert(key).second) continue;
    std::vector<Row> rows;
    for (auto i : key) rows.push_back(row_at(m.size(), u.size(), i));
    out.emplace_back(vars, std::move(rows));
  }
  return out;
}

std::vector<VarSet> team_domains(const VarSet& base, const VarSet& extra, std::size_t k) {
  std::vector<std::string> ex(extra.begin(), extra.end());
  std::vector<VarSet> out{base};
  std::function<void(std::size_t, VarSet, std::size_t)> rec = [&](std::size_t from, VarSet cur, std::size_t left) {
    if (left == 0) return;
    for (std::size_t i = from; i < ex.size(); ++i) {
      VarSet next = cur;
      next.insert(ex[i]);
      out.push_back(next);
      rec(i + 1, next, left - 1);
    }
  };
  rec(0, base, k);
  return out;
}

// ---------------------------------------------------------------- oracles

namespace {

Verdict z_check(const Formula& psi, const Formula& chi, const VarSet& z, const Registry& reg, const SearchBounds& b,
                EvalConfig cfg, bool both_ways) {
  Verdict v;
  VarSet fv = free_variables(psi);
  for (const auto& x : free_variables(chi)) fv.insert(x);
  for (const auto& x : z)
    if (fv.count(x)) {
      v.holds = false;
      v.reason = "modulus intersects free variables";
      return v;
    }
  VarSet used = vars_of({psi, chi});
  used.insert(z.begin(), z.end());
  VarSet extra;
  for (const auto& x : vars_of({psi, chi}))
    if (!fv.count(x) && !z.count(x)) extra.insert(x);
  extra.insert(fresh_name(used));
  auto domains = team_domains(fv, extra, b.extra);
  Signature sig = merge(signature_of(psi), signature_of(chi));
  std::size_t counter = 0;
  for_each_structure(sig, b, [&](const Structure& m) {
    if (!v.holds) return;
    Evaluator ev(m, reg, cfg);
    std::mt19937_64 rng(mix(b.seed, ++counter));
    for (const auto& d : domains) {
      if (d.size() > b.max_team_vars) {
        ++v.skipped;
        continue;
      }
      for (const auto& x : sample_teams(m, d, b, rng)) {
        bool l, r;
        try {
          l = ev.satisfies(x, psi);
          r = ev.satisfies(x, chi);
        } catch (const GuardError&) {
          ++v.skipped;
          continue;
        }
        ++v.cases;
        if (both_ways ? l != r : (l && !r)) {
          fail(v, {m, x, psi, chi, std::string("left ") + (l ? "true" : "false") + ", right " + (r ? "true" : "false")});
          return;
        }
      }
    }
  });
  return v;
}

}  // namespace

Verdict z_equivalent(const Formula& psi, const Formula& chi, const VarSet& z, const Registry& reg,
                     const SearchBounds& b, EvalConfig cfg) {
  return z_check(psi, chi, z, reg, b, cfg, true);
}

Verdict z_entails(const Formula& psi, const Formula& chi, const VarSet& z, const Registry& reg, const SearchBounds& b,
                  EvalConfig cfg) {
  return z_check(psi, chi, z, reg, b, cfg, false);
}

Verdict sentence_equivalent(const Formula& psi, const Formula& chi, const Registry& reg, const SearchBounds& b,
                            EvalConfig cfg) {
  Verdict v;
  if (!is_sentence(psi) || !is_sentence(chi)) {
    v.holds = false;
    v.reason = "not a sentence";
    return v;
  }
  for_each_structure(merge(signature_of(psi), signature_of(chi)), b, [&](const Structure& m) {
    if (!v.holds) return;
    Evaluator ev(m, reg, cfg);
    try {
      bool l = ev.satisfies(Team::unit(), psi);
      bool r = ev.satisfies(Team::unit(), chi);
      ++v.cases;
      if (l != r) fail(v, {m, Team::unit(), psi, chi, l ? "left true, right false" : "left false, right true"});
    } catch (const GuardError&) {
      ++v.skipped;
    }
  });
  return v;
}

Verdict is_flat(const Formula& f, const Registry& reg, const SearchBounds& b, EvalConfig cfg) {
  Verdict v;
  VarSet fv = free_variables(f);
  VarSet used = all_variables(f);
  auto domains = team_domains(fv, {fresh_name(used)}, b.extra);
  std::size_t counter = 0;
  for_each_structure(signature_of(f), b, [&](const Structure& m) {
    if (!v.holds) return;
    Evaluator ev(m, reg, cfg);
    std::mt19937_64 rng(mix(b.seed, ++counter));
    for (const auto& d : domains) {
      if (d.size() > b.max_team_vars) {
        ++v.skipped;
        continue;
      }
      for (const auto& x : sample_teams(m, d, b, rng)) {
        try {
          bool whole = ev.satisfies(x, f);
          bool rows = true;
          for (std::size_t i = 0; i < x.size() && rows; ++i) rows = ev.satisfies(singleton(x, i), f);
          ++v.cases;
          if (whole != rows) {
            fail(v, {m, x, f, nullptr, whole ? "team satisfies, some row does not" : "every row satisfies, team does not"});
            return;
          }
        } catch (const GuardError&) {
          ++v.skipped;
        }
      }
    }
  });
  return v;
}

Verdict check_conservativity(const std::string& q, const std::string& var, const Formula& psi, const Registry& reg,
                             const SearchBounds& b, EvalConfig cfg) {
  Verdict v;
  Formula f = make_quant(QuantKind::mostowski, var, psi, {}, q);
  VarSet fv = free_variables(f);
  auto domains = team_domains(fv, {fresh_name(all_variables(f))}, b.extra);
  std::size_t counter = 0;
  for_each_structure(signature_of(f), b, [&](const Structure& m) {
    if (!v.holds) return;
    Evaluator ev(m, reg, cfg);
    std::mt19937_64 rng(mix(b.seed, ++counter));
    for (const auto& d : domains) {
      if (d.size() > b.max_team_vars) {
        ++v.skipped;
        continue;
      }
      for (const auto& x : sample_teams(m, d, b, rng)) {
        bool team_side;
        try {
          team_side = ev.satisfies(x, f);
        } catch (const GuardError&) {
          ++v.skipped;
          continue;
        }
        bool rows = true;
        for (const auto& s : x.assignments())
          if (!eval_tarski(m, s, f, reg)) {
            rows = false;
            break;
          }
        ++v.cases;
        if (team_side != rows) {
          fail(v, {m, x, f, nullptr,
                   team_side ? "team satisfies, some row fails the Mostowski reading"
                             : "every row satisfies the Mostowski reading, team does not"});
          return;
        }
      }
    }
  });
  return v;
}

// ---------------------------------------------------------------- corpus

namespace {

struct Generator {
  const CorpusOptions& o;
  std::mt19937_64& rng;

  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  }

  Term term() {
    if (o.constants && coin(0.15)) return Term::cst("c");
    return Term::var(pick(o.variables));
  }

  VarSet subset(const std::string& avoid, double p) {
    VarSet s;
    for (const auto& x : o.variables)
      if (x != avoid && coin(p)) s.insert(x);
    return s;
  }

  Formula literal() {
    bool neg = coin(0.3);
    double r = std::uniform_real_distribution<double>(0, 1)(rng);
    if (r < 0.35) return make_atom("P", {term()}, neg);
    if (r < 0.7) return make_atom("R", {term(), term()}, neg);
    return make_eq(term(), term(), neg);
  }

  Formula quantifier(std::size_t depth) {
    const std::string& q = pick(o.quantifiers);
    std::string v = pick(o.variables);
    Formula body = gen(depth - 1);
    QuantKind kind = QuantKind::exists;
    std::string name;
    if (q == "A") {
      kind = QuantKind::forall;
    } else if (q.rfind("Q.", 0) == 0) {
      kind = QuantKind::mostowski;
      name = q.substr(2);
    } else if (q.rfind("TQ.", 0) == 0) {
      kind = QuantKind::team;
      name = q.substr(3);
    }
    if (o.backslashes && kind != QuantKind::forall) return make_quant(kind, v, body, subset(v, 0.4), name, true);
    VarSet slash;
    if (o.slashes && coin(0.5)) slash = subset(v, 0.35);
    return make_quant(kind, v, body, slash, name);
  }

  Formula gen(std::size_t depth) {
    if (depth == 0 || (depth < o.depth && coin(0.25))) return literal();
    double r = std::uniform_real_distribution<double>(0, 1)(rng);
    if (r < 0.5) return quantifier(depth);
    VarSet w;
    if (o.connective_slashes && coin(0.3)) w = subset("", 0.3);
    Formula l = gen(depth - 1), rt = gen(depth - 1);
    return r < 0.75 ? make_and(l, rt, w) : make_or(l, rt, w);
  }
};

}  // namespace

Formula random_formula(const CorpusOptions& o, std::mt19937_64& rng) {
  Generator g{o, rng};
  Formula last;
  for (int tries = 0; tries < 10000; ++tries) {
    last = g.gen(o.depth);
    std::size_t fv = free_variables(last).size();
    if (o.sentences ? fv == 0 : fv <= o.max_free) return last;
  }
  // Close off what is left with outer ∃.
  for (const auto& v : free_variables(last)) last = make_exists(v, last);
  return last;
}

std::vector<Formula> generate_corpus(const CorpusOptions& o, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Formula> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_formula(o, rng));
  return out;
}

Formula lift_quantifiers(const Formula& f, const std::string& prefix) {
  return map_quantifiers(f, [&](const Formula& q) -> Formula {
    if (q->quant != QuantKind::mostowski) return q;
    return make_quant(QuantKind::team, q->var, q->body(), q->slash, prefix + q->qname, q->backslash);
  });
}

Formula hat_quantifiers(const Formula& f) {
  return map_quantifiers(f, [](const Formula& q) -> Formula {
    if (q->quant == QuantKind::exists)
      return make_quant(QuantKind::team, q->var, q->body(), q->slash, "hat_exists", q->backslash);
    if (q->quant == QuantKind::forall)
      return make_quant(QuantKind::team, q->var, q->body(), q->slash, "hat_forall", q->backslash);
    return q;
  });
}

// ---------------------------------------------------------------- suite driver

namespace {

// Visits every (M, X) for each formula. Teams range over FV plus `extra` fresh
// variables; `fn` returns false to stop the sweep.
using CaseFn = std::function<bool(Evaluator& ev, const Structure& m, const Team& x, std::size_t fi)>;

void sweep(const std::vector<Formula>& fs, const Registry& reg, const SuiteOptions& o, const EvalConfig& cfg,
           std::size_t extra, Verdict& v, const CaseFn& fn) {
  for (std::size_t fi = 0; fi < fs.size() && v.holds; ++fi) {
    const Formula& f = fs[fi];
    VarSet fv = free_variables(f);
    VarSet fresh;
    if (extra) fresh.insert(fresh_name(all_variables(f)));
    auto domains = team_domains(fv, fresh, extra);
    SearchBounds b = o.bounds;
    b.seed = mix(o.seed, fi);
    std::size_t counter = 0;
    bool stop = false;
    for_each_structure(signature_of(f), b, [&](const Structure& m) {
      if (stop) return;
      Evaluator ev(m, reg, cfg);
      std::mt19937_64 rng(mix(b.seed, ++counter));
      for (const auto& d : domains) {
        if (d.size() > b.max_team_vars) {
          ++v.skipped;
          continue;
        }
        for (const auto& x : sample_teams(m, d, b, rng)) {
          try {
            if (!fn(ev, m, x, fi)) {
              stop = true;
              return;
            }
          } catch (const GuardError&) {
            ++v.skipped;
          }
        }
      }
    });
    if (stop) break;
  }
}

CorpusOptions corpus_over(const std::vector<std::string>& quantifiers) {
  CorpusOptions c;
  c.quantifiers = quantifiers;
  c.slashes = true;
  return c;
}

std::vector<std::string> with_fo(const std::string& q) { return {"E", "A", "Q." + q}; }

}  // namespace

// ---------------------------------------------------------------- suites

Verdict suite_downward_closure(const Registry& reg, const std::vector<std::string>& quantifiers,
                               const SuiteOptions& o) {
  Verdict v;
  auto corpus = generate_corpus(corpus_over(quantifiers), o.formulas, o.seed);
  // Satisfied teams are walked down by single-row deletions; with a per-(M, φ)
  // cache this covers every subteam exactly once.
  std::map<Team, bool> cache;
  std::optional<Structure> cached_for;
  std::size_t cached_formula = ~std::size_t{0};
  sweep(corpus, reg, o, o.eval, 0, v, [&](Evaluator& ev, const Structure& m, const Team& x, std::size_t fi) {
    if (!cached_for || !(*cached_for == m) || cached_formula != fi) {
      cache.clear();
      cached_for = m;
      cached_formula = fi;
    }
    const Formula& f = corpus[fi];
    std::function<bool(const Team&)> sat = [&](const Team& y) {
      auto it = cache.find(y);
      if (it != cache.end()) return it->second;
      bool r = ev.satisfies(y, f);
      cache.emplace(y, r);
      return r;
    };
    std::function<bool(const Team&)> down = [&](const Team& y) {
      for (std::size_t i = 0; i < y.size(); ++i) {
        std::vector<Row> rows = y.rows();
        rows.erase(rows.begin() + static_cast<long>(i));
        Team sub(y.variables(), rows);
        bool known = cache.count(sub);
        ++v.cases;
        if (!sat(sub)) {
          fail(v, {m, y, f, nullptr, "satisfied, but not after removing row " + std::to_string(i)});
          return false;
        }
        if (!known && !down(sub)) return false;
      }
      return true;
    };
    if (!sat(x)) return true;
    return down(x);
  });
  return v;
}

Verdict suite_empty_team(const Registry& reg, const std::vector<std::string>& quantifiers, const SuiteOptions& o) {
  Verdict v;
  auto corpus = generate_corpus(corpus_over(quantifiers), o.formulas, o.seed);
  for (const auto& f : corpus) {
    VarSet fv = free_variables(f);
    Team empty(std::vector<std::string>(fv.begin(), fv.end()), {});
    for_each_structure(signature_of(f), o.bounds, [&](const Structure& m) {
      if (!v.holds) return;
      ++v.cases;
      if (!eval_team(m, empty, f, reg, o.eval)) fail(v, {m, empty, f, nullptr, "empty team not satisfied"});
    });
    if (!v.holds) break;
  }
  return v;
}

Verdict suite_locality_DF(const Registry& reg, const std::vector<std::string>& quantifiers, const SuiteOptions& o) {
  Verdict v;
  CorpusOptions c;
  c.quantifiers = quantifiers;
  c.backslashes = true;
  auto corpus = generate_corpus(c, o.formulas, o.seed);
  sweep(corpus, reg, o, o.eval, 1, v, [&](Evaluator& ev, const Structure& m, const Team& x, std::size_t fi) {
    const Formula& f = corpus[fi];
    VarSet fv = free_variables(f);
    if (x.domain() == fv) return true;
    Team r = restrict(x, fv);
    bool a = ev.satisfies(x, f), b = ev.satisfies(r, f);
    ++v.cases;
    if (a != b) {
      fail(v, {m, x, f, nullptr, std::string("restriction to the free variables gives ") + (b ? "true" : "false")});
      return false;
    }
    return true;
  });
  return v;
}

Verdict suite_nonlocality_witness(const Registry& reg, const std::vector<std::string>& quantifiers, bool slashes,
                                  const SuiteOptions& o) {
  Verdict found;
  CorpusOptions c;
  c.quantifiers = quantifiers;
  c.slashes = slashes;
  auto corpus = generate_corpus(c, o.formulas, o.seed);
  sweep(corpus, reg, o, o.eval, 1, found, [&](Evaluator& ev, const Structure& m, const Team& x, std::size_t fi) {
    const Formula& f = corpus[fi];
    VarSet fv = free_variables(f);
    if (x.domain() == fv) return true;
    Team r = restrict(x, fv);
    bool a = ev.satisfies(x, f), b = ev.satisfies(r, f);
    ++found.cases;
    if (a != b) {
      fail(found, {m, x, f, nullptr, std::string("team gives ") + (a ? "true" : "false") + ", restriction gives " +
                                         (b ? "true" : "false")});
      return false;
    }
    return true;
  });
  return found;
}

namespace {

Verdict compare_pair(const std::vector<Formula>& left, const std::vector<Formula>& right, const Registry& reg,
                     const SuiteOptions& o, EvalConfig lcfg, EvalConfig rcfg) {
  Verdict v;
  std::unique_ptr<Evaluator> other;
  sweep(left, reg, o, lcfg, 0, v, [&](Evaluator& ev, const Structure& m, const Team& x, std::size_t fi) {
    (void)ev;
    if (!other || !(other->structure() == m)) other = std::make_unique<Evaluator>(m, reg, rcfg);
    bool a = ev.satisfies(x, left[fi]);
    bool b = other->satisfies(x, right[fi]);
    ++v.cases;
    if (a != b) {
      fail(v, {m, x, left[fi], right[fi],
               std::string("left ") + (a ? "true" : "false") + ", right " + (b ? "true" : "false")});
      return false;
    }
    return true;
  });
  return v;
}

EvalConfig translated(EvalConfig cfg, const SuiteOptions& o) {
  if (o.translated_strategy) cfg.strategy = *o.translated_strategy;
  return cfg;
}

std::vector<Formula> mapped(const std::vector<Formula>& fs, const std::function<Formula(const Formula&)>& fn) {
  std::vector<Formula> out;
  for (const auto& f : fs) out.push_back(fn(f));
  return out;
}

}  // namespace

Verdict suite_lift_E(const Registry& reg, const std::string& q, const SuiteOptions& o) {
  auto corpus = generate_corpus(corpus_over(with_fo(q)), o.formulas, o.seed);
  auto lifted = mapped(corpus, [](const Formula& f) { return lift_quantifiers(f, "liftE_"); });
  EvalConfig cfg = o.eval;
  cfg.bounded = BoundedMode::off;
  return compare_pair(corpus, lifted, reg, o, cfg, translated(cfg, o));
}

Verdict suite_lift_B(const Registry& reg, const std::string& q, const SuiteOptions& o) {
  auto corpus = generate_corpus(corpus_over(with_fo(q)), o.formulas, o.seed);
  auto lifted = mapped(corpus, [](const Formula& f) { return lift_quantifiers(f, "liftB_"); });
  EvalConfig bounded = o.eval, plain = o.eval;
  bounded.bounded = BoundedMode::uniform;
  plain.bounded = BoundedMode::off;
  return compare_pair(corpus, lifted, reg, o, bounded, translated(plain, o));
}

Verdict suite_monotone_bounded_agreement(const Registry& reg, const std::string& q, const SuiteOptions& o) {
  auto corpus = generate_corpus(corpus_over(with_fo(q)), o.formulas, o.seed);
  EvalConfig plain = o.eval, bounded = o.eval;
  plain.bounded = BoundedMode::off;
  if (bounded.bounded == BoundedMode::off) bounded.bounded = BoundedMode::uniform;
  return compare_pair(corpus, corpus, reg, o, plain, bounded);
}

Verdict suite_flat_conservativity(const Registry& reg, const std::string& q, const SuiteOptions& o) {
  Verdict v;
  CorpusOptions c;
  c.depth = 3;
  auto corpus = generate_corpus(c, o.formulas, o.seed);
  std::mt19937_64 rng(mix(o.seed, 7));
  for (std::size_t i = 0; i < corpus.size() && v.holds; ++i) {
    const Formula& psi = corpus[i];
    // Bind a free variable when there is one, so the quantifier is not vacuous.
    VarSet fv = free_variables(psi);
    std::vector<std::string> choices(fv.begin(), fv.end());
    if (choices.empty()) choices = c.variables;
    std::string var = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
    SearchBounds b = o.bounds;
    b.seed = mix(o.seed, i);
    Verdict r = check_conservativity(q, var, psi, reg, b, o.eval);
    v.cases += r.cases;
    v.skipped += r.skipped;
    if (!r.holds) {
      v.holds = false;
      v.counterexample = r.counterexample;
      v.reason = r.reason;
    }
  }
  return v;
}

Verdict suite_hat_agreement(const Registry& reg, const SuiteOptions& o) {
  auto corpus = generate_corpus(corpus_over({"E", "A"}), o.formulas, o.seed);
  auto hats = mapped(corpus, hat_quantifiers);
  return compare_pair(corpus, hats, reg, o, o.eval, translated(o.eval, o));
}

// ---------------------------------------------------------------- rewrite soundness

namespace {

struct InstanceGen {
  std::mt19937_64 rng;
  CorpusOptions sub;
  std::vector<std::string> pool{"x", "y", "z", "w"};
  std::vector<std::string> any_q{"E", "A", "Q.exactly2", "Q.atleast2", "Q.most", "Q.atmost1"};
  std::vector<std::string> free_q{"E", "A", "Q.exactly2", "Q.atleast2", "Q.most", "Q.exactly1"};

  explicit InstanceGen(std::uint64_t seed) : rng(seed) {
    sub.depth = 2;
    sub.quantifiers = {"E", "A", "Q.atleast2", "Q.exactly1"};
    sub.slashes = true;
    sub.connective_slashes = true;
    sub.constants = false;
    sub.max_free = 3;
  }

  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  }
  Formula any() { return random_formula(sub, rng); }
  Formula without(const std::string& v) {
    for (;;) {
      Formula f = any();
      if (!occurs(f, v)) return f;
    }
  }
  VarSet subset(const VarSet& avoid, double p = 0.3) {
    VarSet s;
    for (const auto& x : pool)
      if (!avoid.count(x) && coin(p)) s.insert(x);
    return s;
  }
  Formula quant(const std::string& q, const std::string& v, Formula body, VarSet slash) {
    if (q == "E") return make_quant(QuantKind::exists, v, body, slash);
    if (q == "A") return make_quant(QuantKind::forall, v, body, slash);
    return make_quant(QuantKind::mostowski, v, body, slash, q.substr(2));
  }
  std::string mostowski() {
    for (;;) {
      const auto& q = pick(any_q);
      if (q[0] == 'Q') return q;
    }
  }
};

// One candidate (formula, path, argument) per call; the rule may still reject it.
struct Candidate {
  Formula f;
  Path at;
  std::string arg;
};

Candidate make_candidate(const std::string& rule, InstanceGen& g) {
  std::string v = g.pick(g.pool);
  if (rule == "weak_extract" || rule == "and_extract" || rule == "strong_extract") {
    std::string q = rule == "and_extract" ? g.pick(g.free_q) : g.pick(g.any_q);
    Formula qf = g.quant(q, v, g.any(), g.subset({v}));
    Formula chi = g.without(v);
    VarSet w = rule == "strong_extract" ? VarSet{} : g.subset({v});
    bool left = g.coin(0.5);
    Formula l = left ? qf : chi, r = left ? chi : qf;
    return {rule == "and_extract" ? make_and(l, r, w) : make_or(l, r, w), {}, {}};
  }
  if (rule == "rename_a" || rule == "rename_b") {
    return {g.quant(g.pick(g.any_q), v, g.any(), g.subset({v}, 0.2)), {}, "u"};
  }
  if (rule == "slash_elim_R") {
    Formula chi = g.without(v);
    return {g.quant(g.mostowski(), v, make_or(g.any(), slash_all(chi, {v}), {v}), g.subset({v})), {}, {}};
  }
  if (rule == "slash_elim_exists") {
    VarSet vs = g.subset({v}, 0.4);
    VarSet w;
    for (const auto& x : vs)
      if (g.coin(0.5)) w.insert(x);
    w.insert(v);
    return {g.quant("E", v, make_or(g.any(), g.any(), w), vs), {}, {}};
  }
  if (rule == "slash_elim_forall") {
    VarSet w = g.subset({v});
    w.insert(v);
    Formula chi = g.without(v);
    return {g.quant("A", v, make_or(g.any(), slash_all(chi, {v}), w), g.subset({v})), {}, {}};
  }
  if (rule == "verticalize") return {slash_all(g.without(v), {v}), {}, v};
  if (rule == "deverticalize") return {slash_nonempty(g.without(v), {v}), {}, v};
  if (rule == "swap") {
    std::vector<std::string> mq{"Q.atleast2", "Q.most", "Q.exactly1", "Q.exactly2"};
    std::string a = g.coin(0.3) ? "E" : g.pick(mq);
    std::string b = a == "E" ? g.pick(mq) : (g.coin(0.3) ? "E" : g.pick(mq));
    std::string u = v, w;
    do w = g.pick(g.pool);
    while (w == u);
    VarSet inner = g.subset({u, w});
    inner.insert(u);
    return {g.quant(a, u, g.quant(b, w, g.any(), inner), g.subset({u, w})), {}, {}};
  }
  if (rule == "drop_existential") {
    std::string x = v, y;
    do y = g.pick(g.pool);
    while (y == x);
    Formula inner = g.quant(g.pick(g.any_q), y, g.any(), {x});
    if (g.coin(0.4)) return {make_exists(x, make_and(g.any(), inner)), {0, 1}, {}};
    return {make_exists(x, inner), {0}, {}};
  }
  if (rule == "drop_universal") {
    if (g.coin(0.5)) return {g.quant("A", v, g.any(), g.subset({v}, 0.5)), {}, {}};
    VarSet w = g.subset({}, 0.4);
    return {make_and(g.any(), g.any(), w), {}, {}};
  }
  throw std::invalid_argument("no generator for rule " + rule);
}

}  // namespace

namespace {
double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

std::vector<RuleReport> rewrite_soundness(const Registry& reg, std::size_t per_rule, const SuiteOptions& o) {
  RewriteContext ctx{&reg, false, 6};
  std::vector<RuleReport> out;
  for (const auto& rule : rule_names()) {
    auto t0 = std::chrono::steady_clock::now();
    RuleReport rep{rule, 0, {}};
    InstanceGen g(mix(o.seed, std::hash<std::string>{}(rule)));
    for (std::size_t tries = 0; rep.instances < per_rule && tries < 200 * per_rule && rep.verdict.holds; ++tries) {
      Candidate c = make_candidate(rule, g);
      RewriteStep step;
      try {
        step = apply_rule(rule, c.f, c.at, ctx, c.arg);
      } catch (const RewriteError&) {
        continue;
      }
      VarSet fv = free_variables(step.before);
      for (const auto& x : free_variables(step.result)) fv.insert(x);
      if (fv.size() > 2) continue;
      ++rep.instances;
      SearchBounds b = o.bounds;
      b.seed = mix(o.seed, rep.instances);
      Verdict r = z_equivalent(step.before, step.result, step.z, reg, b, o.eval);
      rep.verdict.cases += r.cases;
      rep.verdict.skipped += r.skipped;
      if (!r.holds) {
        rep.verdict.holds = false;
        rep.verdict.reason = r.reason.empty() ? print_step(step) : r.reason + "; " + print_step(step);
        rep.verdict.counterexample = r.counterexample;
      }
    }
    if (rep.instances < per_rule && rep.verdict.holds) {
      rep.verdict.holds = false;
      rep.verdict.reason = "only " + std::to_string(rep.instances) + " instances generated";
    }
    rep.seconds = since(t0);
    out.push_back(std::move(rep));
  }

  // Whole-formula procedures.
  CorpusOptions c;
  c.quantifiers = {"E", "A", "Q.atleast2", "Q.most", "Q.exactly2"};
  c.slashes = true;
  c.connective_slashes = true;
  c.constants = false;
  std::mt19937_64 rng(mix(o.seed, 99));

  auto t0 = std::chrono::steady_clock::now();
  RuleReport reg_rep{"strong_regularize", 0, {}};
  CorpusOptions open = c;
  open.max_free = 2;
  for (std::size_t i = 0; i < per_rule && reg_rep.verdict.holds; ++i) {
    Formula f = random_formula(open, rng);
    RewriteResult r;
    try {
      r = strong_regularize(f);
    } catch (const RewriteError& e) {
      reg_rep.verdict.holds = false;
      reg_rep.verdict.reason = std::string(e.what()) + " on " + print(f);
      break;
    }
    ++reg_rep.instances;
    if (!is_strongly_regular(r.formula)) {
      reg_rep.verdict.holds = false;
      reg_rep.verdict.reason = "not strongly regular: " + print(r.formula);
      break;
    }
    SearchBounds b = o.bounds;
    b.seed = mix(o.seed, i);
    Verdict v = z_equivalent(f, r.formula, r.z, reg, b, o.eval);
    reg_rep.verdict.cases += v.cases;
    reg_rep.verdict.skipped += v.skipped;
    if (!v.holds) {
      reg_rep.verdict.holds = false;
      reg_rep.verdict.reason = v.reason;
      reg_rep.verdict.counterexample = v.counterexample;
    }
  }
  reg_rep.seconds = since(t0);
  out.push_back(std::move(reg_rep));

  // Extraction needs nonvacuous quantifiers and, under ∧, emptyset-free ones.
  t0 = std::chrono::steady_clock::now();
  RuleReport pre{"prenexify", 0, {}};
  CorpusOptions closed = c;
  closed.quantifiers = {"E", "A", "Q.most"};
  closed.sentences = true;
  for (std::size_t i = 0; i < per_rule && pre.verdict.holds; ++i) {
    Formula f = random_formula(closed, rng);
    RewriteResult r;
    try {
      r = prenexify(f, ctx);
    } catch (const RewriteError& e) {
      pre.verdict.holds = false;
      pre.verdict.reason = std::string(e.what()) + " on " + print(f);
      break;
    }
    ++pre.instances;
    if (!is_prenex(r.formula) || !is_strongly_regular(r.formula)) {
      pre.verdict.holds = false;
      pre.verdict.reason = "not prenex and strongly regular: " + print(r.formula);
      break;
    }
    SearchBounds b = o.bounds;
    b.seed = mix(o.seed, i);
    Verdict v = sentence_equivalent(f, r.formula, reg, b, o.eval);
    pre.verdict.cases += v.cases;
    pre.verdict.skipped += v.skipped;
    if (!v.holds) {
      pre.verdict.holds = false;
      pre.verdict.reason = v.reason;
      pre.verdict.counterexample = v.counterexample;
    }
  }
  pre.seconds = since(t0);
  out.push_back(std::move(pre));
  return out;
}

Verdict suite_rewrite_soundness(const Registry& reg, std::size_t per_rule, const SuiteOptions& o) {
  Verdict v;
  for (auto& r : rewrite_soundness(reg, per_rule, o)) {
    v.cases += r.verdict.cases;
    v.skipped += r.verdict.skipped;
    if (!r.verdict.holds && v.holds) {
      v.holds = false;
      v.reason = r.rule + ": " + r.verdict.reason;
      v.counterexample = r.verdict.counterexample;
    }
  }
  return v;
}

Verdict suite_swap_entailments(const Registry& reg, const std::string& weak, const std::string& strong,
                               const SuiteOptions& o) {
  Verdict v;
  InstanceGen g(mix(o.seed, 17));
  std::string ri = "Q." + weak, rj = "Q." + strong;
  for (std::size_t i = 0; i < o.formulas && v.holds; ++i) {
    std::string u = g.pick(g.pool), w;
    do w = g.pick(g.pool);
    while (w == u);
    Formula psi = g.any();
    VarSet us = g.subset({u, w}), vs = g.subset({u, w});
    auto plus = [](VarSet s, const std::string& x) {
      s.insert(x);
      return s;
    };
    Formula lhs, rhs;
    switch (i % 4) {
      case 0:  // (Ri v/V)(Rj u/Uv)ψ ⊨ Rj u (Ri v/Vu)ψ
        lhs = g.quant(ri, w, g.quant(rj, u, psi, plus(us, w)), vs);
        rhs = g.quant(rj, u, g.quant(ri, w, psi, plus(vs, u)), {});
        break;
      case 1:  // (Rj u/U)(Ri v/Vu)ψ ⊨ (Ri v/V)(Rj u/Uv)ψ
        lhs = g.quant(rj, u, g.quant(ri, w, psi, plus(vs, u)), us);
        rhs = g.quant(ri, w, g.quant(rj, u, psi, plus(us, w)), vs);
        break;
      case 2:  // (Rj u/U)(∃v/Vu)ψ ⊨ (∃v/V)(Rj u/Uv)ψ
        lhs = g.quant(ri, u, g.quant("E", w, psi, plus(vs, u)), us);
        rhs = g.quant("E", w, g.quant(ri, u, psi, plus(us, w)), vs);
        break;
      default:  // (∃v/V)(Rj u/Uv)ψ ⊨ Rj u(∃v/Vu)ψ
        lhs = g.quant("E", w, g.quant(ri, u, psi, plus(us, w)), vs);
        rhs = g.quant(ri, u, g.quant("E", w, psi, plus(vs, u)), {});
        break;
    }
    VarSet fv = free_variables(lhs);
    for (const auto& x : free_variables(rhs)) fv.insert(x);
    if (fv.count(u) || fv.count(w)) continue;
    SearchBounds b = o.bounds;
    b.seed = mix(o.seed, i);
    Verdict r = z_entails(lhs, rhs, {u, w}, reg, b, o.eval);
    v.cases += r.cases;
    v.skipped += r.skipped;
    if (!r.holds) {
      v.holds = false;
      v.reason = r.reason;
      v.counterexample = r.counterexample;
    }
  }
  return v;
}

Verdict suite_bounded_swap_failure(const Registry& reg, const std::string& q, const SuiteOptions& o) {
  Verdict v;
  std::vector<Formula> lits{parse_formula("R(x,y)"), parse_formula("R(y,x)"), parse_formula("~R(x,y)"),
                            parse_formula("~R(y,x)"), parse_formula("x=y"),    parse_formula("x!=y"),
                            parse_formula("P(x)"),    parse_formula("P(y)"),   parse_formula("~P(x)"),
                            parse_formula("~P(y)")};
  std::vector<Formula> psis = lits;
  for (std::size_t i = 0; i < lits.size(); ++i)
    for (std::size_t j = i + 1; j < lits.size(); ++j) {
      psis.push_back(make_and(lits[i], lits[j]));
      psis.push_back(make_or(lits[i], lits[j]));
    }
  EvalConfig cfg = o.eval;
  if (cfg.bounded == BoundedMode::off) cfg.bounded = BoundedMode::uniform;
  SearchBounds b = o.bounds;
  b.max_structures_per_size = 0;
  for (const auto& psi : psis) {
    Formula lhs = make_quant(QuantKind::mostowski, "x", make_exists("y", psi, {"x"}), {}, q);
    Formula rhs = make_exists("y", make_quant(QuantKind::mostowski, "x", psi, {"y"}, q));
    for_each_structure(signature_of(psi), b, [&](const Structure& m) {
      if (v.counterexample) return;
      Evaluator ev(m, reg, cfg);
      bool l = ev.satisfies(Team::unit(), lhs), r = ev.satisfies(Team::unit(), rhs);
      ++v.cases;
      if (l != r)
        v.counterexample = Counterexample{m, Team::unit(), lhs, rhs,
                                          std::string("bounded: left ") + (l ? "true" : "false") + ", right " +
                                              (r ? "true" : "false")};
    });
    if (v.counterexample) break;
  }
  v.holds = !v.counterexample;
  return v;
}

Verdict suite_union_closed_locality(const Registry& reg, const std::vector<std::string>& quantifiers,
                                    const SuiteOptions& o) {
  Verdict v;
  for (const auto& name : quantifiers) {
    auto q = reg.mostowski(name);
    for (std::size_t n = 1; n <= std::min<std::size_t>(o.bounds.size + 1, 6); ++n) {
      Structure m = anonymous_structure(n);
      ++v.cases;
      if (is_monotone_on(*q, m) && !is_union_closed_on(*q, m)) {
        v.holds = false;
        v.reason = name + " is monotone but not union-closed on size " + std::to_string(n);
        return v;
      }
    }
  }
  return v;
}

Verdict suite_logicality(const Registry& reg, const std::string& tq, std::size_t n, std::size_t rows) {
  Verdict v;
  auto q = reg.team(tq);
  Structure m = anonymous_structure(n);
  std::vector<Team> teams{Team({}, {}), Team::unit()};
  for (const auto& x : enumerate_teams(m, {"x"}))
    if (x.size() <= rows) teams.push_back(x);
  for (const auto& x : teams) {
    PropertyCheck c = cardinality_condition_on(*q, m, x);
    v.cases += c.cases;
    if (!c.exhaustive) ++v.skipped;
    if (!c.holds) {
      v.holds = false;
      v.counterexample = Counterexample{m, x, nullptr, nullptr, tq + ": " + c.witness};
      return v;
    }
  }
  return v;
}

// ---------------------------------------------------------------- dispatch

std::vector<std::string> suite_names() {
  return {"downward_closure", "empty_team",   "locality_DF",       "nonlocality_witness",
          "lift_E",           "lift_B",       "monotone_bounded_agreement", "flat_conservativity",
          "rewrite_soundness", "swap_entailments", "union_closed_locality", "bounded_swap_failure",
          "hat_agreement",    "logicality"};
}

namespace {

Verdict all_of(std::vector<Verdict> vs) {
  Verdict out;
  for (auto& v : vs) {
    out.cases += v.cases;
    out.skipped += v.skipped;
    if (!v.holds && out.holds) {
      out.holds = false;
      out.reason = v.reason;
      out.counterexample = v.counterexample;
    }
  }
  return out;
}

// `v` must fail (a divergence is expected); the divergence becomes the witness.
Verdict expect_failure(Verdict v, const std::string& what) {
  Verdict out;
  out.cases = v.cases;
  out.skipped = v.skipped;
  out.holds = !v.holds;
  if (!out.holds) out.reason = "expected " + what + " not found";
  return out;
}

}  // namespace

Verdict run_suite(const std::string& name, const Registry& reg, const SuiteOptions& o) {
  const std::vector<std::string> mixed{"E", "A", "Q.exactly2", "Q.atleast2", "Q.most"};
  if (name == "downward_closure") return suite_downward_closure(reg, mixed, o);
  if (name == "empty_team") return suite_empty_team(reg, mixed, o);
  if (name == "locality_DF") return suite_locality_DF(reg, mixed, o);
  if (name == "nonlocality_witness")
    return all_of({suite_nonlocality_witness(reg, {"E", "A"}, true, o),
                   suite_nonlocality_witness(reg, {"E", "A", "TQ.most_functions"}, false, o)});
  if (name == "lift_E")
    return all_of({suite_lift_E(reg, "exactly3", o), suite_lift_E(reg, "atleast2", o), suite_lift_E(reg, "most", o)});
  if (name == "lift_B")
    return all_of({suite_lift_B(reg, "exactly3", o), suite_lift_B(reg, "atleast2", o), suite_lift_B(reg, "most", o)});
  if (name == "monotone_bounded_agreement")
    return all_of({suite_monotone_bounded_agreement(reg, "atleast2", o),
                   suite_monotone_bounded_agreement(reg, "most", o),
                   expect_failure(suite_monotone_bounded_agreement(reg, "exactly2", o), "exactly2 divergence")});
  if (name == "flat_conservativity")
    return all_of({suite_flat_conservativity(reg, "atleast2", o),
                   expect_failure(suite_flat_conservativity(reg, "exactly2", o), "exactly2 counterexample")});
  if (name == "rewrite_soundness") return suite_rewrite_soundness(reg, 50, o);
  if (name == "swap_entailments") return suite_swap_entailments(reg, "atmost1", "atleast2", o);
  if (name == "union_closed_locality")
    return suite_union_closed_locality(reg, {"exists", "forall", "atleast2", "most", "exactly2", "atmost1"}, o);
  if (name == "bounded_swap_failure") return suite_bounded_swap_failure(reg, "exactly1", o);
  if (name == "hat_agreement") return suite_hat_agreement(reg, o);
  if (name == "logicality")
    return all_of({suite_logicality(reg, "count_functions2", 2, 2),
                   expect_failure(suite_logicality(reg, "liftE_exactly3", 2, 2), "liftE_exactly3 violation")});
  throw std::invalid_argument("unknown suite " + name);
}

}  // namespace teamq
