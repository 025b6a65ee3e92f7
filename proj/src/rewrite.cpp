#include "teamq/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace teamq {

namespace {

std::string print_set(const VarSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& v : s) {
    out += (first ? "" : ",") + v;
    first = false;
  }
  return out + "}";
}

VarSet unite(VarSet a, const VarSet& b) {
  a.insert(b.begin(), b.end());
  return a;
}

// Nearest binder kind of each variable quantified on the way down to `at`.
std::map<std::string, QuantKind> bound_above(const Formula& f, const Path& at) {
  std::map<std::string, QuantKind> out;
  Formula cur = f;
  for (int i : at) {
    if (cur->kind == NodeKind::quant) out[cur->var] = cur->quant;
    cur = children(cur).at(i);
  }
  return out;
}

Formula node_at(const Formula& f, const Path& at) {
  try {
    return subformula_at(f, at);
  } catch (const std::out_of_range& e) {
    throw RewriteError(e.what());
  }
}

// Replaces the occurrence and checks the modulus side conditions on the whole formula.
RewriteStep make_step(std::string rule, const Formula& f, const Path& at, const Formula& replacement, VarSet z,
                      bool oracle_only = false) {
  RewriteStep s{std::move(rule), at, f, replace_occurrence(f, at, replacement), std::move(z), oracle_only};
  auto fv = unite(free_variables(s.before), free_variables(s.result));
  for (const auto& v : s.z)
    if (fv.count(v)) throw RewriteError(s.rule + ": modulus variable " + v + " is free in the formula");
  auto above = bound_above(f, at);
  for (const auto& v : s.z)
    if (above.count(v)) throw RewriteError(s.rule + ": modulus variable " + v + " is bound above the occurrence");
  return s;
}

bool extractable(const Formula& q) {
  return q->kind == NodeKind::quant && q->quant != QuantKind::team && !q->backslash;
}

// θ = ψ_{/v} with v not occurring in ψ: returns ψ.
std::optional<Formula> strip_slash_all(const Formula& theta, const std::string& v) {
  Formula psi = unslash(theta, v);
  if (occurs(psi, v) || !equal(slash_all(psi, {v}), theta)) return std::nullopt;
  return psi;
}

std::optional<Formula> strip_slash_nonempty(const Formula& theta, const std::string& v) {
  Formula psi = unslash(theta, v);
  if (occurs(psi, v) || !equal(slash_nonempty(psi, {v}), theta)) return std::nullopt;
  return psi;
}

bool emptyset_free(const Formula& q, const RewriteContext& ctx) {
  if (q->quant == QuantKind::exists || q->quant == QuantKind::forall) return true;
  if (q->quant != QuantKind::mostowski || !ctx.registry) return false;
  auto mq = ctx.registry->mostowski(q->qname);
  for (std::size_t n = 1; n <= ctx.emptyset_free_bound; ++n) {
    auto l = mq->localize(n);
    if (std::binary_search(l.begin(), l.end(), Subset{})) return false;
  }
  return true;
}

// Q^M ≠ ∅ on the checked domains. Extraction moves the other disjunct under Q, so a
// vacuous Q^M would falsify a side that was satisfiable through the other disjunct.
bool nonvacuous(const Formula& q, const RewriteContext& ctx) {
  if (q->quant != QuantKind::mostowski) return true;
  if (!ctx.registry) return false;
  auto mq = ctx.registry->mostowski(q->qname);
  for (std::size_t n = 1; n <= ctx.emptyset_free_bound; ++n)
    if (mq->localize(n).empty()) return false;
  return true;
}

Formula requantify(const Formula& q, Formula body) { return with_children(q, std::move(body)); }

}  // namespace

std::string print_step(const RewriteStep& s) {
  std::string out = "RULE " + s.rule + " AT " + print_path(s.path) + " Z=" + print_set(s.z);
  if (s.oracle_only) out += " ORACLE_ONLY";
  return out;
}

FreshSupply::FreshSupply(const std::vector<Formula>& avoid_list) {
  for (const auto& f : avoid_list) avoid(f);
}

void FreshSupply::avoid(const Formula& f) {
  auto vs = all_variables(f);
  used_.insert(vs.begin(), vs.end());
}

void FreshSupply::avoid(const std::string& v) { used_.insert(v); }

std::string FreshSupply::next() {
  while (true) {
    std::string v = "v" + std::to_string(++counter_);
    if (used_.insert(v).second) return v;
  }
}

// ---------------------------------------------------------------- extraction

RewriteStep weak_extract(const Formula& f, const Path& at, const RewriteContext& ctx) {
  Formula d = node_at(f, at);
  if (d->kind != NodeKind::disj) throw RewriteError("weak_extract: not a disjunction");
  bool left = extractable(d->left);
  if (!left && !extractable(d->right)) throw RewriteError("weak_extract: no extractable quantifier below");
  const Formula& q = left ? d->left : d->right;
  const Formula& chi = left ? d->right : d->left;
  const std::string& v = q->var;
  if (occurs(chi, v) || q->slash.count(v) || d->slash.count(v))
    throw RewriteError("weak_extract: " + v + " occurs in the other disjunct or a slash set");
  if (!nonvacuous(q, ctx)) throw RewriteError("weak_extract: Q^M is empty on some small domain");
  VarSet w = d->slash;
  w.insert(v);
  Formula moved = slash_all(chi, {v});
  Formula body = left ? make_or(q->body(), moved, w) : make_or(moved, q->body(), w);
  return make_step("weak_extract", f, at, requantify(q, body), {v});
}

RewriteStep and_extract(const Formula& f, const Path& at, const RewriteContext& ctx) {
  Formula d = node_at(f, at);
  if (d->kind != NodeKind::conj) throw RewriteError("and_extract: not a conjunction");
  bool left = extractable(d->left);
  if (!left && !extractable(d->right)) throw RewriteError("and_extract: no extractable quantifier below");
  const Formula& q = left ? d->left : d->right;
  const Formula& chi = left ? d->right : d->left;
  const std::string& v = q->var;
  if (occurs(chi, v) || q->slash.count(v) || d->slash.count(v))
    throw RewriteError("and_extract: " + v + " occurs in the other conjunct or a slash set");
  if (!emptyset_free(q, ctx)) throw RewriteError("and_extract: quantifier not known to be emptyset-free");
  Formula moved = slash_all(chi, {v});
  Formula body = left ? make_and(q->body(), moved, d->slash) : make_and(moved, q->body(), d->slash);
  return make_step("and_extract", f, at, requantify(q, body), {v}, true);
}

RewriteStep strong_extract(const Formula& f, const Path& at, const RewriteContext& ctx) {
  Formula d = node_at(f, at);
  if (d->kind != NodeKind::disj || !d->slash.empty()) throw RewriteError("strong_extract: not a plain disjunction");
  bool left = extractable(d->left);
  if (!left && !extractable(d->right)) throw RewriteError("strong_extract: no extractable quantifier below");
  const Formula& q = left ? d->left : d->right;
  const Formula& chi = left ? d->right : d->left;
  const std::string& v = q->var;
  if (occurs(chi, v) || q->slash.count(v))
    throw RewriteError("strong_extract: " + v + " occurs in the other disjunct or the slash set");
  if (!nonvacuous(q, ctx)) throw RewriteError("strong_extract: Q^M is empty on some small domain");
  Formula moved = slash_nonempty(chi, {v});
  Formula body = left ? make_or(q->body(), moved) : make_or(moved, q->body());
  VarSet z;
  if (!is_first_order(d)) z.insert(v);
  return make_step("strong_extract", f, at, requantify(q, body), z);
}

// ---------------------------------------------------------------- renaming

RewriteStep rename_bound_a(const Formula& f, const Path& at, const std::string& z) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant) throw RewriteError("rename: not a quantifier");
  const std::string& x = q->var;
  if (occurs(q, z)) throw RewriteError("rename: " + z + " occurs in the quantified formula");
  if (q->slash.count(x) || bound_variables(q->body()).count(x))
    throw RewriteError("rename (a): " + x + " is in the slash set or bound in the body");
  return make_step("rename_a", f, at, with_var(with_children(q, substitute(q->body(), x, z)), z), {x, z});
}

RewriteStep rename_bound_b(const Formula& f, const Path& at, const std::string& z) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant) throw RewriteError("rename: not a quantifier");
  const std::string& x = q->var;
  if (occurs(q, z)) throw RewriteError("rename: " + z + " occurs in the quantified formula");
  Formula body = slash_all(substitute(q->body(), x, z), {x});
  return make_step("rename_b", f, at, with_var(with_children(q, body), z), {z});
}

namespace {

void quantifier_paths_postorder(const Formula& f, Path& cur, std::vector<Path>& out) {
  auto cs = children(f);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    cur.push_back(static_cast<int>(i));
    quantifier_paths_postorder(cs[i], cur, out);
    cur.pop_back();
  }
  if (f->kind == NodeKind::quant) out.push_back(cur);
}

void all_paths(const Formula& f, Path& cur, std::vector<Path>& out) {
  out.push_back(cur);
  auto cs = children(f);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    cur.push_back(static_cast<int>(i));
    all_paths(cs[i], cur, out);
    cur.pop_back();
  }
}

}  // namespace

RewriteResult strong_regularize(const Formula& f, FreshSupply* fresh) {
  FreshSupply local({f});
  FreshSupply& supply = fresh ? *fresh : local;
  if (fresh) fresh->avoid(f);
  VarSet free_in_input = free_variables(f);
  std::vector<Path> paths;
  Path cur;
  quantifier_paths_postorder(f, cur, paths);

  RewriteResult out{f, {}, {}};
  for (const auto& p : paths) {
    Formula q = subformula_at(out.formula, p);
    const std::string& x = q->var;
    std::string z = supply.next();
    bool variant_a = !q->slash.count(x) && !bound_variables(q->body()).count(x) && !free_in_input.count(x);
    Formula renamed;
    VarSet zs;
    if (variant_a) {
      renamed = with_var(with_children(q, substitute(q->body(), x, z)), z);
      zs = {x, z};
    } else {
      renamed = with_var(with_children(q, slash_all(substitute(q->body(), x, z), {x})), z);
      zs = {z};
    }
    Formula next = replace_occurrence(out.formula, p, renamed);
    // Intermediate steps may meet a not yet renamed outer binder; only the
    // composite modulus is checked.
    out.steps.push_back(RewriteStep{variant_a ? "rename_a" : "rename_b", p, out.formula, next, zs, false});
    out.z.insert(zs.begin(), zs.end());
    out.formula = next;
  }
  auto fv = unite(free_variables(f), free_variables(out.formula));
  for (const auto& v : out.z)
    if (fv.count(v)) throw RewriteError("strong_regularize: modulus meets a free variable " + v);
  return out;
}

// ---------------------------------------------------------------- slash elimination

RewriteStep slash_elim_R(const Formula& f, const Path& at) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant || q->quant != QuantKind::mostowski || q->backslash)
    throw RewriteError("slash_elim_R: not a Mostowski quantifier");
  const Formula& d = q->body();
  const std::string& v = q->var;
  if (d->kind != NodeKind::disj || d->slash != VarSet{v})
    throw RewriteError("slash_elim_R: body is not a disjunction slashed by exactly {" + v + "}");
  if (q->slash.count(v) || !strip_slash_all(d->right, v))
    throw RewriteError("slash_elim_R: right disjunct is not of the form χ_{/" + v + "}");
  return make_step("slash_elim_R", f, at, requantify(q, make_or(d->left, d->right)), {v});
}

RewriteStep slash_elim_exists(const Formula& f, const Path& at) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant || q->quant != QuantKind::exists || q->backslash)
    throw RewriteError("slash_elim_exists: not an existential quantifier");
  const Formula& d = q->body();
  const std::string& v = q->var;
  if (d->kind != NodeKind::disj || !d->slash.count(v))
    throw RewriteError("slash_elim_exists: body is not a disjunction slashed by " + v);
  VarSet w = d->slash;
  w.erase(v);
  if (q->slash.count(v) || !std::includes(q->slash.begin(), q->slash.end(), w.begin(), w.end()))
    throw RewriteError("slash_elim_exists: needs W ⊆ V and v ∉ V");
  return make_step("slash_elim_exists", f, at, requantify(q, make_or(d->left, d->right, w)), {v});
}

RewriteStep slash_elim_forall(const Formula& f, const Path& at) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant || q->quant != QuantKind::forall || q->backslash)
    throw RewriteError("slash_elim_forall: not a universal quantifier");
  const Formula& d = q->body();
  const std::string& v = q->var;
  if (d->kind != NodeKind::disj || !d->slash.count(v))
    throw RewriteError("slash_elim_forall: body is not a disjunction slashed by " + v);
  if (q->slash.count(v) || !strip_slash_all(d->right, v))
    throw RewriteError("slash_elim_forall: right disjunct is not of the form χ_{/" + v + "}");
  VarSet w = d->slash;
  w.erase(v);
  return make_step("slash_elim_forall", f, at, requantify(q, make_or(d->left, d->right, w)), {v});
}

RewriteStep verticalize(const Formula& f, const Path& at, const std::string& v) {
  auto psi = strip_slash_all(node_at(f, at), v);
  if (!psi) throw RewriteError("verticalize: subformula is not ψ_{/" + v + "} with " + v + " absent from ψ");
  return make_step("verticalize", f, at, slash_nonempty(*psi, {v}), {});
}

RewriteStep deverticalize(const Formula& f, const Path& at, const std::string& v) {
  auto psi = strip_slash_nonempty(node_at(f, at), v);
  if (!psi) throw RewriteError("deverticalize: subformula is not ψ|_" + v + " with " + v + " absent from ψ");
  return make_step("deverticalize", f, at, slash_all(*psi, {v}), {});
}

// ---------------------------------------------------------------- swapping and dropping

RewriteStep swap_quantifiers(const Formula& f, const Path& at, const RewriteContext& ctx) {
  if (ctx.bounded) throw RewriteError("swap: not available under the bounded semantics");
  Formula outer = node_at(f, at);
  if (outer->kind != NodeKind::quant) throw RewriteError("swap: not a quantifier");
  const Formula& inner = outer->body();
  if (inner->kind != NodeKind::quant) throw RewriteError("swap: body is not a quantifier");
  auto swappable = [](const Formula& q) {
    return !q->backslash && (q->quant == QuantKind::exists || q->quant == QuantKind::mostowski);
  };
  if (!swappable(outer) || !swappable(inner) ||
      (outer->quant == QuantKind::exists && inner->quant == QuantKind::exists))
    throw RewriteError("swap: needs Mostowski/Mostowski or ∃/Mostowski quantifiers");
  const std::string& u = outer->var;
  const std::string& v = inner->var;
  if (u == v || !inner->slash.count(u)) throw RewriteError("swap: inner slash set does not contain " + u);
  VarSet vset = inner->slash;
  vset.erase(u);
  if (outer->slash.count(u) || outer->slash.count(v) || vset.count(v))
    throw RewriteError("swap: quantified variables occur in the slash sets");
  if (!emptyset_free(outer, ctx) || !emptyset_free(inner, ctx))
    throw RewriteError("swap: quantifier not emptyset-free; only a one-way entailment holds");
  VarSet uset = outer->slash;
  uset.insert(v);
  Formula new_inner = with_slash(with_children(outer, inner->body()), uset);
  Formula new_outer = with_slash(with_children(inner, new_inner), vset);
  return make_step("swap", f, at, new_outer, {u, v});
}

RewriteStep drop_existential_slashes(const Formula& f, const Path& at) {
  Formula q = node_at(f, at);
  if (q->kind != NodeKind::quant || q->quant == QuantKind::team || q->backslash || q->slash.empty())
    throw RewriteError("drop_existential: not a slashed quantifier");
  auto above = bound_above(f, at);
  for (const auto& w : q->slash) {
    auto it = above.find(w);
    if (it == above.end() || it->second != QuantKind::exists)
      throw RewriteError("drop_existential: " + w + " is not existentially quantified above");
  }
  return make_step("drop_existential", f, at, with_slash(q, {}), {});
}

RewriteStep drop_universal_slashes(const Formula& f, const Path& at) {
  Formula q = node_at(f, at);
  bool forall = q->kind == NodeKind::quant && q->quant == QuantKind::forall && !q->backslash;
  if (!(forall || q->kind == NodeKind::conj) || q->slash.empty())
    throw RewriteError("drop_universal: not a slashed ∀ or slashed conjunction");
  return make_step("drop_universal", f, at, with_slash(q, {}), {});
}

// ---------------------------------------------------------------- dispatch

const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names{
      "weak_extract",      "and_extract",       "strong_extract", "rename_a",        "rename_b",
      "slash_elim_R",      "slash_elim_exists", "slash_elim_forall", "verticalize",   "deverticalize",
      "swap",              "drop_existential",  "drop_universal"};
  return names;
}

RewriteStep apply_rule(const std::string& rule, const Formula& f, const Path& at, const RewriteContext& ctx,
                       const std::string& arg) {
  auto need_arg = [&]() -> const std::string& {
    if (arg.empty()) throw RewriteError(rule + " needs a variable argument");
    return arg;
  };
  if (rule == "weak_extract") return weak_extract(f, at, ctx);
  if (rule == "and_extract") return and_extract(f, at, ctx);
  if (rule == "strong_extract") return strong_extract(f, at, ctx);
  if (rule == "rename_a") return rename_bound_a(f, at, need_arg());
  if (rule == "rename_b") return rename_bound_b(f, at, need_arg());
  if (rule == "slash_elim_R") return slash_elim_R(f, at);
  if (rule == "slash_elim_exists") return slash_elim_exists(f, at);
  if (rule == "slash_elim_forall") return slash_elim_forall(f, at);
  if (rule == "verticalize") return verticalize(f, at, need_arg());
  if (rule == "deverticalize") return deverticalize(f, at, need_arg());
  if (rule == "swap") return swap_quantifiers(f, at, ctx);
  if (rule == "drop_existential") return drop_existential_slashes(f, at);
  if (rule == "drop_universal") return drop_universal_slashes(f, at);
  throw RewriteError("unknown rule " + rule);
}

std::vector<RewriteStep> applicable_rules(const Formula& f, const RewriteContext& ctx) {
  std::vector<Path> paths;
  Path cur;
  all_paths(f, cur, paths);
  std::vector<RewriteStep> out;
  for (const auto& rule : rule_names()) {
    if (rule == "rename_a" || rule == "rename_b" || rule == "verticalize" || rule == "deverticalize") continue;
    if (rule == "swap" && ctx.bounded) continue;
    for (const auto& p : paths) {
      try {
        out.push_back(apply_rule(rule, f, p, ctx));
      } catch (const RewriteError&) {
      } catch (const QuantifierError&) {
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- prenex form

namespace {

bool has_unsupported(const Formula& f) {
  if (f->kind == NodeKind::quant && (f->quant == QuantKind::team || f->backslash)) return true;
  for (const auto& c : children(f))
    if (has_unsupported(c)) return true;
  return false;
}

// Leftmost-outermost connective with a quantifier child.
std::optional<Path> next_extraction(const Formula& f, Path& cur) {
  if (f->is_connective() && (f->left->kind == NodeKind::quant || f->right->kind == NodeKind::quant)) return cur;
  auto cs = children(f);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    cur.push_back(static_cast<int>(i));
    if (auto p = next_extraction(cs[i], cur)) return p;
    cur.pop_back();
  }
  return std::nullopt;
}

}  // namespace

RewriteResult prenexify(const Formula& f, const RewriteContext& ctx) {
  if (has_unsupported(f)) throw RewriteError("prenexify: team quantifiers and backslashes are not supported");
  if (is_prenex(f) && is_strongly_regular(f)) return RewriteResult{f, {}, {}};
  RewriteResult out = strong_regularize(f);
  while (!is_prenex(out.formula)) {
    Path cur;
    auto p = next_extraction(out.formula, cur);
    if (!p) throw RewriteError("prenexify: no extraction site in a non-prenex formula");
    Formula node = subformula_at(out.formula, *p);
    RewriteStep s = node->kind == NodeKind::disj ? weak_extract(out.formula, *p, ctx) : and_extract(out.formula, *p, ctx);
    out.z.insert(s.z.begin(), s.z.end());
    out.formula = s.result;
    out.steps.push_back(std::move(s));
  }
  auto fv = unite(free_variables(f), free_variables(out.formula));
  for (const auto& v : out.z)
    if (fv.count(v)) throw RewriteError("prenexify: modulus meets a free variable " + v);
  return out;
}

// ---------------------------------------------------------------- primality

PrimalityResult primality_reduce(const Formula& f, const RewriteContext& ctx, std::size_t max_depth) {
  if (!is_regular(f) || !is_prenex(f) || !is_sentence(f))
    throw RewriteError("primality: input must be a regular prenex sentence");
  struct State {
    Formula formula;
    std::vector<RewriteStep> steps;
  };
  PrimalityResult out;
  out.formula = f;
  std::deque<State> queue{State{f, {}}};
  std::set<std::string> seen{print(f)};
  static const std::vector<std::string> rules{"drop_universal", "drop_existential", "swap"};
  while (!queue.empty()) {
    State s = std::move(queue.front());
    queue.pop_front();
    ++out.explored;
    if (is_first_order(s.formula)) {
      out.reduced = true;
      out.formula = s.formula;
      out.steps = std::move(s.steps);
      return out;
    }
    if (s.steps.size() >= max_depth) continue;
    std::vector<Path> paths;
    Path cur;
    all_paths(s.formula, cur, paths);
    for (const auto& rule : rules) {
      if (rule == "swap" && ctx.bounded) continue;
      for (const auto& p : paths) {
        RewriteStep step;
        try {
          step = apply_rule(rule, s.formula, p, ctx);
        } catch (const RewriteError&) {
          continue;
        } catch (const QuantifierError&) {
          continue;
        }
        if (!seen.insert(print(step.result)).second) continue;
        State next{step.result, s.steps};
        next.steps.push_back(std::move(step));
        queue.push_back(std::move(next));
      }
    }
  }
  return out;
}

Path parse_path(const std::string& text) {
  Path p;
  std::string digits;
  auto flush = [&]() {
    if (!digits.empty()) p.push_back(std::stoi(digits));
    digits.clear();
  };
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      digits += c;
    } else if (c == '.' || c == ',' || c == '[' || c == ']' || c == ' ') {
      flush();
    } else {
      throw RewriteError("bad path '" + text + "'");
    }
  }
  flush();
  return p;
}

}  // namespace teamq
