#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamq/quantifiers.hpp"
#include "teamq/syntax.hpp"

namespace teamq {

// The rule does not match, or a side condition fails.
class RewriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RewriteStep {
  std::string rule;
  Path path;          // occurrence the rule acted on
  Formula before;     // whole formula
  Formula result;     // whole formula
  VarSet z;           // modulus: before ≡_Z result
  // Soundness established only by the brute-force oracle (conjunction extraction).
  bool oracle_only = false;
};

std::string print_step(const RewriteStep& s);  // RULE <name> AT <path> Z={...}

struct RewriteContext {
  const Registry* registry = nullptr;  // needed for emptyset-freeness checks
  bool bounded = false;                // swapping is unsound under ⊨ᵇ and never offered
  std::size_t emptyset_free_bound = 6;  // domains 1..bound checked for ∅ ∉ Q^M and Q^M ≠ ∅
};

// Fresh names v1, v2, ... avoiding every variable of the seed formulas.
class FreshSupply {
 public:
  explicit FreshSupply(const std::vector<Formula>& avoid = {});
  void avoid(const Formula& f);
  void avoid(const std::string& v);
  std::string next();

 private:
  VarSet used_;
  std::size_t counter_ = 0;
};

// (Qv/V)ψ ∨_{/W} χ  ->  (Qv/V)(ψ ∨_{/Wv} χ_{/v}); the quantifier may be either
// disjunct. Mostowski Q must have Q^M ≠ ∅ on the checked domains. Z = {v}.
RewriteStep weak_extract(const Formula& f, const Path& at, const RewriteContext& ctx);
// (Qv/V)ψ ∧_{/W} χ  ->  (Qv/V)(ψ ∧_{/W} χ_{/v}) for ∃, ∀ and emptyset-free
// Mostowski quantifiers. Z = {v}; oracle_only.
RewriteStep and_extract(const Formula& f, const Path& at, const RewriteContext& ctx);
// (a) (Qx/V)ψ -> (Qz/V)ψ[z/x], Z = {x,z}; needs x not bound in ψ, x ∉ V, x not free.
RewriteStep rename_bound_a(const Formula& f, const Path& at, const std::string& z);
// (b) (Qx/V)ψ -> (Qz/V)(ψ[z/x]_{/x}), Z = {z}.
RewriteStep rename_bound_b(const Formula& f, const Path& at, const std::string& z);

struct RewriteResult {
  Formula formula;
  VarSet z;
  std::vector<RewriteStep> steps;
};
// Renames every bound variable apart with fresh names, innermost first.
RewriteResult strong_regularize(const Formula& f, FreshSupply* fresh = nullptr);

// (Rv/V)(ψ ∨_{/v} χ_{/v}) -> (Rv/V)(ψ ∨ χ_{/v}), R a Mostowski quantifier. Z = {v}.
RewriteStep slash_elim_R(const Formula& f, const Path& at);
// (∃v/V)(ψ ∨_{/Wv} χ) -> (∃v/V)(ψ ∨_{/W} χ), W ⊆ V, v ∉ V. Z = {v}.
RewriteStep slash_elim_exists(const Formula& f, const Path& at);
// (∀v/V)(ψ ∨_{/Wv} χ_{/v}) -> (∀v/V)(ψ ∨_{/W} χ_{/v}). Z = {v}.
RewriteStep slash_elim_forall(const Formula& f, const Path& at);
// ψ_{/v} -> ψ|_v (and back), v not occurring in ψ. Z = ∅.
RewriteStep verticalize(const Formula& f, const Path& at, const std::string& v);
RewriteStep deverticalize(const Formula& f, const Path& at, const std::string& v);
// (Qv/V)ψ ∨ χ -> (Qv/V)(ψ ∨ χ|_v). Z = {v}, or ∅ when the disjunction is first-order.
// Same nonvacuity condition as weak_extract.
RewriteStep strong_extract(const Formula& f, const Path& at, const RewriteContext& ctx);
// (A u/U)(B v/V∪{u})ψ -> (B v/V)(A u/U∪{v})ψ for A, B emptyset-free with
// {A, B} ⊆ Mostowski ∪ {∃} and not both ∃. Z = {u,v}.
RewriteStep swap_quantifiers(const Formula& f, const Path& at, const RewriteContext& ctx);
// Empties a quantifier slash set whose variables are all ∃-bound above. Z = ∅.
RewriteStep drop_existential_slashes(const Formula& f, const Path& at);
// (∀v/V) -> ∀v, ∧_{/W} -> ∧. Z = ∅.
RewriteStep drop_universal_slashes(const Formula& f, const Path& at);

// Rule names accepted by apply_rule, in a fixed order.
const std::vector<std::string>& rule_names();
// `arg` is the fresh variable for renaming and the variable for (de)verticalize.
RewriteStep apply_rule(const std::string& rule, const Formula& f, const Path& at, const RewriteContext& ctx,
                       const std::string& arg = {});
// Every (rule, path) that applies, renaming excluded (it always applies).
std::vector<RewriteStep> applicable_rules(const Formula& f, const RewriteContext& ctx);

// Strong regularization, then extraction at the leftmost-outermost connective
// with a quantifier child until prenex. Team quantifiers and backslashes are
// rejected.
RewriteResult prenexify(const Formula& f, const RewriteContext& ctx);

struct PrimalityResult {
  bool reduced = false;
  Formula formula;  // slash-free result, or the input when stuck
  std::vector<RewriteStep> steps;
  std::size_t explored = 0;
};
// Breadth-first search over swap / drop-existential / drop-universal steps.
PrimalityResult primality_reduce(const Formula& f, const RewriteContext& ctx, std::size_t max_depth = 32);

Path parse_path(const std::string& text);  // "0.1", "[0,1]" or "" for the root

}  // namespace teamq
