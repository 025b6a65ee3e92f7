#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "teamq/model.hpp"
#include "teamq/quantifiers.hpp"
#include "teamq/rewrite.hpp"
#include "teamq/semantics.hpp"
#include "teamq/syntax.hpp"

namespace teamq {

struct SearchBounds {
  std::size_t size = 3;                     // domains 1..size
  std::size_t extra = 1;                    // extra team variables beyond the free ones
  std::size_t max_rows = 8;                 // rows of a sampled team
  std::size_t max_team_vars = 3;            // |dom(X)|
  std::size_t max_structures_per_size = 64; // 0: all
  std::size_t max_teams = 256;              // per (M, dom); exhaustive when 2^rows fits
  std::uint64_t seed = 1;
};

struct Counterexample {
  Structure structure;
  Team team;
  Formula formula;
  Formula other;  // second formula of an equivalence, if any
  std::string note;
};

struct Verdict {
  bool holds = true;
  std::size_t cases = 0;
  std::size_t skipped = 0;  // guard overflows
  std::string reason;       // set when failing without a counterexample
  std::optional<Counterexample> counterexample;
};

// `SUITE <name> HOLDS cases=<k>` or `SUITE <name> FAILS` plus the counterexample block.
std::string report(const std::string& suite, const Verdict& v);
std::string print_counterexample(const Counterexample& c);

// ---------------------------------------------------------------- enumeration

// Number of interpretations of `sig` over a domain of size n.
std::uint64_t count_structures(const Signature& sig, std::size_t n);
// The i-th interpretation of `sig` over {a, b, ...}, i < count_structures(sig, n).
Structure structure_at(const Signature& sig, std::size_t n, std::uint64_t index);
// Every interpretation over domains of sizes 1..n in canonical order.
std::vector<Structure> enumerate_structures(const Signature& sig, std::size_t n);
// Sizes 1..b.size; a size whose count exceeds b.max_structures_per_size is sampled.
void for_each_structure(const Signature& sig, const SearchBounds& b,
                        const std::function<void(const Structure&)>& fn);

// Every team with domain u over M (all subsets of the assignment space).
std::vector<Team> enumerate_teams(const Structure& m, const VarSet& u);
// All teams when 2^|M|^|u| ≤ b.max_teams, otherwise ∅ plus random teams of at
// most b.max_rows rows.
std::vector<Team> sample_teams(const Structure& m, const VarSet& u, const SearchBounds& b, std::mt19937_64& rng);
// All subsets of `extra` of size ≤ k, each joined to `base`.
std::vector<VarSet> team_domains(const VarSet& base, const VarSet& extra, std::size_t k);

// ---------------------------------------------------------------- oracles

// ψ ≡_Z χ checked on structures of size ≤ b.size and teams over FV(ψ) ∪ FV(χ)
// plus up to b.extra further variables: bound variables outside Z and one fresh name.
Verdict z_equivalent(const Formula& psi, const Formula& chi, const VarSet& z, const Registry& reg,
                     const SearchBounds& b = {}, EvalConfig cfg = {});
// ψ ⊨_Z χ on the same grid.
Verdict z_entails(const Formula& psi, const Formula& chi, const VarSet& z, const Registry& reg,
                  const SearchBounds& b = {}, EvalConfig cfg = {});
// Sentences: M ⊨ ψ ⟺ M ⊨ χ for every enumerated M.
Verdict sentence_equivalent(const Formula& psi, const Formula& chi, const Registry& reg, const SearchBounds& b = {},
                            EvalConfig cfg = {});

// M,X ⊨ φ ⟺ M,{s} ⊨ φ for all s ∈ X.
Verdict is_flat(const Formula& f, const Registry& reg, const SearchBounds& b = {}, EvalConfig cfg = {});
// M,X ⊨ (Qv)ψ ⟺ every s ∈ X satisfies (Qv)ψ in the Tarskian sense.
Verdict check_conservativity(const std::string& q, const std::string& v, const Formula& psi, const Registry& reg,
                             const SearchBounds& b = {}, EvalConfig cfg = {});

// ---------------------------------------------------------------- corpus

struct CorpusOptions {
  std::size_t depth = 4;
  // "E", "A", "Q.<name>" or "TQ.<name>"
  std::vector<std::string> quantifiers{"E", "A"};
  std::vector<std::string> variables{"x", "y", "z", "w"};
  bool constants = true;           // #c may appear as a term
  bool slashes = false;            // random quantifier slash sets
  bool connective_slashes = false; // random ∧/∨ slash sets
  bool backslashes = false;        // dependence sets on ∃ and Mostowski quantifiers
  std::size_t max_free = 2;        // rejection bound on |FV|
  bool sentences = false;
};

Formula random_formula(const CorpusOptions& o, std::mt19937_64& rng);
std::vector<Formula> generate_corpus(const CorpusOptions& o, std::size_t count, std::uint64_t seed);

// Every Mostowski node Q.q becomes the team quantifier TQ.<prefix><q>.
Formula lift_quantifiers(const Formula& f, const std::string& prefix);
// ∃ -> TQ.hat_exists, ∀ -> TQ.hat_forall.
Formula hat_quantifiers(const Formula& f);

// ---------------------------------------------------------------- suites

struct SuiteOptions {
  SearchBounds bounds;
  std::size_t formulas = 200;
  std::uint64_t seed = 1;
  EvalConfig eval;
  // Strategy for the translated side of the lift and hat suites, e.g. to check
  // against materialized meaning sets.
  std::optional<Strategy> translated_strategy;
};

Verdict suite_downward_closure(const Registry& reg, const std::vector<std::string>& quantifiers,
                               const SuiteOptions& o = {});
Verdict suite_empty_team(const Registry& reg, const std::vector<std::string>& quantifiers, const SuiteOptions& o = {});
Verdict suite_locality_DF(const Registry& reg, const std::vector<std::string>& quantifiers, const SuiteOptions& o = {});
// Locality on a corpus that may violate it; fails with the first violating (φ, M, X).
Verdict suite_nonlocality_witness(const Registry& reg, const std::vector<std::string>& quantifiers, bool slashes,
                                  const SuiteOptions& o = {});
Verdict suite_lift_E(const Registry& reg, const std::string& q, const SuiteOptions& o = {});
Verdict suite_lift_B(const Registry& reg, const std::string& q, const SuiteOptions& o = {});
// ⊨ and ⊨ᵇ agree on a corpus over {∃, ∀, q}; fails with the first divergence.
Verdict suite_monotone_bounded_agreement(const Registry& reg, const std::string& q, const SuiteOptions& o = {});
Verdict suite_flat_conservativity(const Registry& reg, const std::string& q, const SuiteOptions& o = {});
Verdict suite_hat_agreement(const Registry& reg, const SuiteOptions& o = {});

struct RuleReport {
  std::string rule;
  std::size_t instances = 0;
  Verdict verdict;
  double seconds = 0;
};
// Per-rule generated instances, each checked with z_equivalent against its
// modulus; "prenexify" and "strong_regularize" are reported as rules too.
std::vector<RuleReport> rewrite_soundness(const Registry& reg, std::size_t per_rule, const SuiteOptions& o = {});
Verdict suite_rewrite_soundness(const Registry& reg, std::size_t per_rule, const SuiteOptions& o = {});

// One-way swaps with `weak` a quantifier that contains ∅ and `strong` emptyset-free.
Verdict suite_swap_entailments(const Registry& reg, const std::string& weak, const std::string& strong,
                               const SuiteOptions& o = {});
// Exhaustive search for M and a quantifier-free ψ(x, y) with
// (Q.q x)(E y/{x})ψ and (E y)(Q.q x/{y})ψ differing under ⊨ᵇ on {∅}; fails when found.
Verdict suite_bounded_swap_failure(const Registry& reg, const std::string& q, const SuiteOptions& o = {});
// Monotone implies union-closed, for each named quantifier on domains 1..size+1.
Verdict suite_union_closed_locality(const Registry& reg, const std::vector<std::string>& quantifiers,
                                    const SuiteOptions& o = {});
// The strict cardinality condition for team quantifier `tq` on |M| = n, all
// teams over {x} (and ∅) with at most `rows` rows.
Verdict suite_logicality(const Registry& reg, const std::string& tq, std::size_t n, std::size_t rows);

std::vector<std::string> suite_names();
// Runs a suite by name with its default quantifier choices.
Verdict run_suite(const std::string& name, const Registry& reg, const SuiteOptions& o);

}  // namespace teamq
