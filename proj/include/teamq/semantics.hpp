#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamq/model.hpp"
#include "teamq/quantifiers.hpp"
#include "teamq/syntax.hpp"

namespace teamq {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search space exceeded a configured cap. Callers that sweep many inputs may
// count these as skipped cases.
class GuardError : public EvalError {
 public:
  using EvalError::EvalError;
};

enum class ExistsMode { lax, strict };
enum class BoundedMode { off, uniform, raw };

// reference: the clauses taken literally (3-way splits, every function).
// downward_closed: exact for downward-closed subformulas, using that property to
//   prune (2-way splits, minimal witnesses, backtracking). Nodes whose subtree has
//   a team quantifier or a bounded Mostowski quantifier still use the literal clause.
// full: downward_closed plus row-wise evaluation of flat subformulas.
enum class Strategy { reference, downward_closed, full };

struct EvalConfig {
  ExistsMode mode = ExistsMode::lax;
  BoundedMode bounded = BoundedMode::off;
  Strategy strategy = Strategy::full;
  bool memo = true;

  std::size_t max_split_classes = 10;        // 3-way disjunction splits
  std::size_t max_meaning_classes = 6;       // meaning-set enumeration
  std::size_t max_meaning_domain = 4;
  std::uint64_t max_functions = 1ull << 22;  // literal function enumerations
};

struct MeaningSet {
  Team base;
  std::string var;
  std::vector<std::vector<Subset>> functions;  // values per row of `base`, sorted

  FunctionFamily family() const { return FunctionFamily{base.size(), functions}; }
  std::vector<SupplementFunction> supplement_functions() const;
};

// One evaluation session over a fixed structure. The memo table lives in the
// session and is reused across calls, so a session must not be shared between
// threads. Formulas are compiled once per root pointer.
class Evaluator {
 public:
  Evaluator(const Structure& m, const Registry& reg, EvalConfig cfg = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  const Structure& structure() const;
  const EvalConfig& config() const;

  // M,X ⊨ φ (or ⊨ᵇ when cfg.bounded != off). Throws EvalError on unsuitable teams.
  bool satisfies(const Team& x, const Formula& f);
  // [ψ]^{v,V}_{M,X}; with backslash the uniformity is over dom(X)∖V.
  MeaningSet meaning_set(const Team& x, const Formula& body, const std::string& v, const VarSet& slash,
                         bool backslash = false);

  std::size_t memo_entries() const;
  void clear_memo();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool eval_team(const Structure& m, const Team& x, const Formula& f, const Registry& reg, EvalConfig cfg = {});
// Bounded clause for Mostowski nodes; cfg.bounded == off is read as uniform.
bool eval_bounded(const Structure& m, const Team& x, const Formula& f, const Registry& reg, EvalConfig cfg = {});
// Tarskian satisfaction with the Mostowski clause. Slash sets must be empty and
// team quantifiers absent.
bool eval_tarski(const Structure& m, const Assignment& s, const Formula& f, const Registry& reg);

MeaningSet meaning_set(const Structure& m, const Team& x, const Formula& body, const std::string& v,
                       const VarSet& slash, const Registry& reg, EvalConfig cfg = {});
// |ψ|^v_M = { F(∅) | F ∈ [ψ]^v_{M,{∅}} }.
std::vector<Subset> sentence_initial_meaning(const Structure& m, const Formula& body, const std::string& v,
                                             const Registry& reg, EvalConfig cfg = {});

std::string to_string(Strategy s);
std::string to_string(BoundedMode b);

}  // namespace teamq
