#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamq/model.hpp"

namespace teamq {

class QuantifierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Type (1) quantifier Q, localized per structure as Q^M ⊆ ℘(M).
class MostowskiQuantifier {
 public:
  using Predicate = std::function<bool(long card_s, long card_m)>;
  // Accepted subsets per domain size, written with element names.
  using Tables = std::map<std::size_t, std::vector<std::vector<std::string>>>;

  static MostowskiQuantifier intensional(std::string name, Predicate p, std::string description = {});
  static MostowskiQuantifier extensional(std::string name, Tables tables);

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  bool is_intensional() const { return static_cast<bool>(pred_); }
  bool contains(Subset s, const Structure& m) const;
  std::vector<Subset> localize(const Structure& m) const;
  // Localization on an anonymous domain of size n; extensional tables resolve names
  // positionally against a, b, c, ...
  std::vector<Subset> localize(std::size_t n) const;

 private:
  std::string name_;
  std::string description_;
  Predicate pred_;
  Tables tables_;
};

MostowskiQuantifier q_exists();
MostowskiQuantifier q_forall();
MostowskiQuantifier q_trivial();
MostowskiQuantifier q_exactly(long k);
MostowskiQuantifier q_atleast(long k);
MostowskiQuantifier q_atmost(long k);
MostowskiQuantifier q_most();

// A family 𝔉 ⊆ ℘(M)^X. Each function lists one value per row of X, in row order.
struct FunctionFamily {
  std::size_t rows = 0;
  std::vector<std::vector<Subset>> functions;

  void normalize();
  bool contains(const std::vector<Subset>& f) const;
};

class TeamQuantifier {
 public:
  using Definition = std::function<bool(const Structure& m, const FunctionFamily& f)>;
  using ValueTest = std::function<bool(const Structure& m, Subset s)>;

  TeamQuantifier(std::string name, Definition def, bool bans_empty_function);
  enum class Shape { generic, witness, bounded_witness };

  // 𝔉 is accepted iff some member has every value passing `test`.
  static TeamQuantifier witness(std::string name, ValueTest test);
  // ... iff some member F has every value passing `test`, and so does every
  // member G ≥ F (pointwise ⊇).
  static TeamQuantifier bounded_witness(std::string name, ValueTest test);

  const std::string& name() const { return name_; }
  void rename(std::string name) { name_ = std::move(name); }
  bool bans_empty_function() const { return bans_empty_; }
  // Membership 𝔉 ∈ Q̂^{M,X}. When the ban is on, the empty function (the only
  // function on X = ∅) is removed from 𝔉 before the definition is consulted.
  bool accepts(const Structure& m, FunctionFamily f) const;
  // For the two witness shapes the evaluator may search the meaning set
  // instead of materializing it.
  Shape shape() const { return shape_; }
  const ValueTest& value_test() const { return test_; }
  // Set when formulas built with this quantifier over downward-closed bodies
  // stay downward closed; the evaluator may then prune meaning-set search.
  bool keeps_downward_closure() const { return keeps_dc_; }
  TeamQuantifier& keeps_downward_closure(bool on) {
    keeps_dc_ = on;
    return *this;
  }

 private:
  std::string name_;
  Definition def_;
  bool bans_empty_;
  bool keeps_dc_ = false;
  Shape shape_ = Shape::generic;
  ValueTest test_;
};

TeamQuantifier lift_E(const MostowskiQuantifier& q);
TeamQuantifier lift_B(const MostowskiQuantifier& q);
TeamQuantifier lift_Bprime(const MostowskiQuantifier& q);
TeamQuantifier hat_exists();
TeamQuantifier hat_forall();
TeamQuantifier hat_exactly_fn(long k);
TeamQuantifier hat_exactly_nm(long k);
TeamQuantifier hat_exactly_b(long k);
// card(𝔉) = k and no member is "empty": by default the empty function, with
// nonempty_values = true every member must have all values nonempty.
TeamQuantifier hat_count_functions(long k, bool nonempty_values = false);
TeamQuantifier most_functions();

// Built-ins plus configured quantifiers. Parametric built-in names resolve on
// lookup: exactlyK, atleastK, atmostK, most, exists, forall, trivial;
// hat_exists, hat_forall, hat_exactly_fnK, hat_exactly_nmK, hat_exactly_bK,
// count_functionsK, count_functions_nonemptyK, most_functions,
// liftE_<q>, liftB_<q>, liftBprime_<q>.
class Registry {
 public:
  void add(MostowskiQuantifier q);
  void add(TeamQuantifier q);
  std::shared_ptr<const MostowskiQuantifier> mostowski(const std::string& name) const;
  std::shared_ptr<const TeamQuantifier> team(const std::string& name) const;
  bool has_mostowski(const std::string& name) const;
  bool has_team(const std::string& name) const;
  std::vector<std::string> configured_names() const;

  // Lines: `mostowski NAME = EXPR CMP EXPR`, `extensional NAME @sizeN = {a,b}, {c}`,
  // `team NAME = liftE(q) | liftB(q) | liftBprime(q) | count_functions(k[, nonempty])
  //   | most_functions | hat_exists | hat_forall | hat_exactly_fn(k) | ...`.
  void load_config(const std::string& text);

 private:
  std::map<std::string, std::shared_ptr<const MostowskiQuantifier>> mostowski_;
  std::map<std::string, std::shared_ptr<const TeamQuantifier>> team_;
  std::map<std::string, MostowskiQuantifier::Tables> extensional_;
};

// Compiles `card(S) >= 2`-style conditions.
MostowskiQuantifier::Predicate parse_condition(const std::string& text);

// Structural properties of Q^M; |M| ≤ 6.
bool is_monotone_on(const MostowskiQuantifier& q, const Structure& m);
bool is_union_closed_on(const MostowskiQuantifier& q, const Structure& m);
bool is_emptyset_free_on(const MostowskiQuantifier& q, const Structure& m);

struct PropertyCheck {
  bool holds = true;
  bool exhaustive = true;
  std::size_t cases = 0;
  std::string witness;  // human-readable description when !holds
};

// Checks over families 𝔉 ⊆ ℘(M)^X. Exhaustive when |℘(M)^X| ≤ 16, otherwise
// `samples` random families drawn with `seed`.
struct FamilyBounds {
  std::size_t samples = 4096;
  std::uint64_t seed = 1;
};
PropertyCheck team_monotone_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b = {});
PropertyCheck permutation_invariant_on(const TeamQuantifier& q, const Structure& m, const Team& x,
                                       FamilyBounds b = {});
PropertyCheck cardinality_condition_on(const TeamQuantifier& q, const Structure& m, const Team& x,
                                       FamilyBounds b = {});
PropertyCheck quality_condition_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b = {});

// Every function X -> ℘(M) (row-wise values), in canonical order.
std::vector<std::vector<Subset>> all_functions(std::size_t rows, std::size_t domain_size);

std::string print_subset(Subset s, const Structure& m);

}  // namespace teamq
