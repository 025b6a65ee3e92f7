#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamq/model.hpp"

namespace teamq {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, std::size_t pos)
      : std::runtime_error("syntax error at column " + std::to_string(pos + 1) + ": " + msg), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

struct Term {
  bool constant = false;
  std::string name;

  static Term var(std::string n) { return {false, std::move(n)}; }
  static Term cst(std::string n) { return {true, std::move(n)}; }
  friend bool operator==(const Term&, const Term&) = default;
};

enum class NodeKind { atom, equality, conj, disj, quant };
enum class QuantKind { exists, forall, mostowski, team };

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::atom;
  bool negated = false;         // atom, equality
  std::string relation;         // atom
  std::vector<Term> terms;      // atom arguments; equality lhs, rhs
  VarSet slash;                 // connective W, quantifier V
  QuantKind quant = QuantKind::exists;
  std::string qname;            // mostowski / team quantifier name
  std::string var;              // quantified variable
  bool backslash = false;       // DF dependence set instead of slash set
  Formula left, right;          // connective children; quantifier body is `left`

  bool is_connective() const { return kind == NodeKind::conj || kind == NodeKind::disj; }
  bool is_literal() const { return kind == NodeKind::atom || kind == NodeKind::equality; }
  const Formula& body() const { return left; }
};

Formula make_atom(std::string rel, std::vector<Term> args, bool negated = false);
Formula make_eq(Term a, Term b, bool negated = false);
Formula make_and(Formula l, Formula r, VarSet w = {});
Formula make_or(Formula l, Formula r, VarSet w = {});
Formula make_quant(QuantKind k, std::string var, Formula body, VarSet v = {}, std::string qname = {},
                   bool backslash = false);
Formula make_exists(std::string var, Formula body, VarSet v = {});
Formula make_forall(std::string var, Formula body, VarSet v = {});

// Copy of a node with replaced children / slash set.
Formula with_children(const Formula& f, Formula l, Formula r = nullptr);
Formula with_slash(const Formula& f, VarSet s);
Formula with_var(const Formula& f, std::string v);

bool equal(const Formula& a, const Formula& b);

Formula parse_formula(const std::string& text);
std::string print(const Formula& f);

VarSet free_variables(const Formula& f);
VarSet bound_variables(const Formula& f);
VarSet all_variables(const Formula& f);  // every variable name occurring anywhere
bool occurs(const Formula& f, const std::string& v);

// ψ[z/x]; throws std::invalid_argument if z occurs in f.
Formula substitute(const Formula& f, const std::string& x, const std::string& z);
// ψ_{/V}: V added to every slash set. ψ|_V: V added to every nonempty slash set.
// Backslash (dependence) sets are left untouched by both.
Formula slash_all(const Formula& f, const VarSet& v);
Formula slash_nonempty(const Formula& f, const VarSet& v);
// Removes v from every slash set.
Formula unslash(const Formula& f, const std::string& v);

using Path = std::vector<int>;
std::vector<Formula> children(const Formula& f);
Formula subformula_at(const Formula& f, const Path& p);
Formula replace_occurrence(const Formula& f, const Path& p, const Formula& theta);
std::string print_path(const Path& p);

bool is_regular(const Formula& f);
bool is_strongly_regular(const Formula& f);
bool is_prenex(const Formula& f);
bool is_quantifier_free(const Formula& f);
// All slash sets (quantifiers and connectives) empty, no backslash.
bool is_first_order(const Formula& f);
// Only ∃/∀ quantifiers, slash-free: classical first-order.
bool is_plain_first_order(const Formula& f);
bool has_team_quantifier(const Formula& f);
bool has_backslash(const Formula& f);
bool is_sentence(const Formula& f);
std::size_t size(const Formula& f);

struct Signature {
  std::map<std::string, std::size_t> relations;
  std::set<std::string> constants;
  friend bool operator==(const Signature&, const Signature&) = default;
};
Signature signature_of(const Formula& f);
Signature merge(const Signature& a, const Signature& b);

struct QuantifierPrefix {
  std::vector<Formula> prefix;  // quantifier nodes, outermost first
  Formula matrix;
};
QuantifierPrefix split_prefix(const Formula& f);

// Rewrites every quantifier node bottom-up through fn (fn may return the node unchanged).
Formula map_quantifiers(const Formula& f, const std::function<Formula(const Formula&)>& fn);

}  // namespace teamq
