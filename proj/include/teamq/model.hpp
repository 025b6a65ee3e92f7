#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace teamq {

// Domains are small: at most kMaxDomain elements, so a subset of dom(M) fits a mask.
inline constexpr std::size_t kMaxDomain = 16;

using Element = std::uint8_t;
using VarSet = std::set<std::string>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A subset of dom(M) as a bitmask over element indices.
struct Subset {
  std::uint32_t bits = 0;

  bool contains(Element a) const { return (bits >> a) & 1u; }
  bool empty() const { return bits == 0; }
  int size() const { return __builtin_popcount(bits); }
  bool subset_of(Subset o) const { return (bits & ~o.bits) == 0; }
  Subset with(Element a) const { return Subset{bits | (1u << a)}; }

  static Subset full(std::size_t n) { return Subset{n >= 32 ? ~0u : ((1u << n) - 1)}; }
  static Subset single(Element a) { return Subset{1u << a}; }

  friend bool operator==(Subset a, Subset b) { return a.bits == b.bits; }
  friend bool operator<(Subset a, Subset b) { return a.bits < b.bits; }
};

struct Relation {
  std::size_t arity = 0;
  std::set<std::vector<Element>> tuples;
  friend bool operator==(const Relation&, const Relation&) = default;
};

class Structure {
 public:
  Structure() = default;
  Structure(std::vector<std::string> domain,
            std::map<std::string, Relation> relations = {},
            std::map<std::string, Element> constants = {});

  std::size_t size() const { return domain_.size(); }
  const std::vector<std::string>& domain() const { return domain_; }
  const std::string& name(Element a) const { return domain_.at(a); }
  Element element(const std::string& name) const;
  bool has_element(const std::string& name) const;

  const std::map<std::string, Relation>& relations() const { return relations_; }
  const std::map<std::string, Element>& constants() const { return constants_; }
  const Relation& relation(const std::string& name) const;
  Element constant(const std::string& name) const;
  bool holds(const std::string& rel, const std::vector<Element>& args) const;

  friend bool operator==(const Structure&, const Structure&) = default;

 private:
  std::vector<std::string> domain_;
  std::map<std::string, Relation> relations_;
  std::map<std::string, Element> constants_;
};

using Assignment = std::map<std::string, Element>;
using Row = std::vector<Element>;

// A set of assignments over a shared variable domain. Variables are kept sorted
// and rows sorted and unique, so equal teams compare equal.
class Team {
 public:
  Team() = default;
  Team(std::vector<std::string> vars, std::vector<Row> rows);
  static Team from_assignments(const VarSet& vars, const std::vector<Assignment>& rows);
  // {∅}: the team holding only the empty assignment.
  static Team unit();

  const std::vector<std::string>& variables() const { return vars_; }
  VarSet domain() const { return VarSet(vars_.begin(), vars_.end()); }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  Assignment assignment(std::size_t i) const;
  std::vector<Assignment> assignments() const;
  int index_of(const std::string& var) const;
  bool contains(const Assignment& s) const;

  friend bool operator==(const Team&, const Team&) = default;
  friend bool operator<(const Team& a, const Team& b) {
    return std::tie(a.vars_, a.rows_) < std::tie(b.vars_, b.rows_);
  }

 private:
  std::vector<std::string> vars_;
  std::vector<Row> rows_;
};

// F : X -> ℘(M), one value per row of the source team (in row order).
class SupplementFunction {
 public:
  SupplementFunction(Team source, std::vector<Subset> choices);

  const Team& source() const { return source_; }
  const std::vector<Subset>& choices() const { return choices_; }
  Subset operator()(std::size_t row) const { return choices_.at(row); }
  // Pointwise F' ≥ F.
  bool extends(const SupplementFunction& f) const;

  friend bool operator==(const SupplementFunction&, const SupplementFunction&) = default;

 private:
  Team source_;
  std::vector<Subset> choices_;
};

Team duplicate(const Team& x, const Structure& m, const std::string& v);
Team supplement(const Team& x, const SupplementFunction& f, const std::string& v);
bool v_equivalent(const Assignment& s, const Assignment& t, const VarSet& v);
bool is_uniform(const SupplementFunction& f, const VarSet& v);
// Row indices of X grouped by ∼_V, classes ordered by their first row.
std::vector<std::vector<std::size_t>> uniform_classes(const Team& x, const VarSet& v);
void for_each_uniform_function(const Team& x, const VarSet& v, const std::vector<Subset>& candidates,
                               const std::function<void(const SupplementFunction&)>& fn);
std::vector<SupplementFunction> enumerate_uniform_functions(const Team& x, const VarSet& v,
                                                            const std::vector<Subset>& candidates);
bool uniform_subset(const std::vector<Assignment>& y, const Team& x, const VarSet& w);

Team restrict(const Team& x, const VarSet& u);
Team drop(const Team& x, const std::string& v);
std::set<std::vector<Element>> relation_of(const Team& x, const std::vector<std::string>& vars);
Team rename(const Team& x, const std::string& from, const std::string& to);
std::vector<Team> v_expansions(const Team& x, const std::string& v, const Structure& m);

// a, b, c, ... for enumerated and anonymous structures.
std::string default_element_name(std::size_t i);
Structure anonymous_structure(std::size_t n);

// Text formats.
Structure parse_structure(const std::string& text);
std::string print_structure(const Structure& m);
Team parse_team(const std::string& text, const Structure& m);
std::string print_team(const Team& x, const Structure& m);

}  // namespace teamq
