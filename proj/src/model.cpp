#include "teamq/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace teamq {

Structure::Structure(std::vector<std::string> domain, std::map<std::string, Relation> relations,
                     std::map<std::string, Element> constants)
    : domain_(std::move(domain)), relations_(std::move(relations)), constants_(std::move(constants)) {
  if (domain_.empty()) throw ModelError("structure domain must be nonempty");
  if (domain_.size() > kMaxDomain)
    throw ModelError("structure domain exceeds " + std::to_string(kMaxDomain) + " elements");
  std::set<std::string> seen(domain_.begin(), domain_.end());
  if (seen.size() != domain_.size()) throw ModelError("duplicate domain element");
  for (const auto& [name, rel] : relations_) {
    for (const auto& t : rel.tuples) {
      if (t.size() != rel.arity) throw ModelError("tuple arity mismatch in relation " + name);
      for (Element a : t)
        if (a >= domain_.size()) throw ModelError("tuple outside domain in relation " + name);
    }
  }
  for (const auto& [name, a] : constants_)
    if (a >= domain_.size()) throw ModelError("constant " + name + " outside domain");
}

Element Structure::element(const std::string& name) const {
  auto it = std::find(domain_.begin(), domain_.end(), name);
  if (it == domain_.end()) throw ModelError("unknown element '" + name + "'");
  return static_cast<Element>(it - domain_.begin());
}

bool Structure::has_element(const std::string& name) const {
  return std::find(domain_.begin(), domain_.end(), name) != domain_.end();
}

const Relation& Structure::relation(const std::string& name) const {
  auto it = relations_.find(name);
  if (it == relations_.end()) throw ModelError("unknown relation '" + name + "'");
  return it->second;
}

Element Structure::constant(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end()) throw ModelError("unknown constant '" + name + "'");
  return it->second;
}

bool Structure::holds(const std::string& rel, const std::vector<Element>& args) const {
  const Relation& r = relation(rel);
  if (r.arity != args.size()) throw ModelError("arity mismatch for relation '" + rel + "'");
  return r.tuples.count(args) > 0;
}

Team::Team(std::vector<std::string> vars, std::vector<Row> rows) {
  std::vector<std::size_t> order(vars.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vars[a] < vars[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (vars[order[i]] == vars[order[i - 1]]) throw ModelError("duplicate team variable " + vars[order[i]]);
  vars_.reserve(vars.size());
  for (auto i : order) vars_.push_back(vars[i]);
  rows_.reserve(rows.size());
  for (const Row& r : rows) {
    if (r.size() != vars.size()) throw ModelError("team row width does not match its variables");
    Row out;
    out.reserve(r.size());
    for (auto i : order) out.push_back(r[i]);
    rows_.push_back(std::move(out));
  }
  std::sort(rows_.begin(), rows_.end());
  rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
}

Team Team::from_assignments(const VarSet& vars, const std::vector<Assignment>& rows) {
  std::vector<std::string> vs(vars.begin(), vars.end());
  std::vector<Row> out;
  for (const auto& s : rows) {
    if (s.size() != vs.size()) throw ModelError("assignment domain does not match team variables");
    Row r;
    for (const auto& v : vs) {
      auto it = s.find(v);
      if (it == s.end()) throw ModelError("assignment lacks variable " + v);
      r.push_back(it->second);
    }
    out.push_back(std::move(r));
  }
  return Team(std::move(vs), std::move(out));
}

Team Team::unit() { return Team({}, {Row{}}); }

Assignment Team::assignment(std::size_t i) const {
  Assignment s;
  const Row& r = rows_.at(i);
  for (std::size_t k = 0; k < vars_.size(); ++k) s.emplace(vars_[k], r[k]);
  return s;
}

std::vector<Assignment> Team::assignments() const {
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < rows_.size(); ++i) out.push_back(assignment(i));
  return out;
}

int Team::index_of(const std::string& var) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return -1;
  return static_cast<int>(it - vars_.begin());
}

bool Team::contains(const Assignment& s) const {
  if (s.size() != vars_.size()) return false;
  Row r;
  for (const auto& v : vars_) {
    auto it = s.find(v);
    if (it == s.end()) return false;
    r.push_back(it->second);
  }
  return std::binary_search(rows_.begin(), rows_.end(), r);
}

SupplementFunction::SupplementFunction(Team source, std::vector<Subset> choices)
    : source_(std::move(source)), choices_(std::move(choices)) {
  if (choices_.size() != source_.size()) throw ModelError("supplementing function is not total on its team");
}

bool SupplementFunction::extends(const SupplementFunction& f) const {
  if (!(f.source_ == source_)) return false;
  for (std::size_t i = 0; i < choices_.size(); ++i)
    if (!f.choices_[i].subset_of(choices_[i])) return false;
  return true;
}

namespace {

// Rows of X extended (or overwritten) at v with the elements picked per row.
Team extend(const Team& x, const std::string& v, const std::function<Subset(std::size_t)>& values) {
  std::vector<std::string> vars = x.variables();
  int at = x.index_of(v);
  if (at < 0) vars.push_back(v);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Subset s = values(i);
    for (Element a = 0; a < 32; ++a) {
      if (!s.contains(a)) continue;
      Row r = x.rows()[i];
      if (at < 0)
        r.push_back(a);
      else
        r[at] = a;
      rows.push_back(std::move(r));
    }
  }
  return Team(std::move(vars), std::move(rows));
}

}  // namespace

Team duplicate(const Team& x, const Structure& m, const std::string& v) {
  Subset all = Subset::full(m.size());
  return extend(x, v, [&](std::size_t) { return all; });
}

Team supplement(const Team& x, const SupplementFunction& f, const std::string& v) {
  if (!(f.source() == x)) throw ModelError("supplementing function is not defined on this team");
  return extend(x, v, [&](std::size_t i) { return f(i); });
}

bool v_equivalent(const Assignment& s, const Assignment& t, const VarSet& v) {
  if (s.size() != t.size()) throw ModelError("assignments have different domains");
  for (const auto& [var, a] : s) {
    auto it = t.find(var);
    if (it == t.end()) throw ModelError("assignments have different domains");
    if (!v.count(var) && it->second != a) return false;
  }
  return true;
}

namespace {

Row key_outside(const Team& x, const Row& r, const VarSet& v) {
  Row k;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!v.count(x.variables()[i])) k.push_back(r[i]);
  return k;
}

}  // namespace

bool is_uniform(const SupplementFunction& f, const VarSet& v) {
  for (const auto& cls : uniform_classes(f.source(), v))
    for (auto i : cls)
      if (!(f(i) == f(cls.front()))) return false;
  return true;
}

std::vector<std::vector<std::size_t>> uniform_classes(const Team& x, const VarSet& v) {
  std::vector<std::vector<std::size_t>> classes;
  std::map<Row, std::size_t> index;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [it, fresh] = index.emplace(key_outside(x, x.rows()[i], v), classes.size());
    if (fresh) classes.emplace_back();
    classes[it->second].push_back(i);
  }
  return classes;
}

void for_each_uniform_function(const Team& x, const VarSet& v, const std::vector<Subset>& candidates,
                               const std::function<void(const SupplementFunction&)>& fn) {
  auto classes = uniform_classes(x, v);
  if (candidates.empty() && !classes.empty()) return;
  std::vector<std::size_t> pick(classes.size(), 0);
  while (true) {
    std::vector<Subset> choice(x.size());
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (auto i : classes[c]) choice[i] = candidates[pick[c]];
    fn(SupplementFunction(x, std::move(choice)));
    std::size_t c = 0;
    while (c < pick.size() && ++pick[c] == candidates.size()) pick[c++] = 0;
    if (c == pick.size()) return;
  }
}

std::vector<SupplementFunction> enumerate_uniform_functions(const Team& x, const VarSet& v,
                                                            const std::vector<Subset>& candidates) {
  std::vector<SupplementFunction> out;
  for_each_uniform_function(x, v, candidates, [&](const SupplementFunction& f) { out.push_back(f); });
  return out;
}

bool uniform_subset(const std::vector<Assignment>& y, const Team& x, const VarSet& w) {
  for (const auto& s : y)
    if (!x.contains(s)) throw ModelError("uniform_subset: Y is not a subset of X");
  auto in_y = [&](const Assignment& s) { return std::find(y.begin(), y.end(), s) != y.end(); };
  auto all = x.assignments();
  for (const auto& s : y)
    for (const auto& t : all)
      if (v_equivalent(s, t, w) && !in_y(t)) return false;
  return true;
}

Team restrict(const Team& x, const VarSet& u) {
  std::vector<std::string> vars;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.variables().size(); ++i)
    if (u.count(x.variables()[i])) {
      vars.push_back(x.variables()[i]);
      keep.push_back(i);
    }
  std::vector<Row> rows;
  for (const Row& r : x.rows()) {
    Row out;
    for (auto i : keep) out.push_back(r[i]);
    rows.push_back(std::move(out));
  }
  return Team(std::move(vars), std::move(rows));
}

Team drop(const Team& x, const std::string& v) {
  VarSet u = x.domain();
  u.erase(v);
  return restrict(x, u);
}

std::set<std::vector<Element>> relation_of(const Team& x, const std::vector<std::string>& vars) {
  std::vector<int> idx;
  for (const auto& v : vars) {
    int i = x.index_of(v);
    if (i < 0) throw ModelError("relation_of: variable " + v + " not in team domain");
    idx.push_back(i);
  }
  std::set<std::vector<Element>> out;
  for (const Row& r : x.rows()) {
    std::vector<Element> t;
    for (int i : idx) t.push_back(r[i]);
    out.insert(std::move(t));
  }
  return out;
}

Team rename(const Team& x, const std::string& from, const std::string& to) {
  int i = x.index_of(from);
  if (i < 0) throw ModelError("rename: variable " + from + " not in team domain");
  if (from != to && x.index_of(to) >= 0) throw ModelError("rename: variable " + to + " already in team domain");
  std::vector<std::string> vars = x.variables();
  vars[i] = to;
  return Team(std::move(vars), x.rows());
}

std::vector<Team> v_expansions(const Team& x, const std::string& v, const Structure& m) {
  if (x.index_of(v) >= 0) throw ModelError("v_expansions: variable " + v + " already in team domain");
  std::vector<Subset> nonempty;
  for (std::uint32_t b = 1; b < (1u << m.size()); ++b) nonempty.push_back(Subset{b});
  std::set<Team> out;
  for_each_uniform_function(x, {}, nonempty, [&](const SupplementFunction& f) { out.insert(supplement(x, f, v)); });
  return {out.begin(), out.end()};
}

std::string default_element_name(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('a' + i));
  return "e" + std::to_string(i);
}

Structure anonymous_structure(std::size_t n) {
  std::vector<std::string> dom;
  for (std::size_t i = 0; i < n; ++i) dom.push_back(default_element_name(i));
  return Structure(std::move(dom));
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& msg) {
  throw ModelError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Structure parse_structure(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> domain;
  bool have_domain = false;
  std::vector<std::pair<std::size_t, std::string>> deferred;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("domain:", 0) == 0) {
      if (have_domain) fail_at(lineno, "domain declared twice");
      domain = words(line.substr(7));
      have_domain = true;
    } else if (line.rfind("rel ", 0) == 0 || line.rfind("const ", 0) == 0) {
      deferred.emplace_back(lineno, line);
    } else {
      fail_at(lineno, "unrecognized line '" + line + "'");
    }
  }
  if (!have_domain) throw ModelError("structure file lacks a domain line");
  auto lookup = [&](std::size_t ln, const std::string& name) -> Element {
    auto it = std::find(domain.begin(), domain.end(), name);
    if (it == domain.end()) fail_at(ln, "unknown element '" + name + "'");
    return static_cast<Element>(it - domain.begin());
  };
  std::map<std::string, Relation> rels;
  std::map<std::string, Element> consts;
  for (const auto& [ln, line] : deferred) {
    if (line.rfind("const ", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail_at(ln, "expected 'const NAME = ELEMENT'");
      std::string name = trim(line.substr(6, eq - 6));
      std::string val = trim(line.substr(eq + 1));
      if (name.empty() || val.empty()) fail_at(ln, "expected 'const NAME = ELEMENT'");
      if (!consts.emplace(name, lookup(ln, val)).second) fail_at(ln, "constant declared twice");
      continue;
    }
    auto colon = line.find(':');
    auto slash = line.find('/');
    if (colon == std::string::npos || slash == std::string::npos || slash > colon)
      fail_at(ln, "expected 'rel NAME/ARITY: ...'");
    std::string name = trim(line.substr(4, slash - 4));
    std::size_t arity = 0;
    try {
      arity = std::stoul(trim(line.substr(slash + 1, colon - slash - 1)));
    } catch (const std::exception&) {
      fail_at(ln, "bad arity");
    }
    Relation rel{arity, {}};
    std::string body = line.substr(colon + 1);
    if (arity == 1) {
      for (const auto& w : words(body)) rel.tuples.insert({lookup(ln, w)});
    } else {
      std::size_t pos = 0;
      while ((pos = body.find('(', pos)) != std::string::npos) {
        auto close = body.find(')', pos);
        if (close == std::string::npos) fail_at(ln, "unterminated tuple");
        std::string inner = body.substr(pos + 1, close - pos - 1);
        std::vector<Element> t;
        std::istringstream parts(inner);
        for (std::string p; std::getline(parts, p, ',');) t.push_back(lookup(ln, trim(p)));
        if (t.size() != arity) fail_at(ln, "tuple arity mismatch");
        rel.tuples.insert(std::move(t));
        pos = close + 1;
      }
      if (trim(body).size() && body.find('(') == std::string::npos) fail_at(ln, "tuples must be parenthesized");
    }
    if (!rels.emplace(name, std::move(rel)).second) fail_at(ln, "relation declared twice");
  }
  return Structure(std::move(domain), std::move(rels), std::move(consts));
}

std::string print_structure(const Structure& m) {
  std::ostringstream out;
  out << "domain:";
  for (const auto& a : m.domain()) out << ' ' << a;
  out << '\n';
  for (const auto& [name, rel] : m.relations()) {
    out << "rel " << name << '/' << rel.arity << ':';
    for (const auto& t : rel.tuples) {
      if (rel.arity == 1) {
        out << ' ' << m.name(t[0]);
        continue;
      }
      out << " (";
      for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << m.name(t[i]);
      out << ')';
    }
    out << '\n';
  }
  for (const auto& [name, a] : m.constants()) out << "const " << name << " = " << m.name(a) << '\n';
  return out.str();
}

Team parse_team(const std::string& text, const Structure& m) {
  std::istringstream in(text);
  std::size_t lineno = 0;
  std::vector<std::string> vars;
  bool have_vars = false;
  std::vector<Row> rows;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!have_vars) {
      if (line.rfind("vars:", 0) != 0) fail_at(lineno, "team file must start with 'vars:'");
      vars = words(line.substr(5));
      have_vars = true;
      continue;
    }
    // "{}" stands for the empty assignment.
    std::map<std::string, Element> s;
    if (line != "{}") {
      for (const auto& w : words(line)) {
        auto eq = w.find('=');
        if (eq == std::string::npos) fail_at(lineno, "expected VAR=ELEMENT, got '" + w + "'");
        std::string var = w.substr(0, eq);
        std::string val = w.substr(eq + 1);
        if (!m.has_element(val)) fail_at(lineno, "unknown element '" + val + "'");
        if (!s.emplace(var, m.element(val)).second) fail_at(lineno, "variable bound twice");
      }
    }
    Row r;
    for (const auto& v : vars) {
      auto it = s.find(v);
      if (it == s.end()) fail_at(lineno, "row lacks variable " + v);
      r.push_back(it->second);
    }
    if (s.size() != vars.size()) fail_at(lineno, "row binds a variable not listed in 'vars:'");
    rows.push_back(std::move(r));
  }
  if (!have_vars) throw ModelError("team file lacks a 'vars:' line");
  return Team(std::move(vars), std::move(rows));
}

std::string print_team(const Team& x, const Structure& m) {
  std::ostringstream out;
  out << "vars:";
  for (const auto& v : x.variables()) out << ' ' << v;
  out << '\n';
  for (const Row& r : x.rows()) {
    if (r.empty()) {
      out << "{}\n";
      continue;
    }
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << x.variables()[i] << '=' << m.name(r[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace teamq
