#include "teamq/syntax.hpp"

#include <cctype>
#include <functional>
#include <sstream>

namespace teamq {

Formula make_atom(std::string rel, std::vector<Term> args, bool negated) {
  if (args.empty()) throw std::invalid_argument("atom needs at least one argument");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::atom;
  n->relation = std::move(rel);
  n->terms = std::move(args);
  n->negated = negated;
  return n;
}

Formula make_eq(Term a, Term b, bool negated) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::equality;
  n->terms = {std::move(a), std::move(b)};
  n->negated = negated;
  return n;
}

namespace {

Formula make_binary(NodeKind k, Formula l, Formula r, VarSet w) {
  if (!l || !r) throw std::invalid_argument("connective needs two operands");
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->left = std::move(l);
  n->right = std::move(r);
  n->slash = std::move(w);
  return n;
}

}  // namespace

Formula make_and(Formula l, Formula r, VarSet w) { return make_binary(NodeKind::conj, l, r, std::move(w)); }
Formula make_or(Formula l, Formula r, VarSet w) { return make_binary(NodeKind::disj, l, r, std::move(w)); }

Formula make_quant(QuantKind k, std::string var, Formula body, VarSet v, std::string qname, bool backslash) {
  if (!body) throw std::invalid_argument("quantifier needs a body");
  if ((k == QuantKind::mostowski || k == QuantKind::team) && qname.empty())
    throw std::invalid_argument("named quantifier needs a name");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::quant;
  n->quant = k;
  n->var = std::move(var);
  n->left = std::move(body);
  n->slash = std::move(v);
  n->qname = (k == QuantKind::exists || k == QuantKind::forall) ? std::string() : std::move(qname);
  n->backslash = backslash;
  return n;
}

Formula make_exists(std::string var, Formula body, VarSet v) {
  return make_quant(QuantKind::exists, std::move(var), std::move(body), std::move(v));
}

Formula make_forall(std::string var, Formula body, VarSet v) {
  return make_quant(QuantKind::forall, std::move(var), std::move(body), std::move(v));
}

Formula with_children(const Formula& f, Formula l, Formula r) {
  auto n = std::make_shared<Node>(*f);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}

Formula with_slash(const Formula& f, VarSet s) {
  auto n = std::make_shared<Node>(*f);
  n->slash = std::move(s);
  return n;
}

Formula with_var(const Formula& f, std::string v) {
  auto n = std::make_shared<Node>(*f);
  n->var = std::move(v);
  return n;
}

bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->negated != b->negated || a->relation != b->relation || !(a->terms == b->terms) ||
      a->slash != b->slash || a->var != b->var || a->backslash != b->backslash)
    return false;
  if (a->kind == NodeKind::quant && (a->quant != b->quant || a->qname != b->qname)) return false;
  return equal(a->left, b->left) && equal(a->right, b->right);
}

// ---------------------------------------------------------------- parser

namespace {

enum class Tok { ident, lparen, rparen, lbrace, rbrace, comma, slash, backslash, amp, bar, tilde, eq, neq, iff, hash, dot, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::ident, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    auto one = [&](Tok k) {
      out.push_back({k, std::string(1, c), i});
      ++i;
    };
    switch (c) {
      case '(': one(Tok::lparen); break;
      case ')': one(Tok::rparen); break;
      case '{': one(Tok::lbrace); break;
      case '}': one(Tok::rbrace); break;
      case ',': one(Tok::comma); break;
      case '/': one(Tok::slash); break;
      case '\\': one(Tok::backslash); break;
      case '&': one(Tok::amp); break;
      case '|': one(Tok::bar); break;
      case '~': one(Tok::tilde); break;
      case '=': one(Tok::eq); break;
      case '#': one(Tok::hash); break;
      case '.': one(Tok::dot); break;
      case '!':
        if (i + 1 < s.size() && s[i + 1] == '=') {
          out.push_back({Tok::neq, "!=", i});
          i += 2;
          break;
        }
        throw SyntaxError("unexpected '!'", i);
      case '<':
        if (s.compare(i, 3, "<->") == 0) {
          out.push_back({Tok::iff, "<->", i});
          i += 3;
          break;
        }
        throw SyntaxError("unexpected '<'", i);
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

Formula negate_qf(const Formula& f, std::size_t pos) {
  switch (f->kind) {
    case NodeKind::atom: return make_atom(f->relation, f->terms, !f->negated);
    case NodeKind::equality: return make_eq(f->terms[0], f->terms[1], !f->negated);
    case NodeKind::conj:
    case NodeKind::disj:
      if (!f->slash.empty()) break;
      if (f->kind == NodeKind::conj) return make_or(negate_qf(f->left, pos), negate_qf(f->right, pos));
      return make_and(negate_qf(f->left, pos), negate_qf(f->right, pos));
    case NodeKind::quant: break;
  }
  throw SyntaxError("'<->' needs quantifier-free first-order operands", pos);
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Formula parse() {
    Formula f = formula();
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    next();
  }

  std::string ident(const char* what) {
    if (peek().kind != Tok::ident) fail(std::string("expected ") + what);
    return next().text;
  }

  bool at_qhead() const {
    if (peek().kind != Tok::lparen || peek(1).kind != Tok::ident) return false;
    const std::string& w = peek(1).text;
    if ((w == "E" || w == "A") && peek(2).kind == Tok::ident) return true;
    return (w == "Q" || w == "TQ") && peek(2).kind == Tok::dot;
  }

  VarSet varset() {
    expect(Tok::lbrace, "'{'");
    VarSet out;
    if (peek().kind != Tok::rbrace) {
      out.insert(ident("variable"));
      while (peek().kind == Tok::comma) {
        next();
        out.insert(ident("variable"));
      }
    }
    expect(Tok::rbrace, "'}'");
    return out;
  }

  Term term() {
    if (peek().kind == Tok::hash) {
      next();
      return Term::cst(ident("constant name"));
    }
    return Term::var(ident("term"));
  }

  Formula formula() {
    if (at_qhead()) return quantified();
    if (peek().kind == Tok::lparen) return binary();
    if (peek().kind == Tok::tilde) {
      next();
      Formula a = atom();
      return a->kind == NodeKind::atom ? make_atom(a->relation, a->terms, !a->negated)
                                       : make_eq(a->terms[0], a->terms[1], !a->negated);
    }
    return atom();
  }

  Formula quantified() {
    expect(Tok::lparen, "'('");
    std::string head = ident("quantifier");
    QuantKind kind = QuantKind::exists;
    std::string qname;
    if (head == "E") {
      kind = QuantKind::exists;
    } else if (head == "A") {
      kind = QuantKind::forall;
    } else {
      kind = head == "Q" ? QuantKind::mostowski : QuantKind::team;
      expect(Tok::dot, "'.'");
      qname = ident("quantifier name");
    }
    std::string var = ident("quantified variable");
    VarSet v;
    bool backslash = false;
    if (peek().kind == Tok::slash || peek().kind == Tok::backslash) {
      backslash = next().kind == Tok::backslash;
      v = varset();
    }
    Formula body;
    if (peek().kind == Tok::rparen) {
      next();
      body = formula();
    } else {
      // Whole-formula parenthesization: "(Q.most x BODY)".
      body = formula();
      expect(Tok::rparen, "')'");
    }
    return make_quant(kind, var, body, v, qname, backslash);
  }

  Formula binary() {
    expect(Tok::lparen, "'('");
    Formula l = formula();
    Tok op = peek().kind;
    std::size_t op_pos = peek().pos;
    if (op != Tok::amp && op != Tok::bar && op != Tok::iff) fail("expected '&', '|' or '<->'");
    next();
    VarSet w;
    if (op != Tok::iff && peek().kind == Tok::slash) {
      next();
      w = varset();
    }
    Formula r = formula();
    expect(Tok::rparen, "')'");
    if (op == Tok::amp) return make_and(l, r, w);
    if (op == Tok::bar) return make_or(l, r, w);
    if (!is_quantifier_free(l) || !is_quantifier_free(r) || !is_first_order(l) || !is_first_order(r))
      throw SyntaxError("'<->' needs quantifier-free first-order operands", op_pos);
    return make_or(make_and(l, r), make_and(negate_qf(l, op_pos), negate_qf(r, op_pos)));
  }

  Formula atom() {
    if (peek().kind == Tok::ident && peek(1).kind == Tok::lparen) {
      std::string rel = next().text;
      next();
      std::vector<Term> args{term()};
      while (peek().kind == Tok::comma) {
        next();
        args.push_back(term());
      }
      expect(Tok::rparen, "')'");
      return make_atom(rel, args);
    }
    if (peek().kind != Tok::ident && peek().kind != Tok::hash) fail("expected a formula");
    Term a = term();
    bool neg = false;
    if (peek().kind == Tok::neq)
      neg = true;
    else if (peek().kind != Tok::eq)
      fail("expected '=' or '!='");
    next();
    Term b = term();
    return make_eq(a, b, neg);
  }
};

void print_term(std::ostream& out, const Term& t) {
  if (t.constant) out << '#';
  out << t.name;
}

void print_set(std::ostream& out, const VarSet& s) {
  out << '{';
  bool first = true;
  for (const auto& v : s) {
    out << (first ? "" : ",") << v;
    first = false;
  }
  out << '}';
}

void print_rec(std::ostream& out, const Formula& f) {
  switch (f->kind) {
    case NodeKind::atom:
      if (f->negated) out << '~';
      out << f->relation << '(';
      for (std::size_t i = 0; i < f->terms.size(); ++i) {
        if (i) out << ',';
        print_term(out, f->terms[i]);
      }
      out << ')';
      return;
    case NodeKind::equality:
      print_term(out, f->terms[0]);
      out << (f->negated ? " != " : " = ");
      print_term(out, f->terms[1]);
      return;
    case NodeKind::conj:
    case NodeKind::disj:
      out << '(';
      print_rec(out, f->left);
      out << (f->kind == NodeKind::conj ? " & " : " | ");
      if (!f->slash.empty()) {
        out << '/';
        print_set(out, f->slash);
        out << ' ';
      }
      print_rec(out, f->right);
      out << ')';
      return;
    case NodeKind::quant:
      out << '(';
      switch (f->quant) {
        case QuantKind::exists: out << 'E'; break;
        case QuantKind::forall: out << 'A'; break;
        case QuantKind::mostowski: out << "Q." << f->qname; break;
        case QuantKind::team: out << "TQ." << f->qname; break;
      }
      out << ' ' << f->var;
      if (f->backslash || !f->slash.empty()) {
        out << (f->backslash ? '\\' : '/');
        print_set(out, f->slash);
      }
      out << ") ";
      print_rec(out, f->left);
      return;
  }
}

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).parse(); }

std::string print(const Formula& f) {
  std::ostringstream out;
  print_rec(out, f);
  return out.str();
}

// ---------------------------------------------------------------- variables

VarSet free_variables(const Formula& f) {
  VarSet out;
  switch (f->kind) {
    case NodeKind::atom:
    case NodeKind::equality:
      for (const auto& t : f->terms)
        if (!t.constant) out.insert(t.name);
      return out;
    case NodeKind::conj:
    case NodeKind::disj: {
      out = free_variables(f->left);
      auto r = free_variables(f->right);
      out.insert(r.begin(), r.end());
      out.insert(f->slash.begin(), f->slash.end());
      return out;
    }
    case NodeKind::quant:
      out = free_variables(f->left);
      out.erase(f->var);
      out.insert(f->slash.begin(), f->slash.end());
      return out;
  }
  return out;
}

VarSet bound_variables(const Formula& f) {
  VarSet out;
  if (f->kind == NodeKind::quant) out.insert(f->var);
  for (const auto& c : children(f)) {
    auto b = bound_variables(c);
    out.insert(b.begin(), b.end());
  }
  return out;
}

VarSet all_variables(const Formula& f) {
  VarSet out;
  for (const auto& t : f->terms)
    if (!t.constant) out.insert(t.name);
  out.insert(f->slash.begin(), f->slash.end());
  if (f->kind == NodeKind::quant) out.insert(f->var);
  for (const auto& c : children(f)) {
    auto b = all_variables(c);
    out.insert(b.begin(), b.end());
  }
  return out;
}

bool occurs(const Formula& f, const std::string& v) { return all_variables(f).count(v) > 0; }

namespace {

Formula subst_rec(const Formula& f, const std::string& x, const std::string& z) {
  auto swap_set = [&](VarSet s) {
    if (s.erase(x)) s.insert(z);
    return s;
  };
  switch (f->kind) {
    case NodeKind::atom:
    case NodeKind::equality: {
      auto n = std::make_shared<Node>(*f);
      for (auto& t : n->terms)
        if (!t.constant && t.name == x) t.name = z;
      return n;
    }
    case NodeKind::conj:
    case NodeKind::disj: {
      auto n = std::make_shared<Node>(*f);
      n->slash = swap_set(f->slash);
      n->left = subst_rec(f->left, x, z);
      n->right = subst_rec(f->right, x, z);
      return n;
    }
    case NodeKind::quant: {
      auto n = std::make_shared<Node>(*f);
      n->slash = swap_set(f->slash);
      if (f->var != x) n->left = subst_rec(f->left, x, z);
      return n;
    }
  }
  return f;
}

Formula map_slash(const Formula& f, const std::function<VarSet(const VarSet&)>& g) {
  auto n = std::make_shared<Node>(*f);
  if (f->is_connective() || (f->kind == NodeKind::quant && !f->backslash)) n->slash = g(f->slash);
  if (f->left) n->left = map_slash(f->left, g);
  if (f->right) n->right = map_slash(f->right, g);
  return n;
}

}  // namespace

Formula substitute(const Formula& f, const std::string& x, const std::string& z) {
  if (x != z && occurs(f, z)) throw std::invalid_argument("substitute: " + z + " occurs in the formula");
  return subst_rec(f, x, z);
}

Formula slash_all(const Formula& f, const VarSet& v) {
  return map_slash(f, [&](const VarSet& s) {
    VarSet out = s;
    out.insert(v.begin(), v.end());
    return out;
  });
}

Formula slash_nonempty(const Formula& f, const VarSet& v) {
  return map_slash(f, [&](const VarSet& s) {
    if (s.empty()) return s;
    VarSet out = s;
    out.insert(v.begin(), v.end());
    return out;
  });
}

Formula unslash(const Formula& f, const std::string& v) {
  return map_slash(f, [&](const VarSet& s) {
    VarSet out = s;
    out.erase(v);
    return out;
  });
}

// ---------------------------------------------------------------- paths

std::vector<Formula> children(const Formula& f) {
  std::vector<Formula> out;
  if (f->left) out.push_back(f->left);
  if (f->right) out.push_back(f->right);
  return out;
}

Formula subformula_at(const Formula& f, const Path& p) {
  Formula cur = f;
  for (int i : p) {
    auto cs = children(cur);
    if (i < 0 || i >= static_cast<int>(cs.size())) throw std::out_of_range("invalid path " + print_path(p));
    cur = cs[i];
  }
  return cur;
}

Formula replace_occurrence(const Formula& f, const Path& p, const Formula& theta) {
  std::function<Formula(const Formula&, std::size_t)> rec = [&](const Formula& cur, std::size_t d) -> Formula {
    if (d == p.size()) return theta;
    auto cs = children(cur);
    int i = p[d];
    if (i < 0 || i >= static_cast<int>(cs.size())) throw std::out_of_range("invalid path " + print_path(p));
    Formula sub = rec(cs[i], d + 1);
    return i == 0 ? with_children(cur, sub, cur->right) : with_children(cur, cur->left, sub);
  };
  return rec(f, 0);
}

std::string print_path(const Path& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + std::to_string(p[i]);
  return out + "]";
}

// ---------------------------------------------------------------- predicates

namespace {

bool no_requantification(const Formula& f, VarSet& in_scope) {
  if (f->kind == NodeKind::quant) {
    if (in_scope.count(f->var)) return false;
    in_scope.insert(f->var);
    bool ok = no_requantification(f->left, in_scope);
    in_scope.erase(f->var);
    return ok;
  }
  for (const auto& c : children(f))
    if (!no_requantification(c, in_scope)) return false;
  return true;
}

void count_binders(const Formula& f, std::map<std::string, int>& n) {
  if (f->kind == NodeKind::quant) ++n[f->var];
  for (const auto& c : children(f)) count_binders(c, n);
}

// Variables with a free occurrence somewhere below, at any depth.
void free_occurrences(const Formula& f, VarSet& bound, VarSet& out) {
  auto note = [&](const std::string& v) {
    if (!bound.count(v)) out.insert(v);
  };
  for (const auto& t : f->terms)
    if (!t.constant) note(t.name);
  for (const auto& v : f->slash) note(v);
  if (f->kind == NodeKind::quant) {
    bool was = bound.count(f->var) > 0;
    bound.insert(f->var);
    free_occurrences(f->left, bound, out);
    if (!was) bound.erase(f->var);
    return;
  }
  for (const auto& c : children(f)) free_occurrences(c, bound, out);
}

}  // namespace

bool is_regular(const Formula& f) {
  VarSet bound;
  VarSet fv;
  free_occurrences(f, bound, fv);
  for (const auto& b : bound_variables(f))
    if (fv.count(b)) return false;
  VarSet scope;
  return no_requantification(f, scope);
}

bool is_strongly_regular(const Formula& f) {
  if (!is_regular(f)) return false;
  std::map<std::string, int> n;
  count_binders(f, n);
  for (const auto& [v, k] : n)
    if (k > 1) return false;
  return true;
}

bool is_quantifier_free(const Formula& f) {
  if (f->kind == NodeKind::quant) return false;
  for (const auto& c : children(f))
    if (!is_quantifier_free(c)) return false;
  return true;
}

bool is_prenex(const Formula& f) {
  Formula cur = f;
  while (cur->kind == NodeKind::quant) cur = cur->left;
  return is_quantifier_free(cur);
}

bool is_first_order(const Formula& f) {
  if (!f->slash.empty() || f->backslash) return false;
  for (const auto& c : children(f))
    if (!is_first_order(c)) return false;
  return true;
}

bool is_plain_first_order(const Formula& f) {
  if (!is_first_order(f)) return false;
  bool ok = true;
  std::function<void(const Formula&)> rec = [&](const Formula& g) {
    if (g->kind == NodeKind::quant && g->quant != QuantKind::exists && g->quant != QuantKind::forall) ok = false;
    for (const auto& c : children(g)) rec(c);
  };
  rec(f);
  return ok;
}

bool has_team_quantifier(const Formula& f) {
  if (f->kind == NodeKind::quant && f->quant == QuantKind::team) return true;
  for (const auto& c : children(f))
    if (has_team_quantifier(c)) return true;
  return false;
}

bool has_backslash(const Formula& f) {
  if (f->kind == NodeKind::quant && f->backslash) return true;
  for (const auto& c : children(f))
    if (has_backslash(c)) return true;
  return false;
}

bool is_sentence(const Formula& f) { return free_variables(f).empty(); }

std::size_t size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& c : children(f)) n += size(c);
  return n;
}

Signature signature_of(const Formula& f) {
  Signature s;
  std::function<void(const Formula&)> rec = [&](const Formula& g) {
    if (g->kind == NodeKind::atom) {
      auto [it, fresh] = s.relations.emplace(g->relation, g->terms.size());
      if (!fresh && it->second != g->terms.size())
        throw std::invalid_argument("relation " + g->relation + " used with two arities");
    }
    for (const auto& t : g->terms)
      if (t.constant) s.constants.insert(t.name);
    for (const auto& c : children(g)) rec(c);
  };
  rec(f);
  return s;
}

Signature merge(const Signature& a, const Signature& b) {
  Signature out = a;
  for (const auto& [r, k] : b.relations) {
    auto [it, fresh] = out.relations.emplace(r, k);
    if (!fresh && it->second != k) throw std::invalid_argument("relation " + r + " used with two arities");
  }
  out.constants.insert(b.constants.begin(), b.constants.end());
  return out;
}

QuantifierPrefix split_prefix(const Formula& f) {
  QuantifierPrefix out;
  Formula cur = f;
  while (cur->kind == NodeKind::quant) {
    out.prefix.push_back(cur);
    cur = cur->left;
  }
  out.matrix = cur;
  return out;
}

Formula map_quantifiers(const Formula& f, const std::function<Formula(const Formula&)>& fn) {
  if (f->is_literal()) return f;
  Formula l = f->left ? map_quantifiers(f->left, fn) : nullptr;
  Formula r = f->right ? map_quantifiers(f->right, fn) : nullptr;
  Formula g = with_children(f, l, r);
  return f->kind == NodeKind::quant ? fn(g) : g;
}

}  // namespace teamq
