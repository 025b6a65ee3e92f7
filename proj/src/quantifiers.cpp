#include "teamq/quantifiers.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace teamq {

MostowskiQuantifier MostowskiQuantifier::intensional(std::string name, Predicate p, std::string description) {
  MostowskiQuantifier q;
  q.name_ = std::move(name);
  q.pred_ = std::move(p);
  q.description_ = std::move(description);
  return q;
}

MostowskiQuantifier MostowskiQuantifier::extensional(std::string name, Tables tables) {
  MostowskiQuantifier q;
  q.name_ = std::move(name);
  q.tables_ = std::move(tables);
  std::ostringstream d;
  for (const auto& [n, sets] : q.tables_) {
    d << "@size" << n << " =";
    for (const auto& s : sets) {
      d << " {";
      for (std::size_t i = 0; i < s.size(); ++i) d << (i ? "," : "") << s[i];
      d << '}';
    }
    d << "; ";
  }
  q.description_ = d.str();
  return q;
}

bool MostowskiQuantifier::contains(Subset s, const Structure& m) const {
  if (pred_) return pred_(s.size(), static_cast<long>(m.size()));
  auto l = localize(m);
  return std::binary_search(l.begin(), l.end(), s);
}

std::vector<Subset> MostowskiQuantifier::localize(const Structure& m) const {
  std::vector<Subset> out;
  if (pred_) {
    for (std::uint32_t b = 0; b < (1u << m.size()); ++b)
      if (pred_(__builtin_popcount(b), static_cast<long>(m.size()))) out.push_back(Subset{b});
    return out;
  }
  auto it = tables_.find(m.size());
  if (it == tables_.end()) return out;
  for (const auto& names : it->second) {
    Subset s;
    for (const auto& n : names) {
      if (!m.has_element(n))
        throw QuantifierError("extensional quantifier " + name_ + " names element '" + n + "' not in the structure");
      s = s.with(m.element(n));
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Subset> MostowskiQuantifier::localize(std::size_t n) const { return localize(anonymous_structure(n)); }

MostowskiQuantifier q_exists() {
  return MostowskiQuantifier::intensional("exists", [](long s, long) { return s >= 1; }, "card(S) >= 1");
}
MostowskiQuantifier q_forall() {
  return MostowskiQuantifier::intensional("forall", [](long s, long m) { return s == m; }, "card(S) == card(M)");
}
MostowskiQuantifier q_trivial() {
  return MostowskiQuantifier::intensional("trivial", [](long, long) { return true; }, "true");
}
MostowskiQuantifier q_exactly(long k) {
  return MostowskiQuantifier::intensional("exactly" + std::to_string(k), [k](long s, long) { return s == k; },
                                          "card(S) == " + std::to_string(k));
}
MostowskiQuantifier q_atleast(long k) {
  return MostowskiQuantifier::intensional("atleast" + std::to_string(k), [k](long s, long) { return s >= k; },
                                          "card(S) >= " + std::to_string(k));
}
MostowskiQuantifier q_atmost(long k) {
  return MostowskiQuantifier::intensional("atmost" + std::to_string(k), [k](long s, long) { return s <= k; },
                                          "card(S) <= " + std::to_string(k));
}
MostowskiQuantifier q_most() {
  return MostowskiQuantifier::intensional("most", [](long s, long m) { return 2 * s >= m; }, "2*card(S) >= card(M)");
}

// ---------------------------------------------------------------- families

void FunctionFamily::normalize() {
  std::sort(functions.begin(), functions.end());
  functions.erase(std::unique(functions.begin(), functions.end()), functions.end());
}

bool FunctionFamily::contains(const std::vector<Subset>& f) const {
  return std::find(functions.begin(), functions.end(), f) != functions.end();
}

TeamQuantifier::TeamQuantifier(std::string name, Definition def, bool bans_empty_function)
    : name_(std::move(name)), def_(std::move(def)), bans_empty_(bans_empty_function) {}

TeamQuantifier TeamQuantifier::witness(std::string name, ValueTest test) {
  TeamQuantifier q(
      std::move(name),
      [test](const Structure& m, const FunctionFamily& fam) {
        return std::any_of(fam.functions.begin(), fam.functions.end(), [&](const auto& f) {
          return std::all_of(f.begin(), f.end(), [&](Subset s) { return test(m, s); });
        });
      },
      false);
  q.test_ = std::move(test);
  q.shape_ = Shape::witness;
  q.keeps_dc_ = true;
  return q;
}

bool TeamQuantifier::accepts(const Structure& m, FunctionFamily f) const {
  if (bans_empty_ && f.rows == 0) f.functions.clear();
  return def_(m, f);
}

namespace {

bool all_values_in(const std::vector<Subset>& f, const std::vector<Subset>& q) {
  for (Subset s : f)
    if (!std::binary_search(q.begin(), q.end(), s)) return false;
  return true;
}

bool pointwise_geq(const std::vector<Subset>& g, const std::vector<Subset>& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f[i].subset_of(g[i])) return false;
  return true;
}

bool has_bounded_witness(const FunctionFamily& fam, const std::function<bool(Subset)>& in_q) {
  auto ok = [&](const std::vector<Subset>& f) { return std::all_of(f.begin(), f.end(), in_q); };
  for (const auto& f : fam.functions) {
    if (!ok(f)) continue;
    bool bounded = true;
    for (const auto& g : fam.functions)
      if (pointwise_geq(g, f) && !ok(g)) {
        bounded = false;
        break;
      }
    if (bounded) return true;
  }
  return false;
}

}  // namespace

TeamQuantifier lift_E(const MostowskiQuantifier& q) {
  return TeamQuantifier::witness("liftE_" + q.name(), [q](const Structure& m, Subset s) { return q.contains(s, m); });
}

TeamQuantifier TeamQuantifier::bounded_witness(std::string name, ValueTest test) {
  TeamQuantifier q(
      std::move(name),
      [test](const Structure& m, const FunctionFamily& fam) {
        return has_bounded_witness(fam, [&](Subset s) { return test(m, s); });
      },
      false);
  q.test_ = std::move(test);
  q.shape_ = Shape::bounded_witness;
  return q;
}

TeamQuantifier lift_B(const MostowskiQuantifier& q) {
  return TeamQuantifier::bounded_witness("liftB_" + q.name(),
                                         [q](const Structure& m, Subset s) { return q.contains(s, m); });
}

TeamQuantifier lift_Bprime(const MostowskiQuantifier& q) {
  return TeamQuantifier(
      "liftBprime_" + q.name(),
      [q](const Structure& m, const FunctionFamily& fam) {
        auto qm = q.localize(m);
        return !fam.functions.empty() && std::all_of(fam.functions.begin(), fam.functions.end(),
                                                     [&](const auto& f) { return all_values_in(f, qm); });
      },
      false);
}

TeamQuantifier hat_exists() {
  return TeamQuantifier::witness("hat_exists", [](const Structure&, Subset s) { return !s.empty(); });
}

TeamQuantifier hat_forall() {
  return TeamQuantifier::witness("hat_forall",
                                 [](const Structure& m, Subset s) { return s == Subset::full(m.size()); });
}

TeamQuantifier hat_exactly_fn(long k) {
  return TeamQuantifier(
      "hat_exactly_fn" + std::to_string(k),
      [k](const Structure&, const FunctionFamily& fam) {
        return std::any_of(fam.functions.begin(), fam.functions.end(), [&](const auto& f) {
          return std::all_of(f.begin(), f.end(), [&](Subset s) { return s.size() == k; });
        });
      },
      false);
}

TeamQuantifier hat_exactly_nm(long k) {
  return TeamQuantifier(
      "hat_exactly_nm" + std::to_string(k),
      [k](const Structure&, const FunctionFamily& fam) {
        return !fam.functions.empty() && std::all_of(fam.functions.begin(), fam.functions.end(), [&](const auto& f) {
          return std::all_of(f.begin(), f.end(), [&](Subset s) { return s.size() == k; });
        });
      },
      false);
}

TeamQuantifier hat_exactly_b(long k) {
  return TeamQuantifier::bounded_witness("hat_exactly_b" + std::to_string(k),
                                         [k](const Structure&, Subset s) { return s.size() == k; });
}

TeamQuantifier hat_count_functions(long k, bool nonempty_values) {
  return TeamQuantifier(
      (nonempty_values ? "count_functions_nonempty" : "count_functions") + std::to_string(k),
      [k, nonempty_values](const Structure&, const FunctionFamily& fam) {
        if (static_cast<long>(fam.functions.size()) != k) return false;
        for (const auto& f : fam.functions) {
          if (f.empty()) return false;
          if (nonempty_values && std::any_of(f.begin(), f.end(), [](Subset s) { return s.empty(); })) return false;
        }
        return true;
      },
      true);
}

TeamQuantifier most_functions() {
  return TeamQuantifier(
      "most_functions",
      [](const Structure& m, const FunctionFamily& fam) {
        long singleton_valued = 0;
        for (const auto& f : fam.functions)
          if (std::all_of(f.begin(), f.end(), [](Subset s) { return s.size() == 1; })) ++singleton_valued;
        // card(M^X) = |M|^|X|; compare 2 * count >= |M|^|X| exactly.
        long double total = 1;
        for (std::size_t i = 0; i < fam.rows; ++i) total *= static_cast<long double>(m.size());
        return 2.0L * static_cast<long double>(singleton_valued) >= total;
      },
      true);
}

// ---------------------------------------------------------------- conditions

namespace {

struct ExprParser {
  std::string s;
  std::size_t i = 0;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(const std::string& t) {
    ws();
    if (s.compare(i, t.size(), t) == 0) {
      i += t.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw QuantifierError("condition '" + s + "': " + msg + " at column " + std::to_string(i + 1));
  }

  using Fn = std::function<long(long, long)>;

  Fn primary() {
    ws();
    if (eat("(")) {
      Fn e = sum();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    if (eat("card")) {
      if (!eat("(")) fail("expected '('");
      bool is_s = eat("S");
      if (!is_s && !eat("M")) fail("expected S or M");
      if (!eat(")")) fail("expected ')'");
      if (is_s) return [](long cs, long) { return cs; };
      return [](long, long cm) { return cm; };
    }
    if (eat("-")) {
      Fn e = primary();
      return [e](long a, long b) { return -e(a, b); };
    }
    ws();
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) fail("expected a number or card(...)");
    long v = std::stol(s.substr(i, j - i));
    i = j;
    return [v](long, long) { return v; };
  }

  Fn product() {
    Fn e = primary();
    while (true) {
      if (eat("*")) {
        Fn r = primary();
        e = [e, r](long a, long b) { return e(a, b) * r(a, b); };
      } else if (eat("/")) {
        Fn r = primary();
        e = [e, r](long a, long b) {
          long d = r(a, b);
          if (d == 0) throw QuantifierError("division by zero in quantifier condition");
          return e(a, b) / d;
        };
      } else {
        return e;
      }
    }
  }

  Fn sum() {
    Fn e = product();
    while (true) {
      if (eat("+")) {
        Fn r = product();
        e = [e, r](long a, long b) { return e(a, b) + r(a, b); };
      } else if (eat("-")) {
        Fn r = product();
        e = [e, r](long a, long b) { return e(a, b) - r(a, b); };
      } else {
        return e;
      }
    }
  }

  MostowskiQuantifier::Predicate condition() {
    Fn l = sum();
    ws();
    static const std::vector<std::string> ops{"==", "!=", "<=", ">=", "<", ">"};
    std::string op;
    for (const auto& o : ops)
      if (eat(o)) {
        op = o;
        break;
      }
    if (op.empty()) fail("expected a comparator");
    Fn r = sum();
    ws();
    if (i != s.size()) fail("trailing input");
    if (op == "==") return [l, r](long a, long b) { return l(a, b) == r(a, b); };
    if (op == "!=") return [l, r](long a, long b) { return l(a, b) != r(a, b); };
    if (op == "<=") return [l, r](long a, long b) { return l(a, b) <= r(a, b); };
    if (op == ">=") return [l, r](long a, long b) { return l(a, b) >= r(a, b); };
    if (op == "<") return [l, r](long a, long b) { return l(a, b) < r(a, b); };
    return [l, r](long a, long b) { return l(a, b) > r(a, b); };
  }
};

std::optional<long> suffix_number(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  std::string rest = name.substr(prefix.size());
  if (!std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return std::stol(rest);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

MostowskiQuantifier::Predicate parse_condition(const std::string& text) {
  ExprParser p{text};
  return p.condition();
}

// ---------------------------------------------------------------- registry

void Registry::add(MostowskiQuantifier q) {
  auto name = q.name();
  mostowski_[name] = std::make_shared<const MostowskiQuantifier>(std::move(q));
}

void Registry::add(TeamQuantifier q) {
  auto name = q.name();
  team_[name] = std::make_shared<const TeamQuantifier>(std::move(q));
}

std::shared_ptr<const MostowskiQuantifier> Registry::mostowski(const std::string& name) const {
  if (auto it = mostowski_.find(name); it != mostowski_.end()) return it->second;
  auto make = [](MostowskiQuantifier q) { return std::make_shared<const MostowskiQuantifier>(std::move(q)); };
  if (name == "exists" || name == "some") return make(q_exists());
  if (name == "forall" || name == "all") return make(q_forall());
  if (name == "trivial") return make(q_trivial());
  if (name == "most") return make(q_most());
  if (auto k = suffix_number(name, "exactly")) return make(q_exactly(*k));
  if (auto k = suffix_number(name, "atleast")) return make(q_atleast(*k));
  if (auto k = suffix_number(name, "atmost")) return make(q_atmost(*k));
  throw QuantifierError("unknown quantifier Q." + name);
}

std::shared_ptr<const TeamQuantifier> Registry::team(const std::string& name) const {
  if (auto it = team_.find(name); it != team_.end()) return it->second;
  auto make = [](TeamQuantifier q) { return std::make_shared<const TeamQuantifier>(std::move(q)); };
  if (name == "hat_exists") return make(hat_exists());
  if (name == "hat_forall") return make(hat_forall());
  if (name == "most_functions") return make(most_functions());
  if (auto k = suffix_number(name, "hat_exactly_fn")) return make(hat_exactly_fn(*k));
  if (auto k = suffix_number(name, "hat_exactly_nm")) return make(hat_exactly_nm(*k));
  if (auto k = suffix_number(name, "hat_exactly_b")) return make(hat_exactly_b(*k));
  if (auto k = suffix_number(name, "count_functions_nonempty")) return make(hat_count_functions(*k, true));
  if (auto k = suffix_number(name, "count_functions")) return make(hat_count_functions(*k));
  for (const auto& [prefix, lift] :
       std::vector<std::pair<std::string, TeamQuantifier (*)(const MostowskiQuantifier&)>>{
           {"liftBprime_", lift_Bprime}, {"liftE_", lift_E}, {"liftB_", lift_B}}) {
    if (name.rfind(prefix, 0) == 0) {
      TeamQuantifier q = lift(*mostowski(name.substr(prefix.size())));
      q.rename(name);
      return make(std::move(q));
    }
  }
  throw QuantifierError("unknown team quantifier TQ." + name);
}

bool Registry::has_mostowski(const std::string& name) const {
  try {
    mostowski(name);
    return true;
  } catch (const QuantifierError&) {
    return false;
  }
}

bool Registry::has_team(const std::string& name) const {
  try {
    team(name);
    return true;
  } catch (const QuantifierError&) {
    return false;
  }
}

std::vector<std::string> Registry::configured_names() const {
  std::vector<std::string> out;
  for (const auto& [n, q] : mostowski_) out.push_back("Q." + n);
  for (const auto& [n, q] : team_) out.push_back("TQ." + n);
  return out;
}

void Registry::load_config(const std::string& text) {
  std::istringstream in(text);
  std::size_t lineno = 0;
  static const std::regex name_re("[A-Za-z_][A-Za-z0-9_]*");
  auto fail = [&](const std::string& msg) {
    throw QuantifierError("quantifier config line " + std::to_string(lineno) + ": " + msg);
  };
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    std::string kind;
    words >> kind;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected '='");
    std::string lhs = trim(line.substr(kind.size(), eq - kind.size()));
    std::string rhs = trim(line.substr(eq + 1));
    if (kind == "mostowski") {
      if (!std::regex_match(lhs, name_re)) fail("bad quantifier name '" + lhs + "'");
      try {
        add(MostowskiQuantifier::intensional(lhs, parse_condition(rhs), rhs));
      } catch (const QuantifierError& e) {
        fail(e.what());
      }
    } else if (kind == "extensional") {
      auto at = lhs.find("@size");
      if (at == std::string::npos) fail("expected 'extensional NAME @sizeN = {...}'");
      std::string name = trim(lhs.substr(0, at));
      if (!std::regex_match(name, name_re)) fail("bad quantifier name '" + name + "'");
      std::size_t n = 0;
      try {
        n = std::stoul(lhs.substr(at + 5));
      } catch (const std::exception&) {
        fail("bad size");
      }
      if (n == 0 || n > kMaxDomain) fail("size out of range");
      std::vector<std::vector<std::string>> sets;
      std::size_t pos = 0;
      while ((pos = rhs.find('{', pos)) != std::string::npos) {
        auto close = rhs.find('}', pos);
        if (close == std::string::npos) fail("unterminated set");
        std::vector<std::string> members;
        std::istringstream parts(rhs.substr(pos + 1, close - pos - 1));
        for (std::string p; std::getline(parts, p, ',');)
          if (!trim(p).empty()) members.push_back(trim(p));
        sets.push_back(std::move(members));
        pos = close + 1;
      }
      auto& tables = extensional_[name];
      auto& slot = tables[n];
      slot.insert(slot.end(), sets.begin(), sets.end());
      add(MostowskiQuantifier::extensional(name, tables));
    } else if (kind == "team") {
      if (!std::regex_match(lhs, name_re)) fail("bad quantifier name '" + lhs + "'");
      static const std::regex call_re(R"(([A-Za-z_]+)\s*(?:\(\s*([A-Za-z0-9_]+)\s*(?:,\s*([A-Za-z_]+)\s*)?\))?)");
      std::smatch m;
      if (!std::regex_match(rhs, m, call_re)) fail("bad team quantifier definition '" + rhs + "'");
      std::string fn = m[1];
      std::string arg = m[2];
      std::string flag = m[3];
      auto need_k = [&]() -> long {
        if (arg.empty() || !std::all_of(arg.begin(), arg.end(), [](char c) { return std::isdigit(c); }))
          fail(fn + " needs an integer argument");
        return std::stol(arg);
      };
      auto need_q = [&]() -> MostowskiQuantifier {
        if (arg.empty()) fail(fn + " needs a quantifier argument");
        std::shared_ptr<const MostowskiQuantifier> q;
        try {
          q = mostowski(arg);
        } catch (const QuantifierError& e) {
          fail(e.what());
        }
        return *q;
      };
      auto named = [&](TeamQuantifier q) {
        q.rename(lhs);
        add(std::move(q));
      };
      if (!flag.empty() && !(fn == "count_functions" && flag == "nonempty")) fail("unexpected flag '" + flag + "'");
      if (fn == "liftE")
        named(lift_E(need_q()));
      else if (fn == "liftB")
        named(lift_B(need_q()));
      else if (fn == "liftBprime")
        named(lift_Bprime(need_q()));
      else if (fn == "count_functions")
        named(hat_count_functions(need_k(), flag == "nonempty"));
      else if (fn == "hat_exactly_fn")
        named(hat_exactly_fn(need_k()));
      else if (fn == "hat_exactly_nm")
        named(hat_exactly_nm(need_k()));
      else if (fn == "hat_exactly_b")
        named(hat_exactly_b(need_k()));
      else if (fn == "most_functions" && arg.empty())
        named(most_functions());
      else if (fn == "hat_exists" && arg.empty())
        named(hat_exists());
      else if (fn == "hat_forall" && arg.empty())
        named(hat_forall());
      else
        fail("unknown team quantifier constructor '" + fn + "'");
    } else {
      fail("unknown declaration '" + kind + "'");
    }
  }
}

// ---------------------------------------------------------------- properties of Q^M

namespace {

void guard_size(const Structure& m) {
  if (m.size() > 6) throw QuantifierError("property check guard: |M| must be at most 6");
}

}  // namespace

bool is_monotone_on(const MostowskiQuantifier& q, const Structure& m) {
  guard_size(m);
  auto qm = q.localize(m);
  std::set<std::uint32_t> in;
  for (auto s : qm) in.insert(s.bits);
  for (auto s : qm)
    for (Element a = 0; a < m.size(); ++a)
      if (!in.count(s.with(a).bits)) return false;
  return true;
}

bool is_union_closed_on(const MostowskiQuantifier& q, const Structure& m) {
  guard_size(m);
  auto qm = q.localize(m);
  std::set<std::uint32_t> in;
  for (auto s : qm) in.insert(s.bits);
  // Closure under pairwise unions is closure under all nonempty unions of a finite family.
  for (auto a : qm)
    for (auto b : qm)
      if (!in.count(a.bits | b.bits)) return false;
  return true;
}

bool is_emptyset_free_on(const MostowskiQuantifier& q, const Structure& m) {
  guard_size(m);
  return !q.contains(Subset{}, m);
}

// ---------------------------------------------------------------- properties of Q̂^{M,X}

std::vector<std::vector<Subset>> all_functions(std::size_t rows, std::size_t domain_size) {
  std::vector<std::vector<Subset>> out;
  std::uint32_t values = 1u << domain_size;
  std::vector<std::uint32_t> pick(rows, 0);
  while (true) {
    std::vector<Subset> f;
    for (auto p : pick) f.push_back(Subset{p});
    out.push_back(std::move(f));
    std::size_t i = 0;
    while (i < rows && ++pick[i] == values) pick[i++] = 0;
    if (i == rows) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string print_subset(Subset s, const Structure& m) {
  std::string out = "{";
  bool first = true;
  for (Element a = 0; a < m.size(); ++a)
    if (s.contains(a)) {
      out += (first ? "" : ",") + m.name(a);
      first = false;
    }
  return out + "}";
}

namespace {

constexpr std::size_t kExhaustiveUniverse = 16;

// Calls fn on every family over the universe (as a membership mask), or on
// random samples when the universe is too large.
void for_each_family(std::size_t universe, const FamilyBounds& b, PropertyCheck& out,
                     const std::function<bool(const std::vector<bool>&)>& fn) {
  if (universe <= kExhaustiveUniverse) {
    out.exhaustive = true;
    for (std::uint64_t mask = 0; mask < (1ull << universe); ++mask) {
      std::vector<bool> in(universe);
      for (std::size_t i = 0; i < universe; ++i) in[i] = (mask >> i) & 1;
      ++out.cases;
      if (!fn(in)) return;
    }
    return;
  }
  out.exhaustive = false;
  std::mt19937_64 rng(b.seed);
  for (std::size_t k = 0; k < b.samples; ++k) {
    std::vector<bool> in(universe);
    // Mix densities so that small and large families both appear.
    std::uniform_real_distribution<double> dens(0.0, 1.0);
    double p = dens(rng);
    for (std::size_t i = 0; i < universe; ++i) in[i] = dens(rng) < p;
    ++out.cases;
    if (!fn(in)) return;
  }
}

FunctionFamily family_of(const std::vector<std::vector<Subset>>& universe, const std::vector<bool>& in,
                         std::size_t rows) {
  FunctionFamily f;
  f.rows = rows;
  for (std::size_t i = 0; i < universe.size(); ++i)
    if (in[i]) f.functions.push_back(universe[i]);
  return f;
}

std::string describe_family(const FunctionFamily& f, const Structure& m) {
  std::string out = "{";
  for (std::size_t i = 0; i < f.functions.size(); ++i) {
    out += i ? ", " : "";
    out += "(";
    for (std::size_t r = 0; r < f.functions[i].size(); ++r)
      out += (r ? " " : "") + print_subset(f.functions[i][r], m);
    out += ")";
  }
  return out + "}";
}

std::size_t universe_size(const Structure& m, const Team& x) {
  long double u = 1;
  for (std::size_t i = 0; i < x.size(); ++i) u *= static_cast<long double>(1u << m.size());
  if (u > 1e6L) throw QuantifierError("function universe too large to enumerate");
  return static_cast<std::size_t>(u);
}

}  // namespace

PropertyCheck team_monotone_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b) {
  PropertyCheck out;
  auto universe = all_functions(x.size(), m.size());
  universe_size(m, x);
  for_each_family(universe.size(), b, out, [&](const std::vector<bool>& in) {
    FunctionFamily f = family_of(universe, in, x.size());
    if (!q.accepts(m, f)) return true;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (in[i]) continue;
      auto bigger = in;
      bigger[i] = true;
      FunctionFamily g = family_of(universe, bigger, x.size());
      if (!q.accepts(m, g)) {
        out.holds = false;
        out.witness = "accepted " + describe_family(f, m) + " but rejected " + describe_family(g, m);
        return false;
      }
    }
    return true;
  });
  return out;
}

PropertyCheck permutation_invariant_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b) {
  PropertyCheck out;
  auto universe = all_functions(x.size(), m.size());
  universe_size(m, x);
  std::vector<Element> g(m.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<Element>(i);
  // Row permutations induced by each g with g'(X) = X; image[i] = index of g∘s_i.
  std::vector<std::pair<std::vector<Element>, std::vector<std::size_t>>> perms;
  do {
    std::vector<std::size_t> image;
    bool closed = true;
    for (const Row& r : x.rows()) {
      Row gr;
      for (Element a : r) gr.push_back(g[a]);
      auto it = std::lower_bound(x.rows().begin(), x.rows().end(), gr);
      if (it == x.rows().end() || *it != gr) {
        closed = false;
        break;
      }
      image.push_back(static_cast<std::size_t>(it - x.rows().begin()));
    }
    if (closed) perms.emplace_back(g, image);
  } while (std::next_permutation(g.begin(), g.end()));

  auto map_subset = [](Subset s, const std::vector<Element>& g) {
    Subset o;
    for (Element a = 0; a < g.size(); ++a)
      if (s.contains(a)) o = o.with(g[a]);
    return o;
  };
  for_each_family(universe.size(), b, out, [&](const std::vector<bool>& in) {
    FunctionFamily f = family_of(universe, in, x.size());
    bool base = q.accepts(m, f);
    for (const auto& [gp, image] : perms) {
      // g''(F)(g∘s) = g[F(s)].
      FunctionFamily h;
      h.rows = x.size();
      for (const auto& fn : f.functions) {
        std::vector<Subset> img(fn.size());
        for (std::size_t r = 0; r < fn.size(); ++r) img[image[r]] = map_subset(fn[r], gp);
        h.functions.push_back(std::move(img));
      }
      h.normalize();
      if (q.accepts(m, h) != base) {
        out.holds = false;
        std::string gs;
        for (Element a = 0; a < gp.size(); ++a) gs += m.name(a) + "->" + m.name(gp[a]) + " ";
        out.witness = "permutation " + gs + "changes membership of " + describe_family(f, m);
        return false;
      }
    }
    return true;
  });
  return out;
}

namespace {

PropertyCheck size_condition(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b,
                             bool restrict_to_quality) {
  PropertyCheck out;
  auto universe = all_functions(x.size(), m.size());
  universe_size(m, x);
  // First pass: acceptance per family, the quality set q(Q̂,M,X), accepted sizes.
  std::vector<std::pair<std::vector<bool>, bool>> seen;
  std::vector<bool> quality(universe.size(), false);
  std::set<std::size_t> accepted_sizes;
  PropertyCheck scan;
  for_each_family(universe.size(), b, scan, [&](const std::vector<bool>& in) {
    bool acc = q.accepts(m, family_of(universe, in, x.size()));
    if (acc) {
      accepted_sizes.insert(std::count(in.begin(), in.end(), true));
      for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i]) quality[i] = true;
    }
    seen.emplace_back(in, acc);
    return true;
  });
  out.exhaustive = scan.exhaustive;
  for (const auto& [in, acc] : seen) {
    ++out.cases;
    if (acc) continue;
    std::size_t k = std::count(in.begin(), in.end(), true);
    if (!accepted_sizes.count(k)) continue;
    if (restrict_to_quality) {
      bool inside = true;
      for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i] && !quality[i]) inside = false;
      if (!inside) continue;
    }
    out.holds = false;
    out.witness = "a family of size " + std::to_string(k) + " is accepted but " +
                  describe_family(family_of(universe, in, x.size()), m) + " of the same size is rejected";
    return out;
  }
  return out;
}

}  // namespace

PropertyCheck cardinality_condition_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b) {
  return size_condition(q, m, x, b, false);
}

PropertyCheck quality_condition_on(const TeamQuantifier& q, const Structure& m, const Team& x, FamilyBounds b) {
  return size_condition(q, m, x, b, true);
}

}  // namespace teamq
