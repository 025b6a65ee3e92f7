#include "teamq/semantics.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_map>

namespace teamq {

namespace {

// Rows are packed 4 bits per variable slot; a team is a slot mask plus sorted rows.
constexpr int kSlots = 16;

inline Element get(std::uint64_t row, int slot) { return static_cast<Element>((row >> (4 * slot)) & 0xF); }

inline std::uint64_t put(std::uint64_t row, int slot, Element a) {
  return (row & ~(0xFull << (4 * slot))) | (static_cast<std::uint64_t>(a) << (4 * slot));
}

std::uint64_t slot_bits(std::uint32_t mask) {
  std::uint64_t b = 0;
  for (int s = 0; s < kSlots; ++s)
    if ((mask >> s) & 1u) b |= 0xFull << (4 * s);
  return b;
}

using Rows = std::vector<std::uint64_t>;

struct PTeam {
  std::uint32_t dom = 0;
  Rows rows;
};

void normalize(Rows& r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
}

Rows merged(const Rows& a, const Rows& b) {
  Rows out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Rows block(const Rows& rows, int slot, Subset s) {
  Rows out;
  for (auto r : rows)
    for (Element a = 0; a < 32 && (s.bits >> a); ++a)
      if (s.contains(a)) out.push_back(put(r, slot, a));
  normalize(out);
  return out;
}

// Rows grouped by their values on `key`, classes ordered by first row.
std::vector<Rows> classes_of(const PTeam& x, std::uint32_t key) {
  std::uint64_t bits = slot_bits(key & x.dom);
  std::vector<Rows> out;
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (auto r : x.rows) {
    auto [it, fresh] = index.emplace(r & bits, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(r);
  }
  return out;
}

struct VecHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ v.size();
    for (auto x : v) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
  }
};

struct CNode {
  NodeKind kind = NodeKind::atom;
  bool negated = false;
  const std::vector<char>* table = nullptr;  // atom: characteristic table of the relation
  std::vector<int> term_slot;                // -1 for constants
  std::vector<Element> term_const;
  std::uint32_t slash = 0;
  QuantKind quant = QuantKind::exists;
  bool backslash = false;
  int var = -1;
  std::vector<Subset> cand;      // witness values allowed by the clause
  std::vector<Subset> cand_min;  // ⊆-minimal members of cand
  std::shared_ptr<const TeamQuantifier> tq;
  bool bounded = false;  // Mostowski node under the bounded clause
  int left = -1, right = -1;
  bool cand_up = false;  // cand closed under supersets
  bool dc_safe = true;  // subtree known downward closed
  bool flat = false;
};

bool upward_closed(const std::vector<Subset>& c, std::size_t n) {
  for (auto s : c)
    for (Element a = 0; a < n; ++a)
      if (!std::binary_search(c.begin(), c.end(), s.with(a))) return false;
  return true;
}

std::vector<Subset> minimal_members(const std::vector<Subset>& c) {
  std::vector<Subset> out;
  for (auto s : c) {
    bool minimal = true;
    for (auto t : c)
      if (t != s && t.subset_of(s)) minimal = false;
    if (minimal) out.push_back(s);
  }
  return out;
}

}  // namespace

struct Evaluator::Impl {
  Structure m;
  Registry reg;
  EvalConfig cfg;
  std::size_t n;

  std::map<std::string, int> slot_of;
  std::vector<std::string> slot_names;
  std::map<std::string, std::vector<char>> tables;
  std::vector<CNode> nodes;
  struct Compiled {
    Formula keep;
    int root;
    VarSet fv;
  };
  std::map<const Node*, Compiled> compiled;
  std::unordered_map<std::vector<std::uint64_t>, bool, VecHash> memo;

  Impl(const Structure& s, const Registry& r, EvalConfig c) : m(s), reg(r), cfg(c), n(s.size()) {
    if (n == 0 || n > kMaxDomain) throw EvalError("structure size out of range");
  }

  int slot(const std::string& v) {
    if (auto it = slot_of.find(v); it != slot_of.end()) return it->second;
    if (slot_names.size() >= kSlots) throw EvalError("too many distinct variables (at most 16)");
    int s = static_cast<int>(slot_names.size());
    slot_names.push_back(v);
    slot_of[v] = s;
    return s;
  }

  std::uint32_t mask_of(const VarSet& vs) {
    std::uint32_t mk = 0;
    for (const auto& v : vs) mk |= 1u << slot(v);
    return mk;
  }

  const std::vector<char>* table_for(const std::string& rel, std::size_t arity) {
    if (auto it = tables.find(rel); it != tables.end()) return &it->second;
    if (!m.relations().count(rel)) throw EvalError("relation " + rel + " is not interpreted in the structure");
    const Relation& r = m.relation(rel);
    if (r.arity != arity)
      throw EvalError("relation " + rel + " used with " + std::to_string(arity) + " arguments, declared /" +
                      std::to_string(r.arity));
    std::size_t size = 1;
    for (std::size_t i = 0; i < arity; ++i) size *= n;
    std::vector<char> t(size, 0);
    for (const auto& tup : r.tuples) {
      std::size_t idx = 0;
      for (std::size_t i = tup.size(); i-- > 0;) idx = idx * n + tup[i];
      t[idx] = 1;
    }
    return &tables.emplace(rel, std::move(t)).first->second;
  }

  int compile(const Formula& f) {
    CNode c;
    c.kind = f->kind;
    c.negated = f->negated;
    c.slash = mask_of(f->slash);
    switch (f->kind) {
      case NodeKind::atom:
      case NodeKind::equality:
        for (const auto& t : f->terms) {
          if (t.constant) {
            if (!m.constants().count(t.name)) throw EvalError("constant #" + t.name + " is not interpreted");
            c.term_slot.push_back(-1);
            c.term_const.push_back(m.constant(t.name));
          } else {
            c.term_slot.push_back(slot(t.name));
            c.term_const.push_back(0);
          }
        }
        if (f->kind == NodeKind::atom) c.table = table_for(f->relation, f->terms.size());
        c.flat = true;
        break;
      case NodeKind::conj:
      case NodeKind::disj: {
        int l = compile(f->left);
        int r = compile(f->right);
        c.left = l;
        c.right = r;
        c.dc_safe = nodes[l].dc_safe && nodes[r].dc_safe;
        c.flat = nodes[l].flat && nodes[r].flat && (f->kind == NodeKind::conj || f->slash.empty());
        break;
      }
      case NodeKind::quant: {
        c.quant = f->quant;
        c.backslash = f->backslash;
        c.var = slot(f->var);
        int b = compile(f->left);
        c.left = b;
        c.dc_safe = nodes[b].dc_safe;
        switch (f->quant) {
          case QuantKind::forall:
            c.flat = nodes[b].flat;
            break;
          case QuantKind::exists:
            for (std::uint32_t s = 1; s < (1u << n); ++s)
              if (cfg.mode == ExistsMode::lax || __builtin_popcount(s) == 1) c.cand.push_back(Subset{s});
            c.cand_min = minimal_members(c.cand);
            c.flat = nodes[b].flat && !f->backslash && f->slash.empty();
            break;
          case QuantKind::mostowski:
            c.cand = reg.mostowski(f->qname)->localize(m);
            c.cand_min = minimal_members(c.cand);
            // With Q^M closed upward, condition (2) of the bounded clause follows
            // from (1), so the node is an ordinary Engström node here.
            c.bounded = cfg.bounded != BoundedMode::off &&
                        (cfg.strategy == Strategy::reference || !upward_closed(c.cand, n));
            c.dc_safe = c.dc_safe && !c.bounded;
            c.flat = nodes[b].flat && !f->backslash && f->slash.empty() && !c.bounded;
            break;
          case QuantKind::team:
            c.tq = reg.team(f->qname);
            c.dc_safe = c.dc_safe && c.tq->keeps_downward_closure();
            if (c.tq->shape() != TeamQuantifier::Shape::generic) {
              for (std::uint32_t s = 0; s < (1u << n); ++s)
                if (c.tq->value_test()(m, Subset{s})) c.cand.push_back(Subset{s});
              c.cand_up = upward_closed(c.cand, n);
              // A bounded witness over upward-closed values is a plain witness.
              if (c.tq->shape() == TeamQuantifier::Shape::bounded_witness && c.cand_up && cfg.strategy == Strategy::full)
                c.dc_safe = nodes[b].dc_safe;
            }
            break;
        }
        break;
      }
    }
    nodes.push_back(std::move(c));
    return static_cast<int>(nodes.size()) - 1;
  }

  const Compiled& compiled_for(const Formula& f) {
    if (auto it = compiled.find(f.get()); it != compiled.end()) return it->second;
    int root = compile(f);
    return compiled.emplace(f.get(), Compiled{f, root, free_variables(f)}).first->second;
  }

  PTeam pack(const Team& x, std::vector<std::uint64_t>* packed_rows = nullptr) {
    PTeam t;
    std::vector<int> slots;
    for (const auto& v : x.variables()) {
      slots.push_back(slot(v));
      t.dom |= 1u << slots.back();
    }
    for (const auto& r : x.rows()) {
      std::uint64_t p = 0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] >= n) throw EvalError("team row uses an element outside the structure");
        p = put(p, slots[i], r[i]);
      }
      t.rows.push_back(p);
      if (packed_rows) packed_rows->push_back(p);
    }
    normalize(t.rows);
    return t;
  }

  // ------------------------------------------------------------ evaluation

  Element term(const CNode& c, std::size_t i, std::uint64_t row) const {
    return c.term_slot[i] >= 0 ? get(row, c.term_slot[i]) : c.term_const[i];
  }

  bool literal_row(const CNode& c, std::uint64_t row) const {
    bool v;
    if (c.kind == NodeKind::equality) {
      v = term(c, 0, row) == term(c, 1, row);
    } else {
      std::size_t idx = 0;
      for (std::size_t i = c.term_slot.size(); i-- > 0;) idx = idx * n + term(c, i, row);
      v = (*c.table)[idx];
    }
    return v != c.negated;
  }

  // Satisfaction by the singleton team {row}; only called on flat nodes.
  bool row_sat(int id, std::uint64_t row) {
    const CNode& c = nodes[id];
    switch (c.kind) {
      case NodeKind::atom:
      case NodeKind::equality:
        return literal_row(c, row);
      case NodeKind::conj:
        return row_sat(c.left, row) && row_sat(c.right, row);
      case NodeKind::disj:
        return row_sat(c.left, row) || row_sat(c.right, row);
      case NodeKind::quant:
        break;
    }
    if (c.quant == QuantKind::forall) {
      for (Element a = 0; a < n; ++a)
        if (!row_sat(c.left, put(row, c.var, a))) return false;
      return true;
    }
    Subset good;
    for (Element a = 0; a < n; ++a)
      if (row_sat(c.left, put(row, c.var, a))) good = good.with(a);
    for (auto s : c.cand_min)
      if (s.subset_of(good)) return true;
    return false;
  }

  bool sat(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    if (c.flat && cfg.strategy == Strategy::full) {
      for (auto r : x.rows)
        if (!row_sat(id, r)) return false;
      return true;
    }
    if (c.kind == NodeKind::atom || c.kind == NodeKind::equality) {
      for (auto r : x.rows)
        if (!literal_row(c, r)) return false;
      return true;
    }
    std::vector<std::uint64_t> key;
    if (cfg.memo) {
      key.reserve(x.rows.size() + 1);
      key.push_back((static_cast<std::uint64_t>(id) << 32) | x.dom);
      key.insert(key.end(), x.rows.begin(), x.rows.end());
      if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    bool v = eval_node(id, x);
    if (cfg.memo) {
      if (memo.size() > (1u << 22)) memo.clear();
      memo.emplace(std::move(key), v);
    }
    return v;
  }

  bool fast_for(int child) const { return cfg.strategy != Strategy::reference && nodes[child].dc_safe; }

  bool eval_node(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    switch (c.kind) {
      case NodeKind::conj:
        return sat(c.left, x) && sat(c.right, x);
      case NodeKind::disj:
        return eval_disj(id, x);
      case NodeKind::quant:
        break;
      default:
        return false;
    }
    switch (c.quant) {
      case QuantKind::forall: {
        PTeam y{x.dom | (1u << c.var), {}};
        for (auto r : x.rows)
          for (Element a = 0; a < n; ++a) y.rows.push_back(put(r, c.var, a));
        normalize(y.rows);
        return sat(c.left, y);
      }
      case QuantKind::team: {
        if (cfg.strategy == Strategy::full && c.tq->shape() == TeamQuantifier::Shape::witness)
          return witness_member(id, x);
        if (cfg.strategy == Strategy::full && c.tq->shape() == TeamQuantifier::Shape::bounded_witness)
          return c.cand_up ? witness_member(id, x) : bounded_member(id, x);
        auto fam = meaning(c.left, x, c.var, c.slash, c.backslash);
        return c.tq->accepts(m, fam);
      }
      case QuantKind::mostowski:
        if (c.bounded) return eval_bounded_node(id, x);
        [[fallthrough]];
      case QuantKind::exists:
        return eval_engstrom(id, x);
    }
    return false;
  }

  std::uint32_t uniformity_key(const CNode& c, const PTeam& x) const {
    return c.backslash ? (x.dom & c.slash) : (x.dom & ~c.slash);
  }

  void guard_count(std::size_t base, std::size_t exp, std::uint64_t cap, const char* what) const {
    long double total = 1;
    for (std::size_t i = 0; i < exp; ++i) total *= static_cast<long double>(base);
    if (total > static_cast<long double>(cap))
      throw GuardError(std::string(what) + ": search space exceeds the configured cap");
  }

  // ∃ V-uniform F : X -> cand with X[F/v] ⊨ body.
  bool eval_engstrom(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    auto cls = classes_of(x, uniformity_key(c, x));
    PTeam out{x.dom | (1u << c.var), {}};
    if (cls.empty()) return sat(c.left, out);
    if (!fast_for(c.left)) {
      if (c.cand.empty()) return false;
      guard_count(c.cand.size(), cls.size(), cfg.max_functions, "quantifier clause");
      std::vector<std::vector<Rows>> blocks(cls.size());
      for (std::size_t i = 0; i < cls.size(); ++i)
        for (auto s : c.cand) blocks[i].push_back(block(cls[i], c.var, s));
      std::vector<std::size_t> pick(cls.size(), 0);
      while (true) {
        out.rows.clear();
        for (std::size_t i = 0; i < cls.size(); ++i)
          out.rows.insert(out.rows.end(), blocks[i][pick[i]].begin(), blocks[i][pick[i]].end());
        normalize(out.rows);
        if (sat(c.left, out)) return true;
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == c.cand.size()) pick[i++] = 0;
        if (i == pick.size()) return false;
      }
    }
    // Downward closure of the body: a smaller witness value always works when a
    // larger one does, and a failing partial team cannot be repaired.
    if (cfg.strategy == Strategy::full && nodes[c.left].flat) {
      for (const auto& cl : cls) {
        Subset good = Subset::full(n);
        for (auto r : cl)
          for (Element a = 0; a < n; ++a)
            if (good.contains(a) && !row_sat(c.left, put(r, c.var, a))) good.bits &= ~(1u << a);
        bool ok = false;
        for (auto s : c.cand_min)
          if (s.subset_of(good)) ok = true;
        if (!ok) return false;
      }
      return true;
    }
    std::vector<std::vector<Rows>> options(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) {
      for (auto s : c.cand_min) {
        Rows b = block(cls[i], c.var, s);
        if (sat(c.left, PTeam{out.dom, b})) options[i].push_back(std::move(b));
      }
      if (options[i].empty()) return false;
    }
    return search(c.left, out.dom, std::move(options));
  }

  // Backtracking over per-class options for a downward-closed body. On large
  // spaces, options first get pruned to those with support in every other class:
  // a witness restricted to two classes still satisfies the body.
  bool search(int body, std::uint32_t dom, std::vector<std::vector<Rows>> options) {
    std::uint64_t total = 1;
    for (const auto& o : options) total = std::min<std::uint64_t>(total * o.size(), 1u << 16);
    if (total >= (1u << 12) && options.size() > 2) {
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < options.size(); ++i) {
          for (std::size_t j = 0; j < options.size(); ++j) {
            if (i == j) continue;
            auto& oi = options[i];
            auto kept = std::remove_if(oi.begin(), oi.end(), [&](const Rows& a) {
              for (const auto& b : options[j])
                if (sat(body, PTeam{dom, merged(a, b)})) return false;
              return true;
            });
            if (kept != oi.end()) {
              oi.erase(kept, oi.end());
              changed = true;
              if (oi.empty()) return false;
            }
          }
        }
      }
    }
    return backtrack(body, dom, options, 0, Rows{});
  }

  bool backtrack(int body, std::uint32_t dom, const std::vector<std::vector<Rows>>& options, std::size_t i,
                 const Rows& partial) {
    if (i == options.size()) return true;
    for (const auto& b : options[i]) {
      Rows u = merged(partial, b);
      if (i > 0 && !sat(body, PTeam{dom, u})) continue;
      if (backtrack(body, dom, options, i + 1, u)) return true;
    }
    return false;
  }

  // Witness team quantifiers: is there a member of the meaning set whose values
  // all pass the test? Searched class by class without building the set.
  bool witness_member(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    auto cls = classes_of(x, uniformity_key(c, x));
    std::uint32_t dom = x.dom | (1u << c.var);
    if (cls.empty()) return sat(c.left, PTeam{dom, {}});
    bool fast = fast_for(c.left);
    std::vector<std::vector<Rows>> options(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) {
      for (auto s : c.cand) {
        Rows b = block(cls[i], c.var, s);
        if (!fast || sat(c.left, PTeam{dom, b})) options[i].push_back(std::move(b));
      }
      if (options[i].empty()) return false;
    }
    if (fast) return nodes[c.left].flat || search(c.left, dom, std::move(options));
    std::uint64_t total = 1;
    for (const auto& o : options) total = std::min<std::uint64_t>(total * o.size(), cfg.max_functions + 1);
    if (total > cfg.max_functions) throw GuardError("witness search: search space exceeds the configured cap");
    std::vector<std::size_t> pick(cls.size(), 0);
    PTeam out{dom, {}};
    while (true) {
      out.rows.clear();
      for (std::size_t i = 0; i < cls.size(); ++i)
        out.rows.insert(out.rows.end(), options[i][pick[i]].begin(), options[i][pick[i]].end());
      normalize(out.rows);
      if (sat(c.left, out)) return true;
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
      if (i == pick.size()) return false;
    }
  }

  // Bounded witness quantifiers: a member F of the meaning set with good values
  // such that no member G ≥ F has a bad value. F ranges over good values only,
  // G over pointwise supersets of F.
  bool bounded_member(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    auto cls = classes_of(x, uniformity_key(c, x));
    std::uint32_t dom = x.dom | (1u << c.var);
    if (cls.empty()) return sat(c.left, PTeam{dom, {}});
    auto good = [&](Subset s) { return std::binary_search(c.cand.begin(), c.cand.end(), s); };
    auto team_of = [&](const std::vector<Subset>& f) {
      PTeam t{dom, {}};
      for (std::size_t i = 0; i < cls.size(); ++i) {
        Rows b = block(cls[i], c.var, f[i]);
        t.rows.insert(t.rows.end(), b.begin(), b.end());
      }
      normalize(t.rows);
      return t;
    };
    guard_count(std::max<std::size_t>(c.cand.size(), 1), cls.size(), cfg.max_functions, "bounded witness search");
    std::vector<Subset> f(cls.size()), g(cls.size());
    // Some G ≥ F in the meaning set with a bad value?
    std::function<bool(std::size_t, bool)> escapes = [&](std::size_t i, bool bad) -> bool {
      if (i == cls.size()) return bad && sat(c.left, team_of(g));
      std::uint32_t free_bits = Subset::full(n).bits & ~f[i].bits;
      for (std::uint32_t add = free_bits;; add = (add - 1) & free_bits) {
        g[i] = Subset{f[i].bits | add};
        if (escapes(i + 1, bad || !good(g[i]))) return true;
        if (!add) break;
      }
      return false;
    };
    std::function<bool(std::size_t)> pick = [&](std::size_t i) -> bool {
      if (i == cls.size()) return sat(c.left, team_of(f)) && !escapes(0, false);
      for (auto s : c.cand) {
        f[i] = s;
        if (pick(i + 1)) return true;
      }
      return false;
    };
    return pick(0);
  }

  // ∃ W-uniform Y, Z ⊆ X with Y ∪ Z = X, Y ⊨ left and Z ⊨ right.
  bool eval_disj(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    auto cls = classes_of(x, x.dom & ~c.slash);
    if (cfg.strategy != Strategy::reference && nodes[c.left].dc_safe && nodes[c.right].dc_safe) {
      std::vector<char> can_l(cls.size()), can_r(cls.size());
      for (std::size_t i = 0; i < cls.size(); ++i) {
        can_l[i] = sat(c.left, PTeam{x.dom, cls[i]});
        can_r[i] = sat(c.right, PTeam{x.dom, cls[i]});
        if (!can_l[i] && !can_r[i]) return false;
      }
      // With a flat side, giving that side every class it accepts is optimal.
      bool lflat = cfg.strategy == Strategy::full && nodes[c.left].flat;
      bool rflat = cfg.strategy == Strategy::full && nodes[c.right].flat;
      if (lflat || rflat) {
        PTeam y{x.dom, {}}, z{x.dom, {}};
        for (std::size_t i = 0; i < cls.size(); ++i) {
          bool to_left = lflat ? static_cast<bool>(can_l[i]) : !can_r[i];
          auto& t = to_left ? y : z;
          t.rows.insert(t.rows.end(), cls[i].begin(), cls[i].end());
        }
        normalize(y.rows);
        normalize(z.rows);
        return sat(c.left, y) && sat(c.right, z);
      }
      std::vector<std::size_t> order(cls.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (can_l[a] && can_r[a]) < (can_l[b] && can_r[b]);
      });
      return split(c, x.dom, cls, order, can_l, can_r, 0, Rows{}, Rows{});
    }
    if (cls.size() > cfg.max_split_classes) throw GuardError("disjunction split: too many classes");
    std::vector<int> label(cls.size(), 0);
    while (true) {
      PTeam y{x.dom, {}}, z{x.dom, {}};
      for (std::size_t i = 0; i < cls.size(); ++i) {
        if (label[i] != 1) y.rows.insert(y.rows.end(), cls[i].begin(), cls[i].end());
        if (label[i] != 0) z.rows.insert(z.rows.end(), cls[i].begin(), cls[i].end());
      }
      normalize(y.rows);
      normalize(z.rows);
      if (sat(c.left, y) && sat(c.right, z)) return true;
      std::size_t i = 0;
      while (i < label.size() && ++label[i] == 3) label[i++] = 0;
      if (i == label.size()) return false;
    }
  }

  bool split(const CNode& c, std::uint32_t dom, const std::vector<Rows>& cls, const std::vector<std::size_t>& order,
             const std::vector<char>& can_l, const std::vector<char>& can_r, std::size_t k, const Rows& y,
             const Rows& z) {
    if (k == order.size()) return sat(c.left, PTeam{dom, y}) && sat(c.right, PTeam{dom, z});
    std::size_t i = order[k];
    if (can_l[i]) {
      Rows y2 = merged(y, cls[i]);
      if (sat(c.left, PTeam{dom, y2}) && split(c, dom, cls, order, can_l, can_r, k + 1, y2, z)) return true;
    }
    if (can_r[i]) {
      Rows z2 = merged(z, cls[i]);
      if (sat(c.right, PTeam{dom, z2}) && split(c, dom, cls, order, can_l, can_r, k + 1, y, z2)) return true;
    }
    return false;
  }

  // All uniform F : X -> ℘(M) with X[F/v] ⊨ body; values listed per row of x.rows.
  FunctionFamily meaning(int body, const PTeam& x, int var, std::uint32_t slash, bool backslash) {
    if (n > cfg.max_meaning_domain) throw GuardError("meaning set: structure larger than the configured cap");
    auto cls = classes_of(x, backslash ? (x.dom & slash) : (x.dom & ~slash));
    if (cls.size() > cfg.max_meaning_classes) throw GuardError("meaning set: too many uniformity classes");
    std::uint32_t dom = x.dom | (1u << var);
    bool fast = fast_for(body);
    // A flat body is checked class by class, so the family is a product.
    bool product = fast && nodes[body].flat;
    std::vector<std::vector<std::pair<Subset, Rows>>> options(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i)
      for (std::uint32_t s = 0; s < (1u << n); ++s) {
        Rows b = block(cls[i], var, Subset{s});
        if (!fast || sat(body, PTeam{dom, b})) options[i].emplace_back(Subset{s}, product ? Rows{} : std::move(b));
      }
    FunctionFamily fam;
    fam.rows = x.rows.size();
    std::vector<Subset> chosen(cls.size());
    std::function<void(std::size_t, const Rows&)> go = [&](std::size_t i, const Rows& partial) {
      if (i == cls.size()) {
        if ((!fast || cls.empty()) && !sat(body, PTeam{dom, partial})) return;
        std::vector<Subset> f(x.rows.size());
        for (std::size_t k = 0; k < cls.size(); ++k)
          for (auto r : cls[k]) f[std::lower_bound(x.rows.begin(), x.rows.end(), r) - x.rows.begin()] = chosen[k];
        fam.functions.push_back(std::move(f));
        return;
      }
      for (const auto& [s, b] : options[i]) {
        chosen[i] = s;
        if (product) {
          go(i + 1, partial);
          continue;
        }
        Rows u = merged(partial, b);
        if (fast && i > 0 && !sat(body, PTeam{dom, u})) continue;
        go(i + 1, u);
      }
    };
    go(0, Rows{});
    fam.normalize();
    return fam;
  }

  // (1) X[F/v] ⊨ body and (2) every F' ≥ F with X[F'/v] ⊨ body has all values in Q^M.
  bool eval_bounded_node(int id, const PTeam& x) {
    const CNode& c = nodes[id];
    auto cls = classes_of(x, uniformity_key(c, x));
    std::uint32_t dom = x.dom | (1u << c.var);
    auto in_q = [&](Subset s) { return std::binary_search(c.cand.begin(), c.cand.end(), s); };
    bool fast = fast_for(c.left);
    bool raw = cfg.bounded == BoundedMode::raw;
    if (!fast) guard_count(std::max<std::size_t>(c.cand.size(), 1), cls.size(), cfg.max_functions, "bounded clause");

    std::vector<std::vector<std::pair<Subset, Rows>>> options(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) {
      for (auto s : c.cand) {
        Rows b = block(cls[i], c.var, s);
        if (!fast || sat(c.left, PTeam{dom, b})) options[i].emplace_back(s, std::move(b));
      }
      if (options[i].empty()) return false;
    }
    std::vector<Subset> chosen(cls.size());

    // Condition (2) for a complete F whose supplemented team is u.
    auto bounded_ok = [&](const Rows& u) -> bool {
      if (fast) {
        // By downward closure a violating F' can be shrunk to one that differs
        // from F in a single class (uniform) or a single row (raw).
        for (std::size_t i = 0; i < cls.size(); ++i) {
          Subset f = chosen[i];
          std::uint32_t free_bits = Subset::full(n).bits & ~f.bits;
          for (std::uint32_t add = free_bits; add; add = (add - 1) & free_bits) {
            Subset g{f.bits | add};
            if (in_q(g)) continue;
            if (raw) {
              for (auto r : cls[i])
                if (sat(c.left, PTeam{dom, merged(u, block(Rows{r}, c.var, g))})) return false;
            } else if (sat(c.left, PTeam{dom, merged(u, block(cls[i], c.var, g))})) {
              return false;
            }
          }
        }
        return true;
      }
      // Literal: every F' ≥ F, uniform per class or per row.
      std::vector<Rows> units;
      std::vector<Subset> base;
      for (std::size_t i = 0; i < cls.size(); ++i) {
        if (raw) {
          for (auto r : cls[i]) {
            units.push_back(Rows{r});
            base.push_back(chosen[i]);
          }
        } else {
          units.push_back(cls[i]);
          base.push_back(chosen[i]);
        }
      }
      std::size_t free_total = 0;
      for (auto b : base) free_total += n - b.size();
      guard_count(2, free_total, cfg.max_functions, "bounded clause (F' enumeration)");
      std::vector<std::uint32_t> add(units.size(), 0);
      while (true) {
        bool outside = false;
        Rows t;
        for (std::size_t k = 0; k < units.size(); ++k) {
          Subset g{base[k].bits | add[k]};
          if (!in_q(g)) outside = true;
          Rows b = block(units[k], c.var, g);
          t.insert(t.end(), b.begin(), b.end());
        }
        if (outside) {
          normalize(t);
          if (sat(c.left, PTeam{dom, t})) return false;
        }
        std::size_t k = 0;
        for (; k < add.size(); ++k) {
          std::uint32_t free_bits = Subset::full(n).bits & ~base[k].bits;
          // Next subset of free_bits in counting order.
          add[k] = (add[k] - free_bits) & free_bits;
          if (add[k] != 0) break;
        }
        if (k == add.size()) return true;
      }
    };

    std::function<bool(std::size_t, const Rows&)> go = [&](std::size_t i, const Rows& partial) -> bool {
      if (i == cls.size()) {
        if ((!fast || cls.empty()) && !sat(c.left, PTeam{dom, partial})) return false;
        return bounded_ok(partial);
      }
      for (const auto& [s, b] : options[i]) {
        Rows u = merged(partial, b);
        if (fast && i > 0 && !sat(c.left, PTeam{dom, u})) continue;
        chosen[i] = s;
        if (go(i + 1, u)) return true;
      }
      return false;
    };
    return go(0, Rows{});
  }
};

// ---------------------------------------------------------------- Evaluator

Evaluator::Evaluator(const Structure& m, const Registry& reg, EvalConfig cfg)
    : impl_(std::make_unique<Impl>(m, reg, cfg)) {}

Evaluator::~Evaluator() = default;

const Structure& Evaluator::structure() const { return impl_->m; }
const EvalConfig& Evaluator::config() const { return impl_->cfg; }
std::size_t Evaluator::memo_entries() const { return impl_->memo.size(); }
void Evaluator::clear_memo() { impl_->memo.clear(); }

namespace {

void require_suitable(const VarSet& fv, const Team& x) {
  auto dom = x.domain();
  for (const auto& v : fv)
    if (!dom.count(v)) throw EvalError("team is not suitable: variable " + v + " is free but not in dom(X)");
}

}  // namespace

bool Evaluator::satisfies(const Team& x, const Formula& f) {
  const auto& c = impl_->compiled_for(f);
  require_suitable(c.fv, x);
  return impl_->sat(c.root, impl_->pack(x));
}

MeaningSet Evaluator::meaning_set(const Team& x, const Formula& body, const std::string& v, const VarSet& slash,
                                  bool backslash) {
  const auto& c = impl_->compiled_for(body);
  VarSet fv = c.fv;
  fv.erase(v);
  fv.insert(slash.begin(), slash.end());
  require_suitable(fv, x);
  std::vector<std::uint64_t> packed;
  PTeam p = impl_->pack(x, &packed);
  auto fam = impl_->meaning(c.root, p, impl_->slot(v), impl_->mask_of(slash), backslash);
  MeaningSet out{x, v, {}};
  for (const auto& f : fam.functions) {
    std::vector<Subset> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      g[i] = f[std::lower_bound(p.rows.begin(), p.rows.end(), packed[i]) - p.rows.begin()];
    out.functions.push_back(std::move(g));
  }
  std::sort(out.functions.begin(), out.functions.end());
  return out;
}

std::vector<SupplementFunction> MeaningSet::supplement_functions() const {
  std::vector<SupplementFunction> out;
  for (const auto& f : functions) out.emplace_back(base, f);
  return out;
}

bool eval_team(const Structure& m, const Team& x, const Formula& f, const Registry& reg, EvalConfig cfg) {
  cfg.bounded = BoundedMode::off;
  Evaluator e(m, reg, cfg);
  return e.satisfies(x, f);
}

bool eval_bounded(const Structure& m, const Team& x, const Formula& f, const Registry& reg, EvalConfig cfg) {
  if (cfg.bounded == BoundedMode::off) cfg.bounded = BoundedMode::uniform;
  Evaluator e(m, reg, cfg);
  return e.satisfies(x, f);
}

MeaningSet meaning_set(const Structure& m, const Team& x, const Formula& body, const std::string& v,
                       const VarSet& slash, const Registry& reg, EvalConfig cfg) {
  Evaluator e(m, reg, cfg);
  return e.meaning_set(x, body, v, slash);
}

std::vector<Subset> sentence_initial_meaning(const Structure& m, const Formula& body, const std::string& v,
                                             const Registry& reg, EvalConfig cfg) {
  auto fv = free_variables(body);
  fv.erase(v);
  if (!fv.empty()) throw EvalError("sentence-initial meaning needs FV(ψ) ⊆ {" + v + "}");
  auto ms = meaning_set(m, Team::unit(), body, v, {}, reg, cfg);
  std::vector<Subset> out;
  for (const auto& f : ms.functions) out.push_back(f.at(0));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------- Tarski

namespace {

bool tarski(const Structure& m, Assignment& s, const Node& f, const Registry& reg) {
  auto value = [&](const Term& t) -> Element {
    if (t.constant) {
      if (!m.constants().count(t.name)) throw EvalError("constant #" + t.name + " is not interpreted");
      return m.constant(t.name);
    }
    auto it = s.find(t.name);
    if (it == s.end()) throw EvalError("assignment does not cover variable " + t.name);
    return it->second;
  };
  if (!f.slash.empty()) throw EvalError("Tarskian evaluation needs empty slash sets");
  switch (f.kind) {
    case NodeKind::atom: {
      std::vector<Element> args;
      for (const auto& t : f.terms) args.push_back(value(t));
      if (!m.relations().count(f.relation)) throw EvalError("relation " + f.relation + " is not interpreted");
      return m.holds(f.relation, args) != f.negated;
    }
    case NodeKind::equality:
      return (value(f.terms[0]) == value(f.terms[1])) != f.negated;
    case NodeKind::conj:
      return tarski(m, s, *f.left, reg) && tarski(m, s, *f.right, reg);
    case NodeKind::disj:
      return tarski(m, s, *f.left, reg) || tarski(m, s, *f.right, reg);
    case NodeKind::quant:
      break;
  }
  if (f.backslash) throw EvalError("Tarskian evaluation does not take backslashed quantifiers");
  if (f.quant == QuantKind::team) throw EvalError("Tarskian evaluation does not take team quantifiers");
  std::optional<Element> saved;
  if (auto it = s.find(f.var); it != s.end()) saved = it->second;
  Subset sat;
  for (Element a = 0; a < m.size(); ++a) {
    s[f.var] = a;
    if (tarski(m, s, *f.left, reg)) sat = sat.with(a);
  }
  if (saved)
    s[f.var] = *saved;
  else
    s.erase(f.var);
  switch (f.quant) {
    case QuantKind::exists:
      return !sat.empty();
    case QuantKind::forall:
      return sat == Subset::full(m.size());
    default:
      return reg.mostowski(f.qname)->contains(sat, m);
  }
}

}  // namespace

bool eval_tarski(const Structure& m, const Assignment& s, const Formula& f, const Registry& reg) {
  Assignment copy = s;
  return tarski(m, copy, *f, reg);
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::reference:
      return "reference";
    case Strategy::downward_closed:
      return "downward_closed";
    default:
      return "full";
  }
}

std::string to_string(BoundedMode b) {
  switch (b) {
    case BoundedMode::off:
      return "off";
    case BoundedMode::uniform:
      return "uniform";
    default:
      return "raw";
  }
}

}  // namespace teamq
