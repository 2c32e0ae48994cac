#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dataspace/pmap.hpp"
#include "dataspace/values.hpp"

namespace ds {

struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
  std::size_t hash() const { return 0x5bd1e995; }
};

// Sorted set of stream ids; the routing-table leaf.
class IdSet {
 public:
  IdSet() = default;
  IdSet(std::initializer_list<std::uint64_t> ids) : ids_(ids) { normalize(); }
  static IdSet of(std::vector<std::uint64_t> ids) {
    IdSet s;
    s.ids_ = std::move(ids);
    s.normalize();
    return s;
  }

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  bool contains(std::uint64_t id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  IdSet union_with(const IdSet& o) const {
    IdSet r;
    r.ids_.reserve(ids_.size() + o.ids_.size());
    std::set_union(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(), std::back_inserter(r.ids_));
    return r;
  }
  IdSet minus(const IdSet& o) const {
    IdSet r;
    std::set_difference(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(), std::back_inserter(r.ids_));
    return r;
  }
  IdSet intersect(const IdSet& o) const {
    IdSet r;
    std::set_intersection(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(), std::back_inserter(r.ids_));
    return r;
  }

  std::size_t hash() const {
    std::size_t h = 0x1d5;
    for (auto id : ids_) h = hash_mix(h, id);
    return h;
  }
  friend bool operator==(const IdSet& a, const IdSet& b) { return a.ids_ == b.ids_; }

 private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }
  std::vector<std::uint64_t> ids_;
};

inline std::string leaf_text(Unit) { return "()"; }
inline std::string leaf_text(const IdSet& s) {
  std::string out = "{";
  bool first = true;
  for (auto id : s) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(id);
  }
  return out + "}";
}

struct MalformedKey : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InfiniteSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::size_t token_width(const Token& t) { return t.is_push() ? t.arity() : 0; }

// mt is the null node; ok(a) and br(default, edges) are shared immutable nodes.
template <class A>
class Trie {
 public:
  using Map = PMap<Token, Trie>;

  Trie() = default;

  static Trie mt() { return Trie(); }
  static Trie ok(A a = A{}) {
    auto n = std::make_shared<Node>();
    n->is_ok = true;
    n->hash = hash_mix(0x0c, a.hash());
    n->leaf = std::move(a);
    return Trie(std::move(n));
  }
  // Collapses br(mt, {}) to mt. Callers keep edges non-redundant.
  static Trie br(Trie dflt, Map edges) {
    if (dflt.is_mt() && edges.empty()) return mt();
    auto n = std::make_shared<Node>();
    n->hash = hash_mix(hash_mix(0xb7, dflt.hash()), edges.hash());
    n->dflt = std::move(dflt);
    n->edges = std::move(edges);
    return Trie(std::move(n));
  }
  // Drops edges that equal the default's tail.
  static Trie br(Trie dflt, std::initializer_list<std::pair<Token, Trie>> es) {
    Map m;
    for (const auto& [k, v] : es) {
      if (!is_tail(v, token_width(k), dflt)) m = m.insert(k, v);
    }
    return br(std::move(dflt), std::move(m));
  }

  bool is_mt() const { return !n_; }
  bool is_ok() const { return n_ && n_->is_ok; }
  bool is_br() const { return n_ && !n_->is_ok; }
  const A& leaf() const { return n_->leaf; }
  const Trie& dflt() const { return n_->dflt; }
  const Map& edges() const { return n_->edges; }
  std::size_t hash() const { return n_ ? n_->hash : 0; }
  bool same_node(const Trie& o) const { return n_ == o.n_; }

  friend bool operator==(const Trie& a, const Trie& b) {
    if (a.n_ == b.n_) return true;
    if (!a.n_ || !b.n_) return false;
    if (a.n_->hash != b.n_->hash || a.n_->is_ok != b.n_->is_ok) return false;
    if (a.n_->is_ok) return a.n_->leaf == b.n_->leaf;
    return a.n_->dflt == b.n_->dflt && a.n_->edges == b.n_->edges;
  }

  // Is h equal to makeTail(n, w)?
  static bool is_tail(const Trie& h, std::size_t n, const Trie& w) {
    if (w.is_mt()) return h.is_mt();
    const Trie* cur = &h;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cur->is_br() || !cur->edges().empty()) return false;
      cur = &cur->dflt();
    }
    return *cur == w;
  }

  std::string to_string() const {
    if (is_mt()) return "mt";
    if (is_ok()) return "ok(" + leaf_text(leaf()) + ")";
    std::string out = "br(" + dflt().to_string() + ",{";
    bool first = true;
    edges().for_each([&](const Token& k, const Trie& v) {
      if (!first) out += ',';
      first = false;
      out += k.to_text() + "→" + v.to_string();
    });
    return out + "})";
  }

 private:
  struct Node {
    bool is_ok = false;
    A leaf{};
    Trie dflt;
    Map edges;
    std::size_t hash = 0;
  };
  explicit Trie(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

using AssertionSet = Trie<Unit>;
using Routes = Trie<IdSet>;

template <class A>
Trie<A> make_tail(std::size_t n, Trie<A> t) {
  if (t.is_mt()) return t;
  for (std::size_t i = 0; i < n; ++i) t = Trie<A>::br(t, typename Trie<A>::Map{});
  return t;
}

// lookup M s T of a br node: the edge, or the default's tail.
template <class A>
Trie<A> lookup(const Trie<A>& node, const Token& s) {
  if (const auto* p = node.edges().find(s)) return *p;
  return make_tail(token_width(s), node.dflt());
}

// g of the combine family. both(ok, ok) gives the result at a shared leaf;
// keep_left decides g(T, mt) and keep_right decides g(mt, T).
template <class A, class Both>
Trie<A> combine(const Trie<A>& a, const Trie<A>& b, const Both& both, bool keep_left, bool keep_right) {
  using T = Trie<A>;
  if (a.is_mt()) return keep_right ? b : T::mt();
  if (b.is_mt()) return keep_left ? a : T::mt();
  if (a.is_ok() && b.is_ok()) return both(a, b);
  if (a.is_ok() || b.is_ok()) throw std::logic_error("combine: operands at different levels");

  T w = combine(a.dflt(), b.dflt(), both, keep_left, keep_right);
  const bool left_small = a.edges().size() <= b.edges().size();
  const T& small = left_small ? a : b;
  const T& large = left_small ? b : a;

  if (small.dflt().is_mt()) {
    // Keys only in the large side combine with mt, so the large map is the seed.
    const bool keep_large = left_small ? keep_right : keep_left;
    typename T::Map m = keep_large ? large.edges() : typename T::Map{};
    small.edges().for_each([&](const Token& s, const T& sv) {
      T lv = lookup(large, s);
      T h = left_small ? combine(sv, lv, both, keep_left, keep_right)
                       : combine(lv, sv, both, keep_left, keep_right);
      if (T::is_tail(h, token_width(s), w))
        m = m.erase(s);
      else
        m = m.insert(s, h);
    });
    return T::br(std::move(w), std::move(m));
  }

  auto ea = a.edges().entries();
  auto eb = b.edges().entries();
  std::vector<std::pair<Token, T>> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0, j = 0;
  auto emit = [&](const Token& s, const T& av, const T& bv) {
    T h = combine(av, bv, both, keep_left, keep_right);
    if (!T::is_tail(h, token_width(s), w)) out.emplace_back(s, std::move(h));
  };
  while (i < ea.size() || j < eb.size()) {
    if (j >= eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
      emit(ea[i].first, ea[i].second, make_tail(token_width(ea[i].first), b.dflt()));
      ++i;
    } else if (i >= ea.size() || eb[j].first < ea[i].first) {
      emit(eb[j].first, make_tail(token_width(eb[j].first), a.dflt()), eb[j].second);
      ++j;
    } else {
      emit(ea[i].first, ea[i].second, eb[j].second);
      ++i;
      ++j;
    }
  }
  return T::br(std::move(w), T::Map::from_sorted(out));
}

template <class A, class F>
Trie<A> union_with(const Trie<A>& a, const Trie<A>& b, F f) {
  if (a.same_node(b)) return a;
  return combine(
      a, b, [&](const Trie<A>& x, const Trie<A>& y) { return Trie<A>::ok(f(x.leaf(), y.leaf())); }, true, true);
}

template <class A, class F>
Trie<A> intersect_with(const Trie<A>& a, const Trie<A>& b, F f) {
  return combine(
      a, b, [&](const Trie<A>& x, const Trie<A>& y) { return Trie<A>::ok(f(x.leaf(), y.leaf())); }, false, false);
}

// f returns the surviving leaf, or nullopt to drop it.
template <class A, class F>
Trie<A> subtract_with(const Trie<A>& a, const Trie<A>& b, F f) {
  return combine(
      a, b,
      [&](const Trie<A>& x, const Trie<A>& y) {
        std::optional<A> r = f(x.leaf(), y.leaf());
        return r ? Trie<A>::ok(std::move(*r)) : Trie<A>::mt();
      },
      true, false);
}

// combine for tries with different leaf types, keeping a's type. Parts only
// in b always drop; parts only in a survive iff keep_left. both(x, y)
// returns the surviving leaf or nullopt.
template <class A, class B, class Both>
Trie<A> combine_left(const Trie<A>& a, const Trie<B>& b, const Both& both, bool keep_left) {
  using T = Trie<A>;
  if (a.is_mt()) return T::mt();
  if (b.is_mt()) return keep_left ? a : T::mt();
  if (a.is_ok() && b.is_ok()) {
    std::optional<A> r = both(a.leaf(), b.leaf());
    return r ? T::ok(std::move(*r)) : T::mt();
  }
  if (a.is_ok() || b.is_ok()) throw std::logic_error("combine_left: operands at different levels");

  T w = combine_left(a.dflt(), b.dflt(), both, keep_left);
  auto step = [&](const T& av, const Trie<B>& bv) { return combine_left(av, bv, both, keep_left); };

  // Keys only in a meet b's default; keys only in b meet a's default. An
  // mt default on one side lets us walk just the other side's edges.
  const bool walk_a = a.dflt().is_mt();
  const bool walk_b = b.dflt().is_mt();
  const bool prefer_a = walk_a && (!walk_b || a.edges().size() <= b.edges().size());

  if (!prefer_a && walk_b && keep_left) {
    // Keys only in a pass through untouched.
    typename T::Map m = a.edges();
    b.edges().for_each([&](const Token& s, const Trie<B>& bv) {
      T h = step(lookup(a, s), bv);
      m = T::is_tail(h, token_width(s), w) ? m.erase(s) : m.insert(s, h);
    });
    return T::br(std::move(w), std::move(m));
  }

  std::vector<std::pair<Token, T>> out;
  auto emit = [&](const Token& s, const T& h) {
    if (!T::is_tail(h, token_width(s), w)) out.emplace_back(s, h);
  };
  if (prefer_a) {
    a.edges().for_each([&](const Token& s, const T& av) { emit(s, step(av, lookup(b, s))); });
  } else if (walk_b) {
    b.edges().for_each([&](const Token& s, const Trie<B>& bv) { emit(s, step(lookup(a, s), bv)); });
  } else {
    auto ea = a.edges().entries();
    auto eb = b.edges().entries();
    std::size_t i = 0, j = 0;
    while (i < ea.size() || j < eb.size()) {
      if (j >= eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
        emit(ea[i].first, step(ea[i].second, make_tail(token_width(ea[i].first), b.dflt())));
        ++i;
      } else if (i >= ea.size() || eb[j].first < ea[i].first) {
        emit(eb[j].first, step(make_tail(token_width(eb[j].first), a.dflt()), eb[j].second));
        ++j;
      } else {
        emit(ea[i].first, step(ea[i].second, eb[j].second));
        ++i;
        ++j;
      }
    }
  }
  return T::br(std::move(w), T::Map::from_sorted(out));
}

inline AssertionSet union_(const AssertionSet& a, const AssertionSet& b) {
  return union_with(a, b, [](Unit, Unit) { return Unit{}; });
}
inline AssertionSet intersect(const AssertionSet& a, const AssertionSet& b) {
  return intersect_with(a, b, [](Unit, Unit) { return Unit{}; });
}
inline AssertionSet subtract(const AssertionSet& a, const AssertionSet& b) {
  return subtract_with(a, b, [](Unit, Unit) { return std::optional<Unit>{}; });
}

inline Routes union_routes(const Routes& a, const Routes& b) {
  return union_with(a, b, [](const IdSet& x, const IdSet& y) { return x.union_with(y); });
}
inline Routes subtract_routes(const Routes& a, const Routes& b) {
  return subtract_with(a, b, [](const IdSet& x, const IdSet& y) -> std::optional<IdSet> {
    IdSet r = x.minus(y);
    if (r.empty()) return std::nullopt;
    return r;
  });
}

// Complement within sequences of n values: mt and ok trade places.
AssertionSet negate(const AssertionSet& t, std::size_t n = 1);

template <class B, class A, class F>
Trie<B> relabel(const Trie<A>& t, const F& f) {
  if (t.is_mt()) return Trie<B>::mt();
  if (t.is_ok()) {
    std::optional<B> b = f(t.leaf());
    return b ? Trie<B>::ok(std::move(*b)) : Trie<B>::mt();
  }
  Trie<B> d = relabel<B>(t.dflt(), f);
  std::vector<std::pair<Token, Trie<B>>> out;
  t.edges().for_each([&](const Token& s, const Trie<A>& v) {
    Trie<B> h = relabel<B>(v, f);
    if (!Trie<B>::is_tail(h, token_width(s), d)) out.emplace_back(s, std::move(h));
  });
  return Trie<B>::br(std::move(d), Trie<B>::Map::from_sorted(out));
}

template <class A>
Trie<A> compile_tokens(std::span<const Token> ts, A leaf = A{}) {
  Trie<A> acc = Trie<A>::ok(std::move(leaf));
  for (std::size_t i = ts.size(); i-- > 0;) {
    if (ts[i].is_wild())
      acc = Trie<A>::br(acc, typename Trie<A>::Map{});
    else
      acc = Trie<A>::br(Trie<A>::mt(), typename Trie<A>::Map{}.insert(ts[i], acc));
  }
  return acc;
}

// Captures compile as wildcards.
template <class A = Unit>
Trie<A> compile_pattern(const Value& p, A leaf = A{}) {
  auto ts = serialize(strip_captures(p));
  return compile_tokens<A>(ts, std::move(leaf));
}

inline AssertionSet compile_set(std::initializer_list<Value> ps) {
  AssertionSet acc;
  for (const auto& p : ps) acc = union_(acc, compile_pattern(p));
  return acc;
}

// Walk without validating the key.
template <class A>
std::optional<A> search_tokens(const Trie<A>& t, std::span<const Token> key) {
  Trie<A> cur = t;
  for (const Token& tok : key) {
    if (!cur.is_br()) return std::nullopt;
    cur = lookup(cur, tok);
  }
  if (cur.is_ok()) return cur.leaf();
  return std::nullopt;
}

template <class A>
std::optional<A> search(const Trie<A>& t, std::span<const Token> key) {
  if (!well_formed(key, 1)) throw MalformedKey("search key is not one well-formed value");
  for (const auto& tok : key) {
    if (tok.is_wild()) throw MalformedKey("search key contains a wildcard");
  }
  return search_tokens(t, key);
}

template <class A>
std::optional<A> search(const Trie<A>& t, const Value& v) {
  if (!v.is_ground()) throw MalformedKey("search key must be ground: " + v.to_text());
  auto ts = serialize(v);
  return search_tokens(t, std::span<const Token>(ts));
}

namespace detail {

template <class A, class F>
void search_wild_rec(const Trie<A>& t, std::span<const Token> key, std::size_t pos, std::size_t skip, F& on_leaf) {
  if (t.is_mt()) return;
  if (skip > 0) {
    if (!t.is_br()) return;
    search_wild_rec(t.dflt(), key, pos, skip - 1, on_leaf);
    t.edges().for_each([&](const Token& s, const Trie<A>& sub) {
      search_wild_rec(sub, key, pos, skip - 1 + token_width(s), on_leaf);
    });
    return;
  }
  if (pos == key.size()) {
    if (t.is_ok()) on_leaf(t.leaf());
    return;
  }
  if (!t.is_br()) return;
  const Token& tok = key[pos];
  if (tok.is_wild())
    search_wild_rec(t, key, pos + 1, 1, on_leaf);
  else
    search_wild_rec(lookup(t, tok), key, pos + 1, 0, on_leaf);
}

}  // namespace detail

// Calls on_leaf for every leaf whose key set meets the wildcard key.
// A leaf may be reported more than once.
template <class A, class F>
void search_wild(const Trie<A>& t, std::span<const Token> key, F on_leaf) {
  if (!well_formed(key, 1)) throw MalformedKey("search key is not one well-formed value");
  detail::search_wild_rec(t, key, 0, 0, on_leaf);
}

AssertionSet project(const Value& spec, const AssertionSet& t);

// Finite extension of an n-level trie as n-tuples, ascending.
std::vector<std::vector<Value>> key_set(const AssertionSet& t, std::size_t n);

template <class A>
bool is_wf(const Trie<A>& t, std::size_t n) {
  if (t.is_mt()) return true;
  if (t.is_ok()) return n == 0;
  if (n == 0) return false;
  if (!is_wf(t.dflt(), n - 1)) return false;
  bool ok = true;
  t.edges().for_each([&](const Token& s, const Trie<A>& sub) {
    if (ok && (s.is_wild() || !is_wf(sub, n - 1 + token_width(s)))) ok = false;
  });
  return ok;
}

// No br(mt, {}) and no edge equal to the default's tail, at every node.
template <class A>
bool is_canonical(const Trie<A>& t) {
  if (!t.is_br()) return true;
  if (t.dflt().is_mt() && t.edges().empty()) return false;
  if (!is_canonical(t.dflt())) return false;
  bool ok = true;
  t.edges().for_each([&](const Token& s, const Trie<A>& sub) {
    if (ok && (Trie<A>::is_tail(sub, token_width(s), t.dflt()) || !is_canonical(sub))) ok = false;
  });
  return ok;
}

// Ascending pattern strings describing paths to ok; defaults print as _.
// For display: a default path excludes the sibling edges listed beside it.
std::vector<std::string> describe(const AssertionSet& t);

template <class A>
Trie<A> unwrap_slice(Wrapper w, const Trie<A>& t) {
  if (!t.is_br()) return Trie<A>::mt();
  return lookup(t, Token::push(std::string(wrapper_label(w)), 1));
}
template <class A>
Trie<A> wrap_trie(Wrapper w, const Trie<A>& t) {
  if (t.is_mt()) return t;
  return Trie<A>::br(Trie<A>::mt(), typename Trie<A>::Map{}.insert(Token::push(std::string(wrapper_label(w)), 1), t));
}

inline AssertionSet to_set(const Routes& r) {
  return relabel<Unit>(r, [](const IdSet&) { return std::optional<Unit>(Unit{}); });
}
inline Routes to_routes(const AssertionSet& t, std::uint64_t id) {
  return relabel<IdSet>(t, [id](Unit) { return std::optional<IdSet>(IdSet{id}); });
}

}  // namespace ds
