#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace ds {

// Persistent AVL map. Updates copy the search path and share the rest.
// Each node caches an additive hash of its subtree's entries, so the map
// hash depends only on the contents, never on the tree shape.
//
// K needs operator<=>, operator== and hash(); V needs operator== and hash().
template <class K, class V>
class PMap {
  struct Node;
  using Ptr = std::shared_ptr<const Node>;

  struct Node {
    K key;
    V val;
    Ptr left, right;
    std::uint8_t height;
    std::size_t size;
    std::size_t hash;
  };

 public:
  PMap() = default;

  std::size_t size() const { return root_ ? root_->size : 0; }
  bool empty() const { return !root_; }
  std::size_t hash() const { return root_ ? root_->hash : 0; }

  const V* find(const K& k) const {
    const Node* n = root_.get();
    while (n) {
      auto c = k <=> n->key;
      if (c < 0)
        n = n->left.get();
      else if (c > 0)
        n = n->right.get();
      else
        return &n->val;
    }
    return nullptr;
  }

  PMap insert(const K& k, const V& v) const { return PMap(ins(root_, k, v)); }

  PMap erase(const K& k) const {
    if (!find(k)) return *this;
    return PMap(del(root_, k));
  }

  // In-order traversal; f(key, value).
  template <class F>
  void for_each(F&& f) const {
    walk(root_.get(), f);
  }

  std::vector<std::pair<K, V>> entries() const {
    std::vector<std::pair<K, V>> out;
    out.reserve(size());
    for_each([&](const K& k, const V& v) { out.emplace_back(k, v); });
    return out;
  }

  // Builds a balanced map from strictly ascending entries in O(n).
  static PMap from_sorted(const std::vector<std::pair<K, V>>& es) {
    return PMap(build(es, 0, es.size()));
  }

  friend bool operator==(const PMap& a, const PMap& b) {
    if (a.root_ == b.root_) return true;
    if (a.size() != b.size() || a.hash() != b.hash()) return false;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (!(ea[i].first == eb[i].first) || !(ea[i].second == eb[i].second)) return false;
    }
    return true;
  }

 private:
  explicit PMap(Ptr r) : root_(std::move(r)) {}

  static std::size_t entry_hash(const K& k, const V& v) {
    std::uint64_t x = static_cast<std::uint64_t>(k.hash()) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(v.hash());
    x ^= x >> 29;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 32;
    return static_cast<std::size_t>(x);
  }

  static int h(const Ptr& n) { return n ? n->height : 0; }
  static std::size_t sz(const Ptr& n) { return n ? n->size : 0; }
  static std::size_t hs(const Ptr& n) { return n ? n->hash : 0; }

  static Ptr node(const K& k, const V& v, Ptr l, Ptr r) {
    auto height = static_cast<std::uint8_t>(1 + std::max(h(l), h(r)));
    std::size_t size = 1 + sz(l) + sz(r);
    std::size_t hash = entry_hash(k, v) + hs(l) + hs(r);
    return std::make_shared<const Node>(Node{k, v, std::move(l), std::move(r), height, size, hash});
  }

  static Ptr balance(const K& k, const V& v, Ptr l, Ptr r) {
    int hl = h(l), hr = h(r);
    if (hl > hr + 1) {
      if (h(l->left) >= h(l->right)) {
        return node(l->key, l->val, l->left, node(k, v, l->right, std::move(r)));
      }
      const Node& lr = *l->right;
      return node(lr.key, lr.val, node(l->key, l->val, l->left, lr.left), node(k, v, lr.right, std::move(r)));
    }
    if (hr > hl + 1) {
      if (h(r->right) >= h(r->left)) {
        return node(r->key, r->val, node(k, v, std::move(l), r->left), r->right);
      }
      const Node& rl = *r->left;
      return node(rl.key, rl.val, node(k, v, std::move(l), rl.left), node(r->key, r->val, rl.right, r->right));
    }
    return node(k, v, std::move(l), std::move(r));
  }

  static Ptr ins(const Ptr& n, const K& k, const V& v) {
    if (!n) return node(k, v, nullptr, nullptr);
    auto c = k <=> n->key;
    if (c < 0) return balance(n->key, n->val, ins(n->left, k, v), n->right);
    if (c > 0) return balance(n->key, n->val, n->left, ins(n->right, k, v));
    return node(k, v, n->left, n->right);
  }

  static Ptr remove_min(const Ptr& n, const Node*& min) {
    if (!n->left) {
      min = n.get();
      return n->right;
    }
    return balance(n->key, n->val, remove_min(n->left, min), n->right);
  }

  static Ptr del(const Ptr& n, const K& k) {
    auto c = k <=> n->key;
    if (c < 0) return balance(n->key, n->val, del(n->left, k), n->right);
    if (c > 0) return balance(n->key, n->val, n->left, del(n->right, k));
    if (!n->left) return n->right;
    if (!n->right) return n->left;
    const Node* min = nullptr;
    Ptr r = remove_min(n->right, min);
    return balance(min->key, min->val, n->left, std::move(r));
  }

  static Ptr build(const std::vector<std::pair<K, V>>& es, std::size_t lo, std::size_t hi) {
    if (lo >= hi) return nullptr;
    std::size_t mid = lo + (hi - lo) / 2;
    return node(es[mid].first, es[mid].second, build(es, lo, mid), build(es, mid + 1, hi));
  }

  template <class F>
  static void walk(const Node* n, F& f) {
    while (n) {
      walk(n->left.get(), f);
      f(n->key, n->val);
      n = n->right.get();
    }
  }

  Ptr root_;
};

}  // namespace ds
