#include "dataspace/trie.hpp"

namespace ds {

namespace {

using T = AssertionSet;
using Map = T::Map;

T neg(const T& t, std::size_t n) {
  if (t.is_mt()) return make_tail(n, T::ok());
  if (t.is_ok()) return T::mt();
  if (n == 0) throw std::logic_error("negate: trie deeper than its level");
  T d = neg(t.dflt(), n - 1);
  std::vector<std::pair<Token, T>> out;
  t.edges().for_each([&](const Token& s, const T& sub) {
    T h = neg(sub, n - 1 + token_width(s));
    if (!T::is_tail(h, token_width(s), d)) out.emplace_back(s, std::move(h));
  });
  return T::br(std::move(d), Map::from_sorted(out));
}

using Cont = std::function<T(const T&)>;

T capture(std::size_t n, const T& t, const Cont& k) {
  if (n == 0) return k(t);
  if (!t.is_br()) return T::mt();
  T d = capture(n - 1, t.dflt(), k);
  std::vector<std::pair<Token, T>> out;
  t.edges().for_each([&](const Token& s, const T& sub) {
    T h = capture(n - 1 + token_width(s), sub, k);
    if (!T::is_tail(h, token_width(s), d)) out.emplace_back(s, std::move(h));
  });
  return T::br(std::move(d), Map::from_sorted(out));
}

// stack holds the pattern items still to match; the next one is at the back.
T walk(std::vector<Value> stack, const T& t, const Cont& k) {
  if (stack.empty()) return k(t);
  if (!t.is_br()) return T::mt();
  Value p = std::move(stack.back());
  stack.pop_back();
  switch (p.kind()) {
    case Kind::Wildcard: {
      T acc = walk(stack, t.dflt(), k);
      t.edges().for_each([&](const Token& s, const T& sub) {
        auto st = stack;
        st.insert(st.end(), token_width(s), Value::wildcard());
        acc = union_(acc, walk(std::move(st), sub, k));
      });
      return acc;
    }
    case Kind::Capture:
      return capture(1, t, [&](const T& rest) { return walk(stack, rest, k); });
    case Kind::Compound: {
      Token s = push_token_for(p);
      for (std::size_t i = p.arity(); i-- > 0;) stack.push_back(p[i]);
      return walk(std::move(stack), lookup(t, s), k);
    }
    default:
      return walk(std::move(stack), lookup(t, Token::atom(p)), k);
  }
}

void paths(const T& t, std::vector<Token>& prefix, std::vector<std::vector<Token>>& out) {
  if (t.is_mt()) return;
  if (t.is_ok()) {
    out.push_back(prefix);
    return;
  }
  if (!t.dflt().is_mt()) throw InfiniteSet("key set is infinite");
  t.edges().for_each([&](const Token& s, const T& sub) {
    prefix.push_back(s);
    paths(sub, prefix, out);
    prefix.pop_back();
  });
}

void describe_paths(const T& t, std::vector<Token>& prefix, std::vector<std::string>& out) {
  if (t.is_mt()) return;
  if (t.is_ok()) {
    // Parse what we can; the wildcard token stands for a default path.
    auto pr = parse(prefix, 1);
    out.push_back(pr.values.empty() ? std::string("()") : pr.values[0].to_text());
    return;
  }
  prefix.push_back(Token::wild());
  describe_paths(t.dflt(), prefix, out);
  prefix.pop_back();
  t.edges().for_each([&](const Token& s, const T& sub) {
    prefix.push_back(s);
    describe_paths(sub, prefix, out);
    prefix.pop_back();
  });
}

}  // namespace

AssertionSet negate(const AssertionSet& t, std::size_t n) { return neg(t, n); }

AssertionSet project(const Value& spec, const AssertionSet& t) {
  return walk({spec}, t, [](const T& rest) { return rest.is_ok() ? rest : T::mt(); });
}

std::vector<std::vector<Value>> key_set(const AssertionSet& t, std::size_t n) {
  std::vector<std::vector<Token>> ps;
  std::vector<Token> prefix;
  paths(t, prefix, ps);
  std::vector<std::vector<Value>> out;
  out.reserve(ps.size());
  for (const auto& p : ps) {
    auto r = parse(p, n);
    if (!r.rest.empty()) throw MalformedTokens("key_set: path longer than its level");
    out.push_back(std::move(r.values));
  }
  return out;
}

std::vector<std::string> describe(const AssertionSet& t) {
  std::vector<std::string> out;
  std::vector<Token> prefix;
  // Only level-1 tries describe as single values.
  try {
    describe_paths(t, prefix, out);
  } catch (const MalformedTokens&) {
    out.clear();
    out.push_back(t.to_string());
  }
  return out;
}

}  // namespace ds
