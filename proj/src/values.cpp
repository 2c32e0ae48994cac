#include "dataspace/values.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace ds {

std::size_t hash_mix(std::size_t a, std::size_t b) {
  std::uint64_t x = static_cast<std::uint64_t>(a) ^ (static_cast<std::uint64_t>(b) + 0x9e3779b97f4a7c15ULL +
                                                     (static_cast<std::uint64_t>(a) << 6) +
                                                     (static_cast<std::uint64_t>(a) >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<std::size_t>(x);
}

struct Value::Node {
  Kind kind = Kind::Boolean;
  bool has_label = false;
  bool ground = true;
  bool pattern = true;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::string s;  // string payload, symbol name, capture name or label
  std::vector<Value> fields;
  std::size_t captures = 0;
  std::size_t hash = 0;
};

namespace {

std::size_t hash_string(const std::string& s) { return std::hash<std::string>{}(s); }

std::shared_ptr<Value::Node> make(Kind k) {
  auto n = std::make_shared<Value::Node>();
  n->kind = k;
  return n;
}

const std::shared_ptr<const Value::Node>& false_node() {
  static const std::shared_ptr<const Value::Node> n = [] {
    auto m = make(Kind::Boolean);
    m->hash = hash_mix(static_cast<std::size_t>(Kind::Boolean), 0);
    return std::shared_ptr<const Value::Node>(m);
  }();
  return n;
}

}  // namespace

Value::Value() : n_(false_node()) {}

Value Value::boolean(bool b) {
  if (!b) return Value();
  static const Value t = [] {
    auto n = make(Kind::Boolean);
    n->b = true;
    n->hash = hash_mix(static_cast<std::size_t>(Kind::Boolean), 1);
    return Value(std::shared_ptr<const Node>(n));
  }();
  return t;
}

Value Value::integer(std::int64_t i) {
  auto n = make(Kind::Integer);
  n->i = i;
  n->hash = hash_mix(static_cast<std::size_t>(Kind::Integer), static_cast<std::size_t>(i));
  return Value(std::move(n));
}

Value Value::real(double d) {
  if (std::isnan(d)) throw std::invalid_argument("NaN is not a Value");
  if (d == 0.0) d = 0.0;  // -0.0 and 0.0 are one value
  auto n = make(Kind::Float);
  n->f = d;
  n->hash = hash_mix(static_cast<std::size_t>(Kind::Float), std::bit_cast<std::uint64_t>(d));
  return Value(std::move(n));
}

Value Value::string(std::string s) {
  auto n = make(Kind::String);
  n->hash = hash_mix(static_cast<std::size_t>(Kind::String), hash_string(s));
  n->s = std::move(s);
  return Value(std::move(n));
}

Value Value::symbol(std::string name) {
  auto n = make(Kind::Symbol);
  n->hash = hash_mix(static_cast<std::size_t>(Kind::Symbol), hash_string(name));
  n->s = std::move(name);
  return Value(std::move(n));
}

Value Value::tuple(std::vector<Value> fields) {
  auto n = make(Kind::Compound);
  std::size_t h = hash_mix(static_cast<std::size_t>(Kind::Compound), fields.size());
  for (const auto& f : fields) {
    h = hash_mix(h, f.hash());
    n->ground = n->ground && f.is_ground();
    n->pattern = n->pattern && f.is_pattern();
    n->captures += f.capture_count();
  }
  n->hash = h;
  n->fields = std::move(fields);
  return Value(std::move(n));
}

Value Value::record(std::string label, std::vector<Value> fields) {
  auto n = make(Kind::Compound);
  n->has_label = true;
  std::size_t h = hash_mix(hash_mix(static_cast<std::size_t>(Kind::Compound) + 17, hash_string(label)),
                           fields.size());
  for (const auto& f : fields) {
    h = hash_mix(h, f.hash());
    n->ground = n->ground && f.is_ground();
    n->pattern = n->pattern && f.is_pattern();
    n->captures += f.capture_count();
  }
  n->hash = h;
  n->s = std::move(label);
  n->fields = std::move(fields);
  return Value(std::move(n));
}

Value Value::wildcard() {
  static const Value w = [] {
    auto n = make(Kind::Wildcard);
    n->ground = false;
    n->hash = hash_mix(static_cast<std::size_t>(Kind::Wildcard), 0);
    return Value(std::shared_ptr<const Node>(n));
  }();
  return w;
}

Value Value::capture(std::string name) {
  auto n = make(Kind::Capture);
  n->ground = false;
  n->pattern = false;
  n->captures = 1;
  n->hash = hash_mix(static_cast<std::size_t>(Kind::Capture), hash_string(name));
  n->s = std::move(name);
  return Value(std::move(n));
}

Kind Value::kind() const { return n_->kind; }
bool Value::is_ground() const { return n_->ground; }
bool Value::is_pattern() const { return n_->pattern; }
std::size_t Value::capture_count() const { return n_->captures; }

bool Value::as_bool() const {
  if (n_->kind != Kind::Boolean) throw std::logic_error("not a boolean: " + to_text());
  return n_->b;
}
std::int64_t Value::as_int() const {
  if (n_->kind != Kind::Integer) throw std::logic_error("not an integer: " + to_text());
  return n_->i;
}
double Value::as_float() const {
  if (n_->kind == Kind::Integer) return static_cast<double>(n_->i);
  if (n_->kind != Kind::Float) throw std::logic_error("not a number: " + to_text());
  return n_->f;
}
const std::string& Value::as_string() const {
  switch (n_->kind) {
    case Kind::String:
    case Kind::Symbol:
    case Kind::Capture:
      return n_->s;
    default:
      throw std::logic_error("no string payload: " + to_text());
  }
}
bool Value::has_label() const { return n_->kind == Kind::Compound && n_->has_label; }
const std::string& Value::label() const {
  static const std::string empty;
  return has_label() ? n_->s : empty;
}
const std::vector<Value>& Value::fields() const {
  static const std::vector<Value> none;
  return n_->kind == Kind::Compound ? n_->fields : none;
}
std::size_t Value::hash() const { return n_->hash; }

bool operator==(const Value& a, const Value& b) {
  if (a.n_ == b.n_) return true;
  if (a.n_->hash != b.n_->hash) return false;
  return (a <=> b) == 0;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.n_ == b.n_) return std::strong_ordering::equal;
  const auto& x = *a.n_;
  const auto& y = *b.n_;
  if (x.kind != y.kind) return x.kind <=> y.kind;
  switch (x.kind) {
    case Kind::Boolean:
      return x.b <=> y.b;
    case Kind::Integer:
      return x.i <=> y.i;
    case Kind::Float:
      // NaN excluded, so this is total.
      return x.f < y.f ? std::strong_ordering::less
             : y.f < x.f ? std::strong_ordering::greater
                         : std::strong_ordering::equal;
    case Kind::String:
    case Kind::Symbol:
    case Kind::Capture:
      return x.s.compare(y.s) <=> 0;
    case Kind::Wildcard:
      return std::strong_ordering::equal;
    case Kind::Compound: {
      // Same order as the push tokens: unlabeled first, then label, then arity.
      if (x.has_label != y.has_label) return x.has_label <=> y.has_label;
      if (x.has_label) {
        if (auto c = x.s.compare(y.s) <=> 0; c != 0) return c;
      }
      if (x.fields.size() != y.fields.size()) return x.fields.size() <=> y.fields.size();
      for (std::size_t i = 0; i < x.fields.size(); ++i) {
        if (auto c = x.fields[i] <=> y.fields[i]; c != 0) return c;
      }
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

const char* wrapper_label(Wrapper w) {
  switch (w) {
    case Wrapper::Observe:
      return "observe";
    case Wrapper::Outbound:
      return "outbound";
    case Wrapper::Inbound:
      return "inbound";
  }
  return "";
}

Value wrap(Wrapper w, Value v) { return Value::record(wrapper_label(w), {std::move(v)}); }

std::optional<Value> unwrap(Wrapper w, const Value& v) {
  if (v.has_label() && v.arity() == 1 && v.label() == wrapper_label(w)) return v[0];
  return std::nullopt;
}

Value strip_captures(const Value& p) {
  if (p.is_pattern()) return p;
  if (p.is_capture()) return Value::wildcard();
  std::vector<Value> fs;
  fs.reserve(p.arity());
  for (const auto& f : p.fields()) fs.push_back(strip_captures(f));
  return p.has_label() ? Value::record(p.label(), std::move(fs)) : Value::tuple(std::move(fs));
}

namespace {

Value fill(const Value& p, std::span<const Value> vals, std::size_t& next) {
  if (p.capture_count() == 0) return p;
  if (p.is_capture()) {
    if (next >= vals.size()) throw std::invalid_argument("too few values for captures");
    return vals[next++];
  }
  std::vector<Value> fs;
  fs.reserve(p.arity());
  for (const auto& f : p.fields()) fs.push_back(fill(f, vals, next));
  return p.has_label() ? Value::record(p.label(), std::move(fs)) : Value::tuple(std::move(fs));
}

void names(const Value& p, std::vector<std::string>& out) {
  if (p.capture_count() == 0) return;
  if (p.is_capture()) {
    out.push_back(p.as_string());
    return;
  }
  for (const auto& f : p.fields()) names(f, out);
}

}  // namespace

Value fill_captures(const Value& p, std::span<const Value> vals) {
  std::size_t next = 0;
  return fill(p, vals, next);
}

std::vector<std::string> capture_names(const Value& p) {
  std::vector<std::string> out;
  names(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Tokens

Token Token::atom(Value v) {
  if (!v.is_atom()) throw std::invalid_argument("atom token needs an atom: " + v.to_text());
  Token t;
  t.kind_ = Kind::Atom;
  t.hash_ = hash_mix(1, v.hash());
  t.atom_ = std::move(v);
  return t;
}

Token Token::push(std::optional<std::string> label, std::size_t arity) {
  Token t;
  t.kind_ = Kind::Push;
  t.arity_ = arity;
  if (label) {
    t.has_label_ = true;
    t.label_ = std::move(*label);
  }
  t.hash_ = hash_mix(hash_mix(2 + (t.has_label_ ? 1 : 0), std::hash<std::string>{}(t.label_)), arity);
  return t;
}

Token Token::wild() {
  Token t;
  t.kind_ = Kind::Wild;
  t.hash_ = hash_mix(7, 7);
  return t;
}

Token push_token_for(const Value& c) {
  return Token::push(c.has_label() ? std::optional<std::string>(c.label()) : std::nullopt, c.arity());
}

bool operator==(const Token& a, const Token& b) {
  if (a.kind_ != b.kind_ || a.hash_ != b.hash_) return false;
  switch (a.kind_) {
    case Token::Kind::Atom:
      return a.atom_ == b.atom_;
    case Token::Kind::Push:
      return a.arity_ == b.arity_ && a.has_label_ == b.has_label_ && a.label_ == b.label_;
    case Token::Kind::Wild:
      return true;
  }
  return false;
}

std::strong_ordering operator<=>(const Token& a, const Token& b) {
  if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
  switch (a.kind_) {
    case Token::Kind::Atom:
      return a.atom_ <=> b.atom_;
    case Token::Kind::Push:
      if (a.has_label_ != b.has_label_) return a.has_label_ <=> b.has_label_;
      if (auto c = a.label_.compare(b.label_) <=> 0; c != 0) return c;
      return a.arity_ <=> b.arity_;
    case Token::Kind::Wild:
      return std::strong_ordering::equal;
  }
  return std::strong_ordering::equal;
}

std::string Token::to_text() const {
  switch (kind_) {
    case Kind::Atom:
      return atom_.to_text();
    case Kind::Push:
      return "⟪" + std::to_string(arity_) + (has_label_ ? ":" + label_ : std::string());
    case Kind::Wild:
      return "★";
  }
  return "";
}

void serialize_into(const Value& v, std::vector<Token>& out) {
  switch (v.kind()) {
    case ds::Kind::Compound:
      out.push_back(push_token_for(v));
      for (const auto& f : v.fields()) serialize_into(f, out);
      return;
    case ds::Kind::Wildcard:
      out.push_back(Token::wild());
      return;
    case ds::Kind::Capture:
      throw std::invalid_argument("cannot serialize a capture");
    default:
      out.push_back(Token::atom(v));
  }
}

std::vector<Token> serialize(const Value& v) {
  std::vector<Token> out;
  serialize_into(v, out);
  return out;
}

namespace {

Value parse_one(std::span<const Token> ts, std::size_t& pos) {
  if (pos >= ts.size()) throw MalformedTokens("token sequence ended early");
  const Token& t = ts[pos++];
  switch (t.kind()) {
    case Token::Kind::Atom:
      return t.atom_value();
    case Token::Kind::Wild:
      return Value::wildcard();
    case Token::Kind::Push: {
      std::vector<Value> fs;
      fs.reserve(t.arity());
      for (std::size_t i = 0; i < t.arity(); ++i) fs.push_back(parse_one(ts, pos));
      return t.has_label() ? Value::record(t.label(), std::move(fs)) : Value::tuple(std::move(fs));
    }
  }
  throw MalformedTokens("bad token");
}

}  // namespace

ParseResult parse(std::span<const Token> ts, std::size_t n) {
  ParseResult r;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) r.values.push_back(parse_one(ts, pos));
  r.rest.assign(ts.begin() + static_cast<std::ptrdiff_t>(pos), ts.end());
  return r;
}

bool well_formed(std::span<const Token> ts, std::size_t n) {
  // Counting suffices: each token fills one slot and a push opens arity more.
  std::size_t need = n;
  for (const auto& t : ts) {
    if (need == 0) return false;
    need = need - 1 + (t.is_push() ? t.arity() : 0);
  }
  return need == 0;
}

std::string tokens_to_text(std::span<const Token> ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ' ';
    out += ts[i].to_text();
  }
  return out;
}

}  // namespace ds
