#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ds {

// Atom kinds come first, in comparison order.
enum class Kind : std::uint8_t {
  Boolean,
  Integer,
  Float,
  String,
  Symbol,
  Compound,
  Wildcard,
  Capture,
};

enum class Wrapper : std::uint8_t { Observe, Outbound, Inbound };

class Value {
 public:
  Value();  // #f

  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value real(double d);  // throws std::invalid_argument on NaN
  static Value string(std::string s);
  static Value symbol(std::string name);
  static Value tuple(std::vector<Value> fields);
  static Value record(std::string label, std::vector<Value> fields);
  static Value wildcard();
  static Value capture(std::string name = {});

  Kind kind() const;
  bool is_atom() const { return kind() < Kind::Compound; }
  bool is_compound() const { return kind() == Kind::Compound; }
  bool is_wildcard() const { return kind() == Kind::Wildcard; }
  bool is_capture() const { return kind() == Kind::Capture; }
  // No wildcards or captures anywhere inside.
  bool is_ground() const;
  // No captures anywhere inside (wildcards allowed).
  bool is_pattern() const;
  std::size_t capture_count() const;

  bool as_bool() const;
  std::int64_t as_int() const;
  double as_float() const;
  const std::string& as_string() const;  // String payload, Symbol name or Capture name

  bool has_label() const;
  const std::string& label() const;  // empty when unlabeled
  const std::vector<Value>& fields() const;
  std::size_t arity() const { return is_compound() ? fields().size() : 0; }
  const Value& operator[](std::size_t i) const { return fields()[i]; }

  std::size_t hash() const;

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

  std::string to_text() const;

  struct Node;

 private:
  explicit Value(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

inline Value boolean(bool b) { return Value::boolean(b); }
inline Value integer(std::int64_t i) { return Value::integer(i); }
inline Value real(double d) { return Value::real(d); }
inline Value str(std::string s) { return Value::string(std::move(s)); }
inline Value sym(std::string s) { return Value::symbol(std::move(s)); }
inline Value tuple(std::vector<Value> fs) { return Value::tuple(std::move(fs)); }
inline Value record(std::string l, std::vector<Value> fs) {
  return Value::record(std::move(l), std::move(fs));
}
inline Value wild() { return Value::wildcard(); }
inline Value discard() { return Value::wildcard(); }
inline Value capture(std::string name = {}) { return Value::capture(std::move(name)); }

const char* wrapper_label(Wrapper w);
Value wrap(Wrapper w, Value v);
std::optional<Value> unwrap(Wrapper w, const Value& v);
inline Value observe(Value v) { return wrap(Wrapper::Observe, std::move(v)); }
inline Value outbound(Value v) { return wrap(Wrapper::Outbound, std::move(v)); }
inline Value inbound(Value v) { return wrap(Wrapper::Inbound, std::move(v)); }

// Captures become wildcards.
Value strip_captures(const Value& p);
// Replaces the i-th capture (pre-order) with vals[i].
Value fill_captures(const Value& p, std::span<const Value> vals);
// Names of captures in pre-order.
std::vector<std::string> capture_names(const Value& p);

struct TextError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Value parse_value(std::string_view text);
std::vector<Value> parse_values(std::string_view text);

// ---------------------------------------------------------------------------
// Tokens

class Token {
 public:
  enum class Kind : std::uint8_t { Atom, Push, Wild };

  static Token atom(Value v);
  static Token push(std::optional<std::string> label, std::size_t arity);
  static Token wild();

  Kind kind() const { return kind_; }
  bool is_atom() const { return kind_ == Kind::Atom; }
  bool is_push() const { return kind_ == Kind::Push; }
  bool is_wild() const { return kind_ == Kind::Wild; }
  std::size_t arity() const { return arity_; }
  const Value& atom_value() const { return atom_; }
  bool has_label() const { return has_label_; }
  const std::string& label() const { return label_; }
  std::size_t hash() const { return hash_; }

  friend bool operator==(const Token& a, const Token& b);
  friend std::strong_ordering operator<=>(const Token& a, const Token& b);

  std::string to_text() const;

 private:
  Token() = default;
  Kind kind_ = Kind::Wild;
  bool has_label_ = false;
  std::size_t arity_ = 0;
  std::size_t hash_ = 0;
  Value atom_;
  std::string label_;
};

Token push_token_for(const Value& compound);

struct MalformedTokens : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pre-order reading; wildcards become Wild tokens, captures are rejected.
std::vector<Token> serialize(const Value& v);
void serialize_into(const Value& v, std::vector<Token>& out);

struct ParseResult {
  std::vector<Value> values;
  std::vector<Token> rest;
};

// Reads exactly n values from the front of ts.
ParseResult parse(std::span<const Token> ts, std::size_t n);
bool well_formed(std::span<const Token> ts, std::size_t n);

std::string tokens_to_text(std::span<const Token> ts);

std::size_t hash_mix(std::size_t a, std::size_t b);

}  // namespace ds

template <>
struct std::hash<ds::Value> {
  std::size_t operator()(const ds::Value& v) const noexcept { return v.hash(); }
};
template <>
struct std::hash<ds::Token> {
  std::size_t operator()(const ds::Token& t) const noexcept { return t.hash(); }
};
