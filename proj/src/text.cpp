#include <array>
#include <charconv>
#include <cmath>

#include "dataspace/values.hpp"

namespace ds {

namespace {

constexpr std::string_view kDown = "\xE2\x86\x93";  // ↓
constexpr std::string_view kUp = "\xE2\x86\x91";    // ↑

bool is_delim(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' || c == ')' || c == '"' || c == '|';
}

bool plain_symbol(const std::string& s) {
  if (s.empty() || s == "_") return false;
  for (char c : s) {
    if (is_delim(c)) return false;
  }
  char c0 = s[0];
  if (c0 == '#' || c0 == '?' || c0 == '$' || c0 == '\'' || (c0 >= '0' && c0 <= '9')) return false;
  if ((c0 == '-' || c0 == '+' || c0 == '.') && s.size() > 1) return false;
  if (s.starts_with(kDown) || s.starts_with(kUp)) return false;
  return true;
}

void quote(std::string& out, const std::string& s, char q) {
  out += q;
  for (char c : s) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (c == q) out += '\\';
        out += c;
    }
  }
  out += q;
}

void print_float(std::string& out, double d) {
  if (std::isinf(d)) {
    out += d > 0 ? "+inf.0" : "-inf.0";
    return;
  }
  std::array<char, 64> buf{};
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  std::string_view s(buf.data(), static_cast<std::size_t>(r.ptr - buf.data()));
  out += s;
  if (s.find_first_of(".e") == std::string_view::npos) out += ".0";
}

void print(std::string& out, const Value& v) {
  switch (v.kind()) {
    case Kind::Boolean:
      out += v.as_bool() ? "#t" : "#f";
      return;
    case Kind::Integer:
      out += std::to_string(v.as_int());
      return;
    case Kind::Float:
      print_float(out, v.as_float());
      return;
    case Kind::String:
      quote(out, v.as_string(), '"');
      return;
    case Kind::Symbol:
      if (plain_symbol(v.as_string()))
        out += v.as_string();
      else
        quote(out, v.as_string(), '|');
      return;
    case Kind::Wildcard:
      out += '_';
      return;
    case Kind::Capture:
      out += '$';
      out += v.as_string();
      return;
    case Kind::Compound:
      break;
  }
  if (v.has_label() && v.arity() == 1) {
    if (v.label() == "observe") {
      out += '?';
      print(out, v[0]);
      return;
    }
    if (v.label() == "outbound") {
      out += kDown;
      print(out, v[0]);
      return;
    }
    if (v.label() == "inbound") {
      out += kUp;
      print(out, v[0]);
      return;
    }
  }
  if (v.has_label()) {
    out += '#';
    if (plain_symbol(v.label()))
      out += v.label();
    else
      quote(out, v.label(), '|');
  }
  out += '(';
  bool first = true;
  for (const auto& f : v.fields()) {
    if (!first) out += ' ';
    first = false;
    print(out, f);
  }
  out += ')';
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  bool at_end() {
    skip();
    return p_ >= s_.size();
  }

  Value read() {
    skip();
    if (p_ >= s_.size()) fail("unexpected end of input");
    char c = s_[p_];
    if (c == '(') {
      ++p_;
      return Value::tuple(read_fields());
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') return Value::string(read_quoted('"'));
    if (c == '|') return Value::symbol(read_quoted('|'));
    if (c == '?') {
      ++p_;
      return observe(read());
    }
    if (s_.substr(p_).starts_with(kDown)) {
      p_ += kDown.size();
      return outbound(read());
    }
    if (s_.substr(p_).starts_with(kUp)) {
      p_ += kUp.size();
      return inbound(read());
    }
    if (c == '$') {
      ++p_;
      return Value::capture(read_bare());
    }
    if (c == '#') {
      ++p_;
      std::string name = (p_ < s_.size() && s_[p_] == '|') ? read_quoted('|') : read_bare();
      if (p_ < s_.size() && s_[p_] == '(') {
        ++p_;
        return Value::record(std::move(name), read_fields());
      }
      if (name == "t") return Value::boolean(true);
      if (name == "f") return Value::boolean(false);
      fail("bad '#' form: #" + name);
    }
    std::string tok = read_bare();
    if (tok.empty()) fail("empty token");
    if (tok == "_") return Value::wildcard();
    if (tok == "+inf.0") return Value::real(INFINITY);
    if (tok == "-inf.0") return Value::real(-INFINITY);
    if (auto n = number(tok)) return *n;
    return Value::symbol(std::move(tok));
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw TextError(why + " at offset " + std::to_string(p_));
  }

  void skip() {
    while (p_ < s_.size() && (s_[p_] == ' ' || s_[p_] == '\t' || s_[p_] == '\n' || s_[p_] == '\r')) ++p_;
  }

  std::vector<Value> read_fields() {
    std::vector<Value> fs;
    for (;;) {
      skip();
      if (p_ >= s_.size()) fail("unterminated compound");
      if (s_[p_] == ')') {
        ++p_;
        return fs;
      }
      fs.push_back(read());
    }
  }

  std::string read_bare() {
    std::size_t start = p_;
    while (p_ < s_.size() && !is_delim(s_[p_])) ++p_;
    return std::string(s_.substr(start, p_ - start));
  }

  std::string read_quoted(char q) {
    ++p_;
    std::string out;
    while (p_ < s_.size() && s_[p_] != q) {
      char c = s_[p_++];
      if (c == '\\') {
        if (p_ >= s_.size()) fail("dangling escape");
        char e = s_[p_++];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case 'r':
            out += '\r';
            break;
          default:
            out += e;
        }
      } else {
        out += c;
      }
    }
    if (p_ >= s_.size()) fail("unterminated quote");
    ++p_;
    return out;
  }

  static std::optional<Value> number(const std::string& tok) {
    char c0 = tok[0];
    bool numeric_start = (c0 >= '0' && c0 <= '9') ||
                         ((c0 == '-' || c0 == '+' || c0 == '.') && tok.size() > 1);
    if (!numeric_start) return std::nullopt;
    const char* b = tok.data() + (c0 == '+' ? 1 : 0);
    const char* e = tok.data() + tok.size();
    if (tok.find_first_of(".eE") == std::string::npos) {
      std::int64_t i = 0;
      auto r = std::from_chars(b, e, i);
      if (r.ec == std::errc() && r.ptr == e) return Value::integer(i);
    }
    double d = 0;
    auto r = std::from_chars(b, e, d);
    if (r.ec == std::errc() && r.ptr == e) return Value::real(d);
    throw TextError("malformed number: " + tok);
  }

  std::string_view s_;
  std::size_t p_ = 0;
};

}  // namespace

std::string Value::to_text() const {
  std::string out;
  print(out, *this);
  return out;
}

Value parse_value(std::string_view text) {
  Reader r(text);
  Value v = r.read();
  if (!r.at_end()) throw TextError("trailing input after value");
  return v;
}

std::vector<Value> parse_values(std::string_view text) {
  Reader r(text);
  std::vector<Value> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

}  // namespace ds
