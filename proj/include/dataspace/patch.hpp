#pragma once

#include <optional>
#include <string>
#include <variant>

#include "dataspace/trie.hpp"

namespace ds {

// added/removed, kept disjoint.
struct Patch {
  AssertionSet added;
  AssertionSet removed;

  Patch() = default;
  // Overlap is subtracted from both sides.
  Patch(AssertionSet a, AssertionSet r);

  static Patch assert_(const Value& p) { return Patch(compile_pattern(p), {}); }
  static Patch retract(const Value& p) { return Patch({}, compile_pattern(p)); }
  static Patch retract_all() { return Patch({}, compile_pattern(wild())); }

  bool empty() const { return added.is_mt() && removed.is_mt(); }
  friend bool operator==(const Patch& a, const Patch& b) {
    return a.added == b.added && a.removed == b.removed;
  }
  std::string to_text() const;
};

struct Message {
  Value body;
  friend bool operator==(const Message& a, const Message& b) { return a.body == b.body; }
};

using Event = std::variant<Message, Patch>;

std::string event_text(const Event& e);

// newer applied after older.
Patch compose(const Patch& newer, const Patch& older);
Patch limit(const Patch& requested, const AssertionSet& current);
AssertionSet apply(const AssertionSet& current, const Patch& delta);
Patch aggregate_visibility(const Patch& delta, const AssertionSet& others);

Event lift_inbound(const Event& e);
// Assertions for the containing layer: ↓c gives c and ?↑c gives ?c.
Patch drop_outbound(const Patch& delta, const AssertionSet& others);
std::optional<Value> drop_outbound(const Message& m);

std::string set_text(const AssertionSet& t);

}  // namespace ds
