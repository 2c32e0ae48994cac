#include "dataspace/patch.hpp"

namespace ds {

Patch::Patch(AssertionSet a, AssertionSet r) {
  AssertionSet both = intersect(a, r);
  if (both.is_mt()) {
    added = std::move(a);
    removed = std::move(r);
  } else {
    added = subtract(a, both);
    removed = subtract(r, both);
  }
}

std::string set_text(const AssertionSet& t) {
  std::string out = "{";
  bool first = true;
  for (const auto& d : describe(t)) {
    if (!first) out += ", ";
    first = false;
    out += d;
  }
  return out + "}";
}

std::string Patch::to_text() const { return "+" + set_text(added) + "/-" + set_text(removed); }

std::string event_text(const Event& e) {
  if (const auto* m = std::get_if<Message>(&e)) return "<" + m->body.to_text() + ">";
  return std::get<Patch>(e).to_text();
}

Patch compose(const Patch& newer, const Patch& older) {
  if (newer.empty()) return older;
  if (older.empty()) return newer;
  return Patch(subtract(union_(older.added, newer.added), newer.removed),
               union_(subtract(older.removed, newer.added), newer.removed));
}

Patch limit(const Patch& requested, const AssertionSet& current) {
  return Patch(subtract(requested.added, current), intersect(requested.removed, current));
}

AssertionSet apply(const AssertionSet& current, const Patch& delta) {
  return subtract(union_(current, delta.added), delta.removed);
}

Patch aggregate_visibility(const Patch& delta, const AssertionSet& others) {
  if (others.is_mt()) return delta;
  return Patch(subtract(delta.added, others), subtract(delta.removed, others));
}

Event lift_inbound(const Event& e) {
  if (const auto* m = std::get_if<Message>(&e)) return Message{inbound(m->body)};
  const auto& p = std::get<Patch>(e);
  return Patch(wrap_trie(Wrapper::Inbound, p.added), wrap_trie(Wrapper::Inbound, p.removed));
}

namespace {

AssertionSet relayed(const AssertionSet& t) {
  AssertionSet direct = unwrap_slice(Wrapper::Outbound, t);
  AssertionSet interest = unwrap_slice(Wrapper::Inbound, unwrap_slice(Wrapper::Observe, t));
  return union_(direct, wrap_trie(Wrapper::Observe, interest));
}

}  // namespace

Patch drop_outbound(const Patch& delta, const AssertionSet& others) {
  Patch visible = aggregate_visibility(delta, others);
  return Patch(relayed(visible.added), relayed(visible.removed));
}

std::optional<Value> drop_outbound(const Message& m) { return unwrap(Wrapper::Outbound, m.body); }

}  // namespace ds
