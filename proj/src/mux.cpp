#include "dataspace/mux.hpp"

namespace ds {

namespace {

void collect(const Routes& r, IdSet& acc) {
  if (r.is_mt()) return;
  if (r.is_ok()) {
    acc = acc.union_with(r.leaf());
    return;
  }
  collect(r.dflt(), acc);
  r.edges().for_each([&](const Token&, const Routes& sub) { collect(sub, acc); });
}

AssertionSet observers_slice(const AssertionSet& t) { return unwrap_slice(Wrapper::Observe, t); }

// Assertions of `part` that nobody other than s holds in r.
AssertionSet without_others(const AssertionSet& part, const Routes& r, StreamId s) {
  return combine_left(
      part, r,
      [s](Unit, const IdSet& owners) -> std::optional<Unit> {
        if (owners.size() == 0 || (owners.size() == 1 && owners.contains(s))) return Unit{};
        return std::nullopt;
      },
      true);
}

// Elements of t paired with the observers of each element in obs.
Routes interested(const AssertionSet& t, const Routes& obs) {
  return combine_left(obs, t, [](const IdSet& who, Unit) -> std::optional<IdSet> { return who; }, false);
}

AssertionSet for_observer(const Routes& x, StreamId who) {
  return relabel<Unit>(x, [who](const IdSet& s) -> std::optional<Unit> {
    if (s.contains(who)) return Unit{};
    return std::nullopt;
  });
}

// Part of the aggregate held in r that lies inside t.
AssertionSet aggregate_within(const Routes& r, const AssertionSet& t) {
  return combine_left(t, r, [](Unit, const IdSet&) -> std::optional<Unit> { return Unit{}; }, false);
}

}  // namespace

IdSet leaves_of(const Routes& r) {
  IdSet acc;
  collect(r, acc);
  return acc;
}

StreamId Mux::add_stream() {
  StreamId s = next_++;
  per_stream_.emplace(s, AssertionSet::mt());
  return s;
}

const AssertionSet& Mux::assertions_of(StreamId s) const {
  auto it = per_stream_.find(s);
  if (it == per_stream_.end()) throw UnknownStream("unknown stream " + std::to_string(s));
  return it->second;
}

std::vector<StreamId> Mux::streams() const {
  std::vector<StreamId> out;
  out.reserve(per_stream_.size());
  for (const auto& [s, _] : per_stream_) out.push_back(s);
  return out;
}

MuxUpdate Mux::update_stream(StreamId s, const Patch& requested) {
  auto it = per_stream_.find(s);
  if (it == per_stream_.end()) throw UnknownStream("unknown stream " + std::to_string(s));
  MuxUpdate u;
  u.applied = limit(requested, it->second);
  if (u.applied.empty()) return u;
  const Patch& d = u.applied;

  const Routes r_old = routes_;
  const AssertionSet own_old = it->second;
  const AssertionSet own_new = apply(own_old, d);

  const Routes added_r = to_routes(d.added, s);
  const Routes removed_r = to_routes(d.removed, s);
  const AssertionSet in_b = without_others(d.added, r_old, s);
  const AssertionSet out_b = without_others(d.removed, r_old, s);
  u.outward_basis = Patch(in_b, out_b);

  Routes r_new = r_old;
  if (!added_r.is_mt()) r_new = union_routes(r_new, added_r);
  if (!removed_r.is_mt()) r_new = subtract_routes(r_new, removed_r);
  routes_ = r_new;
  it->second = own_new;

  std::map<StreamId, Patch> events;

  // Peers see the net change, filtered by their interests before the update.
  const Routes obs_old = unwrap_slice(Wrapper::Observe, r_old);
  const Routes x_in = interested(in_b, obs_old);
  const Routes x_out = interested(out_b, obs_old);
  IdSet peers = leaves_of(x_in).union_with(leaves_of(x_out));
  for (StreamId who : peers) {
    if (who == s) continue;
    Patch p(for_observer(x_in, who), for_observer(x_out, who));
    if (!p.empty()) events.emplace(who, std::move(p));
  }

  // Feedback: new assertions meet the author's new interests, and new
  // interests examine the whole aggregate.
  AssertionSet fb_add, fb_rem;
  if (!d.added.is_mt()) {
    fb_add = intersect(in_b, observers_slice(own_new));
    fb_add = union_(fb_add, aggregate_within(r_new, observers_slice(d.added)));
  }
  if (!d.removed.is_mt()) {
    fb_rem = intersect(out_b, observers_slice(own_old));
    fb_rem = union_(fb_rem, aggregate_within(r_old, observers_slice(d.removed)));
  }
  Patch fb(fb_add, fb_rem);
  if (!fb.empty()) events.emplace(s, std::move(fb));

  u.events.assign(events.begin(), events.end());
  return u;
}

MuxUpdate Mux::remove_stream(StreamId s) {
  auto it = per_stream_.find(s);
  if (it == per_stream_.end()) throw UnknownStream("unknown stream " + std::to_string(s));
  MuxUpdate u = update_stream(s, Patch(AssertionSet::mt(), it->second));
  std::erase_if(u.events, [s](const auto& e) { return e.first == s; });
  per_stream_.erase(s);
  return u;
}

IdSet Mux::route_message(const Value& body) const {
  IdSet acc;
  auto key = serialize(observe(strip_captures(body)));
  search_wild(routes_, std::span<const Token>(key), [&](const IdSet& s) { acc = acc.union_with(s); });
  return acc;
}

bool Mux::consistent() const {
  Routes r;
  for (const auto& [s, t] : per_stream_) r = union_routes(r, to_routes(t, s));
  return r == routes_;
}

}  // namespace ds
