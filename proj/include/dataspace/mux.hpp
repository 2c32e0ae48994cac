#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dataspace/patch.hpp"

namespace ds {

using StreamId = std::uint64_t;

struct UnknownStream : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct MuxUpdate {
  Patch applied;
  // Ascending by stream id; empty patches are omitted.
  std::vector<std::pair<StreamId, Patch>> events;
  // Net change to the aggregate, for relaying outward.
  Patch outward_basis;
};

class Mux {
 public:
  StreamId add_stream();
  MuxUpdate update_stream(StreamId s, const Patch& requested);
  MuxUpdate remove_stream(StreamId s);
  IdSet route_message(const Value& body) const;

  bool has_stream(StreamId s) const { return per_stream_.count(s) > 0; }
  const AssertionSet& assertions_of(StreamId s) const;
  const Routes& routes() const { return routes_; }
  AssertionSet aggregate() const { return to_set(routes_); }
  std::vector<StreamId> streams() const;
  std::size_t stream_count() const { return per_stream_.size(); }

  // routes equals the union of the relabelled per-stream sets.
  bool consistent() const;

 private:
  StreamId next_ = 0;
  Routes routes_;
  std::map<StreamId, AssertionSet> per_stream_;
};

IdSet leaves_of(const Routes& r);

}  // namespace ds
