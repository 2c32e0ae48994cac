#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>

namespace ds {

using ObjectId = std::uint64_t;   // a field
using SubjectId = std::uint64_t;  // an endpoint recomputation

// Bipartite dependency graph between fields and the endpoints that read them.
class DataflowGraph {
 public:
  // Runs f with `s` as the current subject; observations inside are recorded against it.
  template <typename F>
  decltype(auto) with_subject(SubjectId s, F&& f) {
    struct Restore {
      DataflowGraph* g;
      std::optional<SubjectId> prev;
      ~Restore() { g->current_ = prev; }
    } restore{this, current_};
    current_ = s;
    return std::forward<F>(f)();
  }

  // Without a current subject this is a no-op.
  void record_observation(ObjectId o);
  void record_damage(ObjectId o);
  void forget_subject(SubjectId s);

  // Repairs every subject depending on a damaged object, each at most once per
  // call and in ascending id order. A subject damaged again after its repair is
  // skipped and reported through on_cycle once.
  void repair_damage(const std::function<void(SubjectId)>& repair,
                     const std::function<void(SubjectId)>& on_cycle = {});

  std::optional<SubjectId> current_subject() const { return current_; }
  bool damaged() const { return !damaged_.empty(); }
  std::set<SubjectId> subjects_of(ObjectId o) const;
  std::set<ObjectId> objects_of(SubjectId s) const;
  // Forward and reverse maps are exact inverses with no empty entries.
  bool consistent() const;

 private:
  std::map<ObjectId, std::set<SubjectId>> forward_;
  std::map<SubjectId, std::set<ObjectId>> reverse_;
  std::set<ObjectId> damaged_;
  std::optional<SubjectId> current_;
};

}  // namespace ds
