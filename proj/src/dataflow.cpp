#include "dataspace/dataflow.hpp"

#include <algorithm>
#include <cassert>

namespace ds {

void DataflowGraph::record_observation(ObjectId o) {
  if (!current_) return;
  forward_[o].insert(*current_);
  reverse_[*current_].insert(o);
}

void DataflowGraph::record_damage(ObjectId o) { damaged_.insert(o); }

void DataflowGraph::forget_subject(SubjectId s) {
  auto it = reverse_.find(s);
  if (it == reverse_.end()) return;
  for (ObjectId o : it->second) {
    auto f = forward_.find(o);
    if (f == forward_.end()) continue;
    f->second.erase(s);
    if (f->second.empty()) forward_.erase(f);
  }
  reverse_.erase(it);
}

void DataflowGraph::repair_damage(const std::function<void(SubjectId)>& repair,
                                  const std::function<void(SubjectId)>& on_cycle) {
  std::set<SubjectId> repaired, warned;
  while (!damaged_.empty()) {
    std::set<ObjectId> work;
    work.swap(damaged_);
    std::set<SubjectId> subjects;
    for (ObjectId o : work) {
      auto it = forward_.find(o);
      if (it != forward_.end()) subjects.insert(it->second.begin(), it->second.end());
    }
    for (SubjectId s : subjects) {
      if (repaired.count(s)) {
        if (warned.insert(s).second && on_cycle) on_cycle(s);
        continue;
      }
      repaired.insert(s);
      forget_subject(s);
      with_subject(s, [&] { repair(s); });
    }
  }
  assert(consistent());
}

std::set<SubjectId> DataflowGraph::subjects_of(ObjectId o) const {
  auto it = forward_.find(o);
  return it == forward_.end() ? std::set<SubjectId>{} : it->second;
}

std::set<ObjectId> DataflowGraph::objects_of(SubjectId s) const {
  auto it = reverse_.find(s);
  return it == reverse_.end() ? std::set<ObjectId>{} : it->second;
}

bool DataflowGraph::consistent() const {
  std::size_t edges = 0;
  for (const auto& [o, ss] : forward_) {
    if (ss.empty()) return false;
    for (SubjectId s : ss) {
      auto it = reverse_.find(s);
      if (it == reverse_.end() || !it->second.count(o)) return false;
      ++edges;
    }
  }
  for (const auto& [s, os] : reverse_) {
    if (os.empty()) return false;
    edges -= std::min(edges, os.size());
  }
  return edges == 0;
}

}  // namespace ds
