#pragma once

// Shadow dataspace: explicit per-stream membership vectors over a bounded
// universe, with events computed as changes in each stream's syllabus
// {c | c asserted by anyone, ?c asserted by the stream}.

#include <map>

#include "dataspace/patch.hpp"
#include "support/oracle.hpp"

namespace shadow {

using oracle::Bits;

inline std::vector<ds::Value> small_atoms() { return {ds::sym("a"), ds::integer(0), ds::sym("z")}; }

struct Expected {
  Bits added, removed;  // over the base universe
};

class Space {
 public:
  explicit Space(std::vector<ds::Value> base_values) : base_(base_values), full_(with_observe(base_values)) {}
  Space() : Space(oracle::universe_over(small_atoms())) {}

  const oracle::Universe& full() const { return full_; }
  const oracle::Universe& base() const { return base_; }
  std::size_t nb() const { return base_.size(); }

  Bits meaning(const std::vector<ds::Value>& patterns) const { return full_.meaning_of_patterns(patterns); }

  void add(std::uint64_t s) { own_[s] = Bits(full_.size(), false); }

  std::map<std::uint64_t, Expected> update(std::uint64_t s, const Bits& add, const Bits& rem) {
    auto before = syllabi();
    Bits& mine = own_.at(s);
    for (std::size_t i = 0; i < mine.size(); ++i) {
      bool both = add[i] && rem[i];
      bool a = add[i] && !both, r = rem[i] && !both;
      if (a) mine[i] = true;
      if (r) mine[i] = false;
    }
    return diff(before, syllabi(), std::nullopt);
  }

  std::map<std::uint64_t, Expected> remove(std::uint64_t s) {
    auto before = syllabi();
    own_.erase(s);
    return diff(before, syllabi(), s);
  }

  // Streams with ?c for some c the body can denote.
  std::set<std::uint64_t> route(const ds::Value& body) const {
    std::set<std::uint64_t> out;
    for (const auto& [s, bits] : own_) {
      for (std::size_t i = 0; i < nb(); ++i) {
        if (bits[nb() + i] && oracle::matches(body, base_.values[i])) {
          out.insert(s);
          break;
        }
      }
    }
    return out;
  }

  // Checks a delivered patch against an expectation; the observe half of the
  // universe must stay empty because no stream asserts ??-interests.
  bool agrees(const ds::Patch& p, const Expected& e) const {
    Bits a = full_.probe(p.added), r = full_.probe(p.removed);
    for (std::size_t i = 0; i < full_.size(); ++i) {
      bool ea = i < nb() ? e.added[i] : false;
      bool er = i < nb() ? e.removed[i] : false;
      if (a[i] != ea || r[i] != er) return false;
    }
    return true;
  }

  const std::map<std::uint64_t, Bits>& own() const { return own_; }

 private:
  static std::vector<ds::Value> with_observe(const std::vector<ds::Value>& base) {
    std::vector<ds::Value> out = base;
    for (const auto& v : base) out.push_back(ds::observe(v));
    return out;
  }

  std::map<std::uint64_t, Bits> syllabi() const {
    Bits agg(full_.size(), false);
    for (const auto& [s, bits] : own_)
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) agg[i] = true;
    std::map<std::uint64_t, Bits> out;
    for (const auto& [s, bits] : own_) {
      Bits syl(nb(), false);
      for (std::size_t i = 0; i < nb(); ++i) syl[i] = agg[i] && bits[nb() + i];
      out[s] = std::move(syl);
    }
    return out;
  }

  std::map<std::uint64_t, Expected> diff(const std::map<std::uint64_t, Bits>& before,
                                         const std::map<std::uint64_t, Bits>& after,
                                         std::optional<std::uint64_t> gone) const {
    std::map<std::uint64_t, Expected> out;
    for (const auto& [s, nw] : after) {
      const Bits& old = before.at(s);
      Expected e{Bits(nb(), false), Bits(nb(), false)};
      bool any = false;
      for (std::size_t i = 0; i < nb(); ++i) {
        e.added[i] = nw[i] && !old[i];
        e.removed[i] = old[i] && !nw[i];
        any = any || e.added[i] || e.removed[i];
      }
      if (any && s != gone) out[s] = std::move(e);
    }
    return out;
  }

  oracle::Universe base_;
  oracle::Universe full_;
  std::map<std::uint64_t, Bits> own_;
};

}  // namespace shadow
