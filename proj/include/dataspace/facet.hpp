#pragma once

// Facet-structured actors. Programs are written as setup scripts that register
// fields and endpoints; the runtime turns them into an engine Process.
//
// Every form here works against the actor currently running on this thread.
// Registration forms (field excepted) need a facet-setup context; send, spawn
// and stop need a script context. Violations throw ContextViolation.

#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "dataspace/dataflow.hpp"
#include "dataspace/engine.hpp"

namespace ds {

struct ContextViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// A projection whose captures would bind infinitely many tuples.
struct InfiniteMatchSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using FacetId = std::uint64_t;
using Bindings = std::vector<Value>;
using Script = std::function<void()>;
using Handler = std::function<void(const Bindings&)>;

// A pattern, either fixed or computed from fields on each evaluation.
class Pat {
 public:
  Pat(Value v) : fn_([v] { return v; }) {}
  template <typename F>
    requires std::invocable<F&> && std::convertible_to<std::invoke_result_t<F&>, Value>
  Pat(F f) : fn_(std::move(f)) {}
  Value eval() const { return fn_(); }

 private:
  std::function<Value()> fn_;
};

enum class EventKind { Asserted, Retracted, Message };

struct EventPattern {
  EventKind kind;
  Pat pattern;
};

inline EventPattern asserted(Pat p) { return {EventKind::Asserted, std::move(p)}; }
inline EventPattern retracted(Pat p) { return {EventKind::Retracted, std::move(p)}; }
inline EventPattern message(Pat p) { return {EventKind::Message, std::move(p)}; }

// Lower runs first.
enum class Priority : int { QueryRetract = 0, QueryAdd = 1, Normal = 2 };

class Actor;

class Field {
 public:
  Value get() const;  // recorded as a dataflow observation
  void set(Value v) const;
  Value operator()() const { return get(); }
  ObjectId id() const { return id_; }

 private:
  friend class Actor;
  Field(Actor* a, ObjectId id) : actor_(a), id_(id) {}
  Actor* actor_;
  ObjectId id_;
};

Field field(Value init);

// Setup forms.
void assert_(Pat tmpl);
void assert_when(std::function<bool()> guard, Pat tmpl);
void on(EventPattern ev, Handler h, Priority prio = Priority::Normal);
void on_when(std::function<bool()> guard, EventPattern ev, Handler h);
void on_start(Script s);
void on_stop(Script s);
void stop_when(EventPattern ev, Handler k = {});
void during(Pat p, Handler body);
// `name` computes the spawned actor's name from the bindings.
void during_spawn(Pat p, Handler body, std::function<Value(const Bindings&)> name = {});
void dataflow(Script block);

Field query_value(Pat p, Value absent, std::function<Value(const Bindings&)> extract = {});
Field query_set(Pat p, std::function<Value(const Bindings&)> extract = {});
Field query_hash(Pat p, std::function<Value(const Bindings&)> key, std::function<Value(const Bindings&)> val);
Field query_count(Pat p);

// Script forms.
void send(Value body);
void spawn(Spawn s);
void stop_facet(FacetId id, Script k = {});
void stop_current(Script k = {});
void adhoc_assert(Value v);
void adhoc_retract(Value v);

// Allowed in setup and script contexts.
FacetId react(Script setup);
FacetId current_facet();

// The initial assertions are held as ad-hoc assertions until retracted.
Spawn spawn_actor(Script setup, std::optional<Value> name = std::nullopt, AssertionSet initial = {});

// Set and hash values maintained by the query forms.
Value set_value(const std::set<Value>& elems);
std::set<Value> set_elements(const Value& v);
Value hash_value(const std::map<Value, Value>& m);
std::map<Value, Value> hash_entries(const Value& v);

// Bindings of `spec` over the part of `delta` its kind looks at, keeping only
// tuples whose instantiation changed known-ness. Throws InfiniteMatchSet.
std::vector<Bindings> project_event(const AssertionSet& before, const Patch& delta, const Value& spec, EventKind kind);
std::optional<Bindings> match_message(const Value& spec, const Value& body);

}  // namespace ds
