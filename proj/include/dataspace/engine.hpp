#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dataspace/mux.hpp"
#include "dataspace/trace.hpp"

namespace ds {

class Process;
struct BootResult;
using Boot = std::function<BootResult()>;

struct Spawn {
  Boot boot;
  AssertionSet initial;
  std::optional<Value> name;
};

using Action = std::variant<Message, Patch, Spawn>;
using Actions = std::vector<Action>;

std::string action_text(const Action& a);

struct Transition {
  enum class Kind { Continue, Exit, Inert };
  Kind kind = Kind::Inert;
  Actions actions;
  std::string error;  // set when an Exit came from a failure

  static Transition continue_(Actions as = {}) { return {Kind::Continue, std::move(as), {}}; }
  static Transition exit(Actions as = {}) { return {Kind::Exit, std::move(as), {}}; }
  static Transition inert() { return {}; }
};

// An event-transducing actor. step(nullptr) is a poll.
class Process {
 public:
  virtual ~Process() = default;
  virtual Transition step(const Event* e) = 0;
};

struct BootResult {
  Actions actions;
  std::unique_ptr<Process> process;  // null means the actor exits at once

  static BootResult init(Actions as, std::unique_ptr<Process> p) { return {std::move(as), std::move(p)}; }
  static BootResult exit(Actions as = {}) { return {std::move(as), nullptr}; }
};

class FunctionProcess : public Process {
 public:
  using Fn = std::function<Transition(const Event*)>;
  explicit FunctionProcess(Fn f) : f_(std::move(f)) {}
  Transition step(const Event* e) override { return f_(e); }

 private:
  Fn f_;
};

// Fresh symbols; the counter restarts with each ground_run so traces repeat.
Value gensym(const std::string& prefix);
void reset_gensym();

class Dataspace : public Process {
 public:
  // Stream 0 stands for the containing layer; its events are the outward actions.
  static constexpr StreamId kOutside = 0;

  explicit Dataspace(Actions boot);
  Transition step(const Event* e) override;

  // Queues an action from outside, after anything already pending.
  void inject(Action a);
  const Mux& mux() const { return mux_; }
  std::size_t actor_count() const { return actors_.size(); }
  bool quiescent() const { return pending_.empty(); }
  const TracePath& path() const { return path_; }

 private:
  struct Entry {
    std::unique_ptr<Process> process;
    std::optional<Value> name;
    bool alive = true;
    bool queued = false;  // in runnable_
  };
  struct Pending {
    StreamId author;
    Action action;
    std::optional<std::uint64_t> produced;
    bool quit = false;
  };

  TracePath path_of(StreamId id) const;
  void interpret(Pending p, std::deque<Pending>& round, Actions& outward);
  void interpret_spawn(Pending& p, std::deque<Pending>& round);
  void deliver_all(const MuxUpdate& u, std::optional<std::uint64_t> cause, Actions& outward);
  void deliver(StreamId target, const Event& e, std::optional<std::uint64_t> cause, Actions& outward);
  void invoke(StreamId id, const Event* e, std::optional<std::uint64_t> cause);
  void absorb(StreamId id, Transition t, std::optional<std::uint64_t> cause);
  void mark_runnable(StreamId id);

  TracePath path_;
  TraceSink* sink_ = nullptr;
  Mux mux_;
  std::unordered_map<StreamId, Entry> actors_;
  std::deque<Pending> pending_;
  std::vector<StreamId> runnable_;
};

// Lifts incoming events to ↑, drops outgoing ↓ and ?↑ back to the outer layer,
// and subscribes the inner dataspace to both at startup.
std::unique_ptr<Process> relay_wrap(std::unique_ptr<Dataspace> inner);
Spawn spawn_dataspace(Actions boot, std::optional<Value> name = std::nullopt);

class Injector {
 public:
  virtual ~Injector() = default;
  // Blocks until an event is available; nullopt once closed and drained.
  virtual std::optional<Event> next() = 0;
};

class ClosedInjector : public Injector {
 public:
  std::optional<Event> next() override { return std::nullopt; }
};

// Thread-safe FIFO: any thread pushes, the engine thread consumes.
class QueueInjector : public Injector {
 public:
  void push(Event e);
  void close();
  std::optional<Event> next() override;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> q_;
  bool closed_ = false;
};

struct GroundOptions {
  TraceSink* trace = nullptr;
  std::optional<std::uint64_t> max_steps;
};

struct GroundResult {
  bool completed = false;  // inert with the injector closed
  std::uint64_t steps = 0;
};

GroundResult ground_run(Actions boot, Injector& injector, const GroundOptions& opts = {});

// Whole-set view of an actor: events and outputs carry complete assertion sets.
using MonoEvent = std::variant<Message, AssertionSet>;
using MonoAction = std::variant<Message, AssertionSet, Spawn>;
struct MonoTransition {
  Transition::Kind kind = Transition::Kind::Inert;
  std::vector<MonoAction> actions;
};
using MonolithicBehavior = std::function<MonoTransition(const MonoEvent&)>;

std::unique_ptr<Process> wrap_monolithic(MonolithicBehavior b, AssertionSet initial_out = {});
Spawn spawn_monolithic(MonolithicBehavior b, AssertionSet initial, std::optional<Value> name = std::nullopt);

}  // namespace ds
