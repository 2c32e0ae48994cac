#include "dataspace/engine.hpp"

#include <algorithm>
#include <atomic>

namespace ds {

namespace {

std::atomic<std::uint64_t> gensym_counter{0};

std::string name_text(const std::optional<Value>& n) { return n ? n->to_text() : "#f"; }

}  // namespace

std::string action_text(const Action& a) {
  if (const auto* m = std::get_if<Message>(&a)) return "<" + m->body.to_text() + ">";
  if (const auto* p = std::get_if<Patch>(&a)) return p->to_text();
  const auto& s = std::get<Spawn>(a);
  return "spawn " + name_text(s.name) + " " + set_text(s.initial);
}

Value gensym(const std::string& prefix) { return sym(prefix + std::to_string(++gensym_counter)); }

void reset_gensym() { gensym_counter = 0; }

// ---------------------------------------------------------------------------
// Dataspace

Dataspace::Dataspace(Actions boot) : path_(trace_context().path), sink_(trace_context().sink) {
  StreamId outside = mux_.add_stream();
  (void)outside;
  for (auto& a : boot) pending_.push_back({kOutside, std::move(a), std::nullopt, false});
}

void Dataspace::inject(Action a) { pending_.push_back({kOutside, std::move(a), std::nullopt, false}); }

TracePath Dataspace::path_of(StreamId id) const {
  TracePath p = path_;
  if (id != kOutside) p.push_back(id);
  return p;
}

void Dataspace::mark_runnable(StreamId id) {
  Entry& en = actors_.at(id);
  if (en.queued) return;
  en.queued = true;
  runnable_.push_back(id);
}

Transition Dataspace::step(const Event* e) {
  bool busy = false;
  std::optional<std::uint64_t> cause = trace_context().cause;
  if (e) {
    busy = true;
    if (const auto* m = std::get_if<Message>(e))
      pending_.push_back({kOutside, *m, cause, false});
    else
      pending_.push_back({kOutside, std::get<Patch>(*e), cause, false});
  }

  Actions outward;
  std::deque<Pending> round;
  round.swap(pending_);
  while (!round.empty()) {
    busy = true;
    Pending p = std::move(round.front());
    round.pop_front();
    interpret(std::move(p), round, outward);
  }

  std::vector<StreamId> polls;
  polls.swap(runnable_);
  for (StreamId id : polls) {
    auto it = actors_.find(id);
    if (it == actors_.end() || !it->second.alive) continue;
    it->second.queued = false;
    invoke(id, nullptr, std::nullopt);
  }
  // Nothing left to do until the next event: report inertness even if state moved.
  if (!busy || (outward.empty() && pending_.empty() && runnable_.empty())) return Transition::inert();
  return Transition::continue_(std::move(outward));
}

void Dataspace::interpret(Pending p, std::deque<Pending>& round, Actions& outward) {
  if (p.author != kOutside && !mux_.has_stream(p.author)) return;
  TracePath author_path = sink_ ? path_of(p.author) : TracePath{};

  if (p.quit) {
    std::optional<std::uint64_t> seq;
    if (sink_) seq = sink_->emit(author_path, TraceKind::ActionInterpreted, "quit", p.produced);
    MuxUpdate u = mux_.remove_stream(p.author);
    actors_.erase(p.author);
    std::erase(runnable_, p.author);
    deliver_all(u, seq, outward);
    return;
  }

  std::optional<std::uint64_t> seq;
  if (std::holds_alternative<Spawn>(p.action)) {
    interpret_spawn(p, round);
    return;
  }
  if (sink_) seq = sink_->emit(author_path, TraceKind::ActionInterpreted, action_text(p.action), p.produced);

  if (auto* patch = std::get_if<Patch>(&p.action)) {
    deliver_all(mux_.update_stream(p.author, *patch), seq, outward);
    return;
  }
  if (auto* m = std::get_if<Message>(&p.action)) {
    for (StreamId target : mux_.route_message(m->body)) deliver(target, *m, seq, outward);
    return;
  }
}

// The actor-spawned record comes first so a lane opens before anything refers to it.
void Dataspace::interpret_spawn(Pending& p, std::deque<Pending>& round) {
  auto& spawn = std::get<Spawn>(p.action);
  StreamId id = mux_.add_stream();
  actors_[id] = Entry{nullptr, spawn.name, true};
  std::optional<std::uint64_t> spawned;
  if (sink_) {
    spawned = sink_->emit(path_of(id), TraceKind::ActorSpawned, name_text(spawn.name), p.produced);
    spawned = sink_->emit(path_of(p.author), TraceKind::ActionInterpreted, action_text(p.action), spawned);
  }
  Pending initial{id, Patch(spawn.initial, {}), spawned, false};

  BootResult boot;
  std::string error;
  {
    TraceScope scope({sink_, sink_ ? path_of(id) : TracePath{}, spawned});
    try {
      boot = spawn.boot();
    } catch (const std::exception& ex) {
      error = ex.what();
    } catch (...) {
      error = "unknown failure";
    }
  }
  if (!error.empty()) {
    if (sink_) {
      sink_->warn(path_of(id), "boot failed: " + error);
      sink_->emit(path_of(id), TraceKind::ActorExited, Value(str(error)).to_text(), spawned);
    }
    actors_[id].alive = false;
    round.push_front({id, Patch(), spawned, true});
    round.push_front(std::move(initial));
    return;
  }
  round.push_front(std::move(initial));
  Transition t;
  if (boot.process) {
    actors_[id].process = std::move(boot.process);
    t = Transition::continue_(std::move(boot.actions));
  } else {
    t = Transition::exit(std::move(boot.actions));
  }
  absorb(id, std::move(t), spawned);
  if (actors_.count(id) && actors_[id].alive) mark_runnable(id);
}

void Dataspace::deliver_all(const MuxUpdate& u, std::optional<std::uint64_t> cause, Actions& outward) {
  for (const auto& [target, patch] : u.events) deliver(target, patch, cause, outward);
}

void Dataspace::deliver(StreamId target, const Event& e, std::optional<std::uint64_t> cause, Actions& outward) {
  if (target == kOutside) {
    if (const auto* m = std::get_if<Message>(&e))
      outward.push_back(*m);
    else
      outward.push_back(std::get<Patch>(e));
    return;
  }
  auto it = actors_.find(target);
  if (it == actors_.end() || !it->second.alive) return;
  std::optional<std::uint64_t> seq;
  if (sink_) seq = sink_->emit(path_of(target), TraceKind::EventDelivered, event_text(e), cause);
  invoke(target, &e, seq);
}

void Dataspace::invoke(StreamId id, const Event* e, std::optional<std::uint64_t> cause) {
  Transition t;
  {
    TraceScope scope({sink_, sink_ ? path_of(id) : TracePath{}, cause});
    try {
      t = actors_.at(id).process->step(e);
    } catch (const std::exception& ex) {
      t = Transition::exit();
      t.error = ex.what();
    } catch (...) {
      t = Transition::exit();
      t.error = "unknown failure";
    }
  }
  absorb(id, std::move(t), cause);
}

void Dataspace::absorb(StreamId id, Transition t, std::optional<std::uint64_t> cause) {
  TracePath p = sink_ ? path_of(id) : TracePath{};
  auto queue = [&](Actions& as) {
    for (auto& a : as) {
      std::optional<std::uint64_t> produced;
      if (sink_) produced = sink_->emit(p, TraceKind::ActionProduced, action_text(a), cause);
      pending_.push_back({id, std::move(a), produced, false});
    }
  };
  switch (t.kind) {
    case Transition::Kind::Inert:
      return;
    case Transition::Kind::Continue:
      queue(t.actions);
      mark_runnable(id);
      return;
    case Transition::Kind::Exit: {
      queue(t.actions);
      Entry& en = actors_.at(id);
      en.alive = false;
      std::unique_ptr<Process> dead = std::move(en.process);
      std::erase(runnable_, id);
      std::optional<std::uint64_t> exited;
      if (sink_) {
        if (!t.error.empty()) sink_->warn(p, "actor failed: " + t.error);
        exited = sink_->emit(p, TraceKind::ActorExited, t.error.empty() ? "#f" : Value(str(t.error)).to_text(), cause);
      }
      pending_.push_back({id, Patch(), exited, true});
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Relay

namespace {

class Relay : public Process {
 public:
  explicit Relay(std::unique_ptr<Dataspace> inner) : inner_(std::move(inner)) {
    inner_->inject(Patch(compile_set({observe(outbound(wild())), observe(observe(inbound(wild())))}), {}));
  }

  Transition step(const Event* e) override {
    Transition t;
    if (e) {
      Event lifted = lift_inbound(*e);
      t = inner_->step(&lifted);
    } else {
      t = inner_->step(nullptr);
    }
    Actions out;
    for (auto& a : t.actions) {
      if (const auto* p = std::get_if<Patch>(&a)) {
        Patch d = drop_outbound(*p, {});
        if (!d.empty()) out.push_back(std::move(d));
      } else if (const auto* m = std::get_if<Message>(&a)) {
        if (auto body = drop_outbound(*m)) out.push_back(Message{*body});
      }
    }
    t.actions = std::move(out);
    return t;
  }

 private:
  std::unique_ptr<Dataspace> inner_;
};

}  // namespace

std::unique_ptr<Process> relay_wrap(std::unique_ptr<Dataspace> inner) {
  return std::make_unique<Relay>(std::move(inner));
}

Spawn spawn_dataspace(Actions boot, std::optional<Value> name) {
  auto shared = std::make_shared<Actions>(std::move(boot));
  return Spawn{[shared] { return BootResult::init({}, relay_wrap(std::make_unique<Dataspace>(*shared))); }, {},
               std::move(name)};
}

// ---------------------------------------------------------------------------
// Injectors and the ground loop

void QueueInjector::push(Event e) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    q_.push_back(std::move(e));
  }
  cv_.notify_one();
}

void QueueInjector::close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::optional<Event> QueueInjector::next() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !q_.empty(); });
  if (q_.empty()) return std::nullopt;
  Event e = std::move(q_.front());
  q_.pop_front();
  return e;
}

GroundResult ground_run(Actions boot, Injector& injector, const GroundOptions& opts) {
  reset_gensym();
  TraceScope scope({opts.trace, {}, std::nullopt});
  auto root = relay_wrap(std::make_unique<Dataspace>(std::move(boot)));
  GroundResult r;
  auto budget_left = [&] { return !opts.max_steps || r.steps < *opts.max_steps; };
  for (;;) {
    for (;;) {
      if (!budget_left()) return r;
      ++r.steps;
      if (root->step(nullptr).kind == Transition::Kind::Inert) break;
    }
    std::optional<Event> e = injector.next();
    if (!e) break;
    if (!budget_left()) return r;
    ++r.steps;
    root->step(&*e);
  }
  if (opts.trace) opts.trace->flush();
  r.completed = true;
  return r;
}

// ---------------------------------------------------------------------------
// Monolithic adapter

namespace {

class Monolithic : public Process {
 public:
  Monolithic(MonolithicBehavior b, AssertionSet out) : b_(std::move(b)), out_(std::move(out)) {}

  Transition step(const Event* e) override {
    if (!e) return Transition::inert();
    MonoTransition mt;
    if (const auto* m = std::get_if<Message>(e)) {
      mt = b_(*m);
    } else {
      in_ = apply(in_, std::get<Patch>(*e));
      mt = b_(in_);
    }
    Transition t;
    t.kind = mt.kind;
    for (auto& a : mt.actions) {
      if (auto* m = std::get_if<Message>(&a)) {
        t.actions.push_back(std::move(*m));
      } else if (auto* s = std::get_if<Spawn>(&a)) {
        t.actions.push_back(std::move(*s));
      } else {
        const auto& whole = std::get<AssertionSet>(a);
        Patch d(subtract(whole, out_), subtract(out_, whole));
        out_ = whole;
        if (!d.empty()) t.actions.push_back(std::move(d));
      }
    }
    if (t.kind == Transition::Kind::Continue && t.actions.empty()) t.kind = Transition::Kind::Inert;
    return t;
  }

 private:
  MonolithicBehavior b_;
  AssertionSet in_;
  AssertionSet out_;
};

}  // namespace

std::unique_ptr<Process> wrap_monolithic(MonolithicBehavior b, AssertionSet initial_out) {
  return std::make_unique<Monolithic>(std::move(b), std::move(initial_out));
}

Spawn spawn_monolithic(MonolithicBehavior b, AssertionSet initial, std::optional<Value> name) {
  return Spawn{[b, initial] { return BootResult::init({}, wrap_monolithic(b, initial)); }, initial, std::move(name)};
}

}  // namespace ds
