#include "dataspace/facet.hpp"

#include <array>
#include <deque>

namespace ds {

namespace {

enum class Mode { None, Setup, Script };

struct Context {
  Actor* actor = nullptr;
  FacetId facet = 0;  // 0: actor root scope
  Mode mode = Mode::None;
};

thread_local Context tl_ctx;

class ContextScope {
 public:
  explicit ContextScope(Context c) : saved_(tl_ctx) { tl_ctx = c; }
  ~ContextScope() { tl_ctx = saved_; }

 private:
  Context saved_;
};

Context& need(Mode mode, const char* form) {
  if (!tl_ctx.actor) throw ContextViolation(std::string(form) + " used outside an actor");
  if (mode != Mode::None && tl_ctx.mode != mode)
    throw ContextViolation(std::string(form) + (mode == Mode::Setup ? " needs a facet-setup context" : " needs a script context"));
  return tl_ctx;
}

bool known(const Value& spec, const Bindings& j, const AssertionSet& pi) {
  return !intersect(compile_pattern(fill_captures(spec, j)), pi).is_mt();
}

bool match_into(const Value& spec, const Value& v, Bindings& out) {
  if (spec.is_capture()) {
    out.push_back(v);
    return true;
  }
  if (spec.is_wildcard() || v.is_wildcard()) return true;
  if (spec.is_atom()) return spec == v;
  if (!v.is_compound() || spec.label() != v.label() || spec.has_label() != v.has_label() || spec.arity() != v.arity())
    return false;
  for (std::size_t i = 0; i < spec.arity(); ++i)
    if (!match_into(spec[i], v[i], out)) return false;
  return true;
}

Value first_binding(const Bindings& b) { return b.empty() ? Value() : b[0]; }

std::string facet_text(FacetId id, std::optional<FacetId> parent) {
  return record("facet", {integer(static_cast<std::int64_t>(id)),
                          parent ? integer(static_cast<std::int64_t>(*parent)) : boolean(false)})
      .to_text();
}

}  // namespace

std::vector<Bindings> project_event(const AssertionSet& before, const Patch& delta, const Value& spec, EventKind kind) {
  if (kind == EventKind::Message) return {};
  const AssertionSet& part = kind == EventKind::Asserted ? delta.added : delta.removed;
  if (part.is_mt()) return {};
  AssertionSet proj = project(spec, part);
  if (proj.is_mt()) return {};
  std::vector<std::vector<Value>> keys;
  try {
    keys = key_set(proj, spec.capture_count());
  } catch (const InfiniteSet&) {
    throw InfiniteMatchSet("InfiniteMatchSet: projecting " + spec.to_text() + " yields infinitely many bindings");
  }
  AssertionSet after = apply(before, delta);
  std::vector<Bindings> out;
  for (auto& j : keys) {
    bool was = known(spec, j, before), is = known(spec, j, after);
    if (was != is) out.push_back(std::move(j));
  }
  return out;
}

std::optional<Bindings> match_message(const Value& spec, const Value& body) {
  Bindings b;
  if (!match_into(spec, body, b)) return std::nullopt;
  return b;
}

Value set_value(const std::set<Value>& elems) { return record("set", std::vector<Value>(elems.begin(), elems.end())); }

std::set<Value> set_elements(const Value& v) {
  if (!v.is_compound() || v.label() != "set") return {};
  return std::set<Value>(v.fields().begin(), v.fields().end());
}

Value hash_value(const std::map<Value, Value>& m) {
  std::vector<Value> pairs;
  for (const auto& [k, x] : m) pairs.push_back(tuple({k, x}));
  return record("hash", std::move(pairs));
}

std::map<Value, Value> hash_entries(const Value& v) {
  std::map<Value, Value> m;
  if (!v.is_compound() || v.label() != "hash") return m;
  for (const auto& p : v.fields()) m.emplace(p[0], p[1]);
  return m;
}

// ---------------------------------------------------------------------------

class Actor : public Process {
 public:
  explicit Actor(const AssertionSet& initial) : published_(initial) {
    adhoc_ = out_.add_stream();
    if (!initial.is_mt()) out_.update_stream(adhoc_, Patch(initial, {}));
  }

  Transition boot(const Script& setup) {
    ContextScope scope({this, 0, Mode::Script});
    add_facet(std::nullopt, setup);
    return finish_turn();
  }

  Transition step(const Event* e) override {
    if (!e) return Transition::inert();
    ContextScope scope({this, 0, Mode::Script});
    if (const auto* m = std::get_if<Message>(e)) {
      for (FacetId f : tree_order()) dispatch_message(f, m->body);
    } else {
      const Patch& d = std::get<Patch>(*e);
      AssertionSet before = knowledge_;
      knowledge_ = apply(before, d);
      for (FacetId f : tree_order()) dispatch_patch(f, before, d);
    }
    Transition t = finish_turn();
    if (t.kind == Transition::Kind::Continue && t.actions.empty()) return Transition::inert();
    return t;
  }

  // Fields.
  Field new_field(Value init) {
    ObjectId id = next_id_++;
    fields_.emplace(id, std::move(init));
    return Field(this, id);
  }
  Value read(ObjectId id) {
    dataflow_.record_observation(id);
    return fields_.at(id);
  }
  void write(ObjectId id, Value v) {
    fields_.at(id) = std::move(v);
    dataflow_.record_damage(id);
  }

  // Endpoints.
  struct Endpoint {
    std::uint64_t id = 0;
    FacetId facet = 0;
    enum class Type { Assertion, Event, Dataflow } type = Type::Assertion;
    std::optional<Pat> pattern;
    std::function<bool()> guard;
    EventKind kind = EventKind::Asserted;
    std::function<void(const Bindings&, const Value&)> handler;
    Priority prio = Priority::Normal;
    Script block;
    StreamId stream = 0;
    Value spec;
    bool active = false;
    AssertionSet published;
  };

  void add_endpoint(Endpoint ep) {
    ep.id = next_id_++;
    ep.facet = tl_ctx.facet;
    if (ep.type != Endpoint::Type::Dataflow) ep.stream = out_.add_stream();
    auto id = ep.id;
    facets_.at(ep.facet).endpoints.push_back(id);
    endpoints_.emplace(id, std::move(ep));
    dataflow_.with_subject(id, [&] { refresh(id); });
  }

  void add_start(Script s) { facets_.at(tl_ctx.facet).on_start.push_back(std::move(s)); }
  void add_stop(Script s) { facets_.at(tl_ctx.facet).on_stop.push_back(std::move(s)); }

  // Actions.
  void emit(Patch p) {
    if (p.empty()) return;
    if (!actions_.empty())
      if (auto* last = std::get_if<Patch>(&actions_.back())) {
        *last = compose(p, *last);
        if (last->empty()) actions_.pop_back();
        return;
      }
    actions_.push_back(std::move(p));
  }
  void emit_action(Action a) { actions_.push_back(std::move(a)); }

  void adhoc(const Value& v, bool add) {
    Patch req = add ? Patch::assert_(v) : Patch::retract(v);
    emit(out_.update_stream(adhoc_, req).outward_basis);
  }

  // Facets.
  FacetId add_facet(std::optional<FacetId> parent, const Script& setup) {
    FacetId id = next_id_++;
    FacetNode node;
    node.id = id;
    node.parent = parent;
    facets_.emplace(id, std::move(node));
    if (parent)
      facets_.at(*parent).children.push_back(id);
    else
      roots_.push_back(id);
    trace_emit(TraceKind::FacetStarted, facet_text(id, parent));
    {
      ContextScope scope({this, id, Mode::Setup});
      setup();
    }
    FacetNode& f = facets_.at(id);
    for (const auto& s : f.on_start) enqueue(id, Priority::Normal, s);
    if (!knowledge_.is_mt()) {
      Patch catch_up(knowledge_, {});
      dispatch_patch(id, AssertionSet(), catch_up, false);
    }
    enqueue(id, Priority::Normal, [this, id] {
      auto it = facets_.find(id);
      if (it != facets_.end() && !it->second.terminating && it->second.endpoints.empty() && it->second.children.empty())
        stop(id, {});
    });
    return id;
  }

  void stop(FacetId id, Script k) {
    auto it = facets_.find(id);
    if (it == facets_.end()) return;
    if (it->second.terminating) {
      if (k) it->second.continuations.push_back(std::move(k));
      return;
    }
    if (k) it->second.continuations.push_back(std::move(k));
    std::optional<FacetId> parent = it->second.parent;
    mark_terminating(id);
    run_stop_handlers(id);
    if (!facets_.count(id)) return;  // buried by a stop handler stopping an ancestor
    std::vector<Script> conts = std::move(facets_.at(id).continuations);
    bury(id);
    FacetId scope_facet = parent && facets_.count(*parent) && !facets_.at(*parent).terminating ? *parent : 0;
    {
      ContextScope scope({this, scope_facet, Mode::Script});
      for (const auto& c : conts) c();
    }
    // A parent left with nothing to do goes too, unless a continuation refilled it.
    if (parent && facet_live(*parent))
      enqueue(*parent, Priority::Normal, [this, p = *parent] {
        auto it = facets_.find(p);
        if (it != facets_.end() && !it->second.terminating && it->second.endpoints.empty() &&
            it->second.children.empty())
          stop(p, {});
      });
  }

  bool facet_live(FacetId id) const {
    auto it = facets_.find(id);
    return it != facets_.end() && !it->second.terminating;
  }

 private:
  struct FacetNode {
    FacetId id = 0;
    std::optional<FacetId> parent;
    std::vector<std::uint64_t> endpoints;
    std::vector<FacetId> children;
    std::vector<Script> on_start, on_stop, continuations;
    bool terminating = false;
  };

  struct Queued {
    FacetId facet;
    Script script;
  };

  void enqueue(FacetId f, Priority p, Script s) {
    scripts_[static_cast<int>(p)].push_back({f, std::move(s)});
  }

  std::vector<FacetId> tree_order() const {
    std::vector<FacetId> out;
    std::vector<FacetId> stack(roots_.rbegin(), roots_.rend());
    while (!stack.empty()) {
      FacetId f = stack.back();
      stack.pop_back();
      const FacetNode& n = facets_.at(f);
      out.push_back(f);
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  // Re-evaluates an endpoint under its own dataflow subject.
  void refresh(std::uint64_t id) {
    auto it = endpoints_.find(id);
    if (it == endpoints_.end()) return;
    Endpoint& ep = it->second;
    if (ep.type == Endpoint::Type::Dataflow) {
      ContextScope scope({this, ep.facet, Mode::Script});
      ep.block();
      return;
    }
    ep.active = !ep.guard || ep.guard();
    AssertionSet next;
    if (ep.active) {
      ep.spec = ep.pattern->eval();
      if (ep.type == Endpoint::Type::Assertion) {
        if (ep.spec.capture_count()) throw ContextViolation("assertion templates cannot contain captures");
        next = compile_pattern(ep.spec);
      } else {
        next = compile_pattern(observe(strip_captures(ep.spec)));
      }
    }
    if (next == ep.published) return;
    Patch d(subtract(next, ep.published), subtract(ep.published, next));
    ep.published = next;
    emit(out_.update_stream(ep.stream, d).outward_basis);
  }

  void dispatch_patch(FacetId f, const AssertionSet& before, const Patch& d, bool check_live = true) {
    auto fit = facets_.find(f);
    if (fit == facets_.end() || (check_live && fit->second.terminating)) return;
    for (auto eid : fit->second.endpoints) {
      const Endpoint& ep = endpoints_.at(eid);
      if (ep.type != Endpoint::Type::Event || !ep.active || ep.kind == EventKind::Message) continue;
      for (auto& j : project_event(before, d, ep.spec, ep.kind)) {
        auto h = ep.handler;
        Value spec = ep.spec;
        enqueue(f, ep.prio, [h, j = std::move(j), spec] { h(j, spec); });
      }
    }
  }

  void dispatch_message(FacetId f, const Value& body) {
    auto fit = facets_.find(f);
    if (fit == facets_.end() || fit->second.terminating) return;
    for (auto eid : fit->second.endpoints) {
      const Endpoint& ep = endpoints_.at(eid);
      if (ep.type != Endpoint::Type::Event || !ep.active || ep.kind != EventKind::Message) continue;
      if (auto j = match_message(ep.spec, body)) {
        auto h = ep.handler;
        Value spec = ep.spec;
        enqueue(f, ep.prio, [h, j = std::move(*j), spec] { h(j, spec); });
      }
    }
  }

  std::optional<Queued> pop_script() {
    for (auto& q : scripts_) {
      if (q.empty()) continue;
      Queued s = std::move(q.front());
      q.pop_front();
      return s;
    }
    return std::nullopt;
  }

  Transition finish_turn() {
    for (;;) {
      while (auto q = pop_script()) {
        if (!facet_live(q->facet)) continue;
        ContextScope scope({this, q->facet, Mode::Script});
        q->script();
      }
      if (!dataflow_.damaged()) break;
      dataflow_.repair_damage([this](SubjectId s) { refresh(s); },
                              [](SubjectId s) { trace_warn("dataflow cycle through endpoint " + std::to_string(s)); });
    }
    // Coalesced patches are clipped to what the dataspace has actually seen.
    Actions out;
    for (auto& a : actions_) {
      if (auto* p = std::get_if<Patch>(&a)) {
        Patch net = limit(*p, published_);
        if (net.empty()) continue;
        published_ = apply(published_, net);
        out.push_back(std::move(net));
      } else {
        out.push_back(std::move(a));
      }
    }
    actions_.clear();
    if (roots_.empty()) return Transition::exit(std::move(out));
    return Transition::continue_(std::move(out));
  }

  void mark_terminating(FacetId id) {
    FacetNode& n = facets_.at(id);
    n.terminating = true;
    for (FacetId c : n.children) mark_terminating(c);
  }

  void run_stop_handlers(FacetId id) {
    std::vector<Script> handlers = facets_.at(id).on_stop;
    {
      ContextScope scope({this, id, Mode::Script});
      for (const auto& h : handlers) h();
    }
    std::vector<FacetId> children = facets_.at(id).children;
    for (FacetId c : children) run_stop_handlers(c);
  }

  void bury(FacetId id) {
    Patch gone;
    collect_burial(id, gone);
    std::optional<FacetId> parent = facets_.at(id).parent;
    if (parent && facets_.count(*parent))
      std::erase(facets_.at(*parent).children, id);
    else
      std::erase(roots_, id);
    erase_subtree(id);
    emit(gone);
  }

  void collect_burial(FacetId id, Patch& gone) {
    const FacetNode& n = facets_.at(id);
    for (FacetId c : n.children) collect_burial(c, gone);
    for (auto eid : n.endpoints) {
      const Endpoint& ep = endpoints_.at(eid);
      dataflow_.forget_subject(eid);
      if (ep.type != Endpoint::Type::Dataflow) gone = compose(out_.remove_stream(ep.stream).outward_basis, gone);
      endpoints_.erase(eid);
    }
    trace_emit(TraceKind::FacetStopped, facet_text(id, n.parent));
  }

  void erase_subtree(FacetId id) {
    std::vector<FacetId> children = facets_.at(id).children;
    for (FacetId c : children) erase_subtree(c);
    facets_.erase(id);
  }

  std::uint64_t next_id_ = 1;
  std::map<FacetId, FacetNode> facets_;
  std::vector<FacetId> roots_;
  std::map<std::uint64_t, Endpoint> endpoints_;
  std::map<ObjectId, Value> fields_;
  DataflowGraph dataflow_;
  Mux out_;
  StreamId adhoc_ = 0;
  AssertionSet knowledge_;
  AssertionSet published_;
  std::array<std::deque<Queued>, 3> scripts_;
  Actions actions_;
};

// ---------------------------------------------------------------------------
// Forms

Value Field::get() const { return actor_->read(id_); }
void Field::set(Value v) const { actor_->write(id_, std::move(v)); }

Field field(Value init) { return need(Mode::None, "field").actor->new_field(std::move(init)); }

namespace {

using Endpoint = Actor::Endpoint;

void add_event(EventPattern ev, std::function<bool()> guard, std::function<void(const Bindings&, const Value&)> h,
               Priority prio) {
  Endpoint ep;
  ep.type = Endpoint::Type::Event;
  ep.kind = ev.kind;
  ep.pattern = std::move(ev.pattern);
  ep.guard = std::move(guard);
  ep.handler = std::move(h);
  ep.prio = prio;
  tl_ctx.actor->add_endpoint(std::move(ep));
}

std::function<void(const Bindings&, const Value&)> ignore_spec(Handler h) {
  return [h = std::move(h)](const Bindings& j, const Value&) {
    if (h) h(j);
  };
}

}  // namespace

void assert_when(std::function<bool()> guard, Pat tmpl) {
  need(Mode::Setup, "assert");
  Endpoint ep;
  ep.type = Endpoint::Type::Assertion;
  ep.pattern = std::move(tmpl);
  ep.guard = std::move(guard);
  tl_ctx.actor->add_endpoint(std::move(ep));
}

void assert_(Pat tmpl) { assert_when({}, std::move(tmpl)); }

void on(EventPattern ev, Handler h, Priority prio) {
  need(Mode::Setup, "on");
  add_event(std::move(ev), {}, ignore_spec(std::move(h)), prio);
}

void on_when(std::function<bool()> guard, EventPattern ev, Handler h) {
  need(Mode::Setup, "on");
  add_event(std::move(ev), std::move(guard), ignore_spec(std::move(h)), Priority::Normal);
}

void on_start(Script s) { need(Mode::Setup, "on_start").actor->add_start(std::move(s)); }
void on_stop(Script s) { need(Mode::Setup, "on_stop").actor->add_stop(std::move(s)); }

void stop_when(EventPattern ev, Handler k) {
  need(Mode::Setup, "stop_when");
  FacetId self = tl_ctx.facet;
  add_event(std::move(ev), {},
            [self, k = std::move(k)](const Bindings& j, const Value&) {
              Script cont;
              if (k) cont = [k, j] { k(j); };
              stop_facet(self, cont);
            },
            Priority::Normal);
}

void during(Pat p, Handler body) {
  need(Mode::Setup, "during");
  add_event(asserted(std::move(p)), {},
            [body = std::move(body)](const Bindings& j, const Value& spec) {
              Value inst = fill_captures(spec, j);
              react([inst, body, j] {
                stop_when(retracted(inst));
                if (body) body(j);
              });
            },
            Priority::Normal);
}

void during_spawn(Pat p, Handler body, std::function<Value(const Bindings&)> name) {
  need(Mode::Setup, "during_spawn");
  add_event(asserted(std::move(p)), {},
            [body = std::move(body), name](const Bindings& j, const Value& spec) {
              Value instantiated = fill_captures(spec, j);
              Value inst = record("instance", {gensym("inst"), instantiated});
              react([inst, instantiated] {
                assert_(observe(inst));
                stop_when(retracted(instantiated));
                stop_when(retracted(inst));
              });
              spawn(spawn_actor(
                  [inst, body, j] {
                    stop_when(retracted(observe(inst)));
                    if (body) body(j);
                  },
                  name ? std::optional<Value>(name(j)) : std::nullopt, compile_set({inst, observe(observe(inst))})));
            },
            Priority::Normal);
}

void dataflow(Script block) {
  need(Mode::Setup, "dataflow");
  Endpoint ep;
  ep.type = Endpoint::Type::Dataflow;
  ep.block = std::move(block);
  tl_ctx.actor->add_endpoint(std::move(ep));
}

Field query_value(Pat p, Value absent, std::function<Value(const Bindings&)> extract) {
  need(Mode::Setup, "query_value");
  if (!extract) extract = first_binding;
  Field f = field(absent);
  add_event(retracted(p), {}, [f, absent](const Bindings&, const Value&) { f.set(absent); }, Priority::QueryRetract);
  add_event(asserted(p), {}, [f, extract](const Bindings& j, const Value&) { f.set(extract(j)); }, Priority::QueryAdd);
  return f;
}

Field query_set(Pat p, std::function<Value(const Bindings&)> extract) {
  need(Mode::Setup, "query_set");
  if (!extract) extract = first_binding;
  Field f = field(set_value({}));
  add_event(retracted(p), {},
            [f, extract](const Bindings& j, const Value&) {
              auto s = set_elements(f.get());
              s.erase(extract(j));
              f.set(set_value(s));
            },
            Priority::QueryRetract);
  add_event(asserted(p), {},
            [f, extract](const Bindings& j, const Value&) {
              auto s = set_elements(f.get());
              s.insert(extract(j));
              f.set(set_value(s));
            },
            Priority::QueryAdd);
  return f;
}

Field query_hash(Pat p, std::function<Value(const Bindings&)> key, std::function<Value(const Bindings&)> val) {
  need(Mode::Setup, "query_hash");
  Field f = field(hash_value({}));
  add_event(retracted(p), {},
            [f, key](const Bindings& j, const Value&) {
              auto m = hash_entries(f.get());
              m.erase(key(j));
              f.set(hash_value(m));
            },
            Priority::QueryRetract);
  add_event(asserted(p), {},
            [f, key, val](const Bindings& j, const Value&) {
              auto m = hash_entries(f.get());
              m.insert_or_assign(key(j), val(j));
              f.set(hash_value(m));
            },
            Priority::QueryAdd);
  return f;
}

Field query_count(Pat p) {
  need(Mode::Setup, "query_count");
  Field f = field(integer(0));
  add_event(retracted(p), {}, [f](const Bindings&, const Value&) { f.set(integer(f.get().as_int() - 1)); },
            Priority::QueryRetract);
  add_event(asserted(p), {}, [f](const Bindings&, const Value&) { f.set(integer(f.get().as_int() + 1)); },
            Priority::QueryAdd);
  return f;
}

void send(Value body) { need(Mode::Script, "send").actor->emit_action(Message{std::move(body)}); }

void spawn(Spawn s) { need(Mode::Script, "spawn").actor->emit_action(std::move(s)); }

void stop_facet(FacetId id, Script k) { need(Mode::Script, "stop_facet").actor->stop(id, std::move(k)); }

void stop_current(Script k) {
  auto& c = need(Mode::Script, "stop_current");
  c.actor->stop(c.facet, std::move(k));
}

void adhoc_assert(Value v) { need(Mode::Script, "adhoc_assert").actor->adhoc(v, true); }
void adhoc_retract(Value v) { need(Mode::Script, "adhoc_retract").actor->adhoc(v, false); }

FacetId react(Script setup) {
  auto& c = need(Mode::None, "react");
  std::optional<FacetId> parent;
  if (c.facet) parent = c.facet;
  return c.actor->add_facet(parent, setup);
}

FacetId current_facet() { return need(Mode::None, "current_facet").facet; }

Spawn spawn_actor(Script setup, std::optional<Value> name, AssertionSet initial) {
  return Spawn{[setup, initial]() -> BootResult {
                 auto actor = std::make_unique<Actor>(initial);
                 Transition t = actor->boot(setup);
                 if (t.kind == Transition::Kind::Exit) return BootResult::exit(std::move(t.actions));
                 return BootResult::init(std::move(t.actions), std::move(actor));
               },
               std::move(initial), std::move(name)};
}

}  // namespace ds
