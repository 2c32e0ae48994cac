#include "dataspace/examples.hpp"

#include <istream>
#include <map>

namespace ds {

void Printer::operator()(const std::string& text) {
  lines_.push_back({clock_ ? clock_->now_ms() : 0, text});
  if (live_) live_(text);
}

std::vector<std::string> Printer::texts() const {
  std::vector<std::string> out;
  for (const auto& l : lines_) out.push_back(l.text);
  return out;
}

std::vector<std::string> RunResult::texts() const {
  std::vector<std::string> out;
  for (const auto& l : transcript) out.push_back(l.text);
  return out;
}

namespace {

// Strings print bare, everything else as value text.
std::string show(const Value& v) { return v.kind() == Kind::String ? v.as_string() : v.to_text(); }

Value rec(const char* label, std::vector<Value> fields = {}) { return record(label, std::move(fields)); }

void add_drivers(Actions& as, Clock& clock) {
  as.push_back(spawn_timer_driver(clock));
  as.push_back(spawn_timestate_driver());
}

}  // namespace

// Box and client.

Actions box_program(Printer& print, int rounds) {
  Printer* out = &print;
  Actions as;
  as.push_back(spawn_actor(
      [out] {
        Field current = field(integer(0));
        assert_([current] { return rec("box-state", {current()}); });
        on(message(rec("set-box", {capture()})), [out, current](const Bindings& j) {
          (*out)("box: taking on new-value " + show(j[0]));
          current.set(j[0]);
        });
      },
      sym("box")));
  as.push_back(spawn_actor(
      [out, rounds] {
        on(asserted(rec("box-state", {capture()})), [out, rounds](const Bindings& j) {
          (*out)("client: learned that box's value is now " + show(j[0]));
          if (j[0].as_int() < rounds) send(rec("set-box", {integer(j[0].as_int() + 1)}));
        });
      },
      sym("client")));
  return as;
}

// The same two actors written against whole assertion sets. Initial
// assertions go out as the first action so the trace matches the facet version.
Actions monolithic_box_program(Printer& print, int rounds) {
  Printer* out = &print;
  auto boot_with = [](MonolithicBehavior b, AssertionSet initial, const char* name) {
    return Spawn{[b, initial] {
                   return BootResult::init({Patch(initial, {})}, wrap_monolithic(b, initial));
                 },
                 {},
                 sym(name)};
  };
  auto box_set = [](std::int64_t v) {
    return compile_set({rec("box-state", {integer(v)}), observe(rec("set-box", {wild()}))});
  };

  auto value = std::make_shared<std::int64_t>(0);
  MonolithicBehavior box = [out, value, box_set](const MonoEvent& e) {
    MonoTransition t;
    const auto* m = std::get_if<Message>(&e);
    if (!m || !m->body.is_compound() || m->body.label() != "set-box") return t;
    (*out)("box: taking on new-value " + show(m->body[0]));
    *value = m->body[0].as_int();
    t.kind = Transition::Kind::Continue;
    t.actions.push_back(box_set(*value));
    return t;
  };

  AssertionSet client_set = compile_set({observe(rec("box-state", {wild()}))});
  auto seen = std::make_shared<AssertionSet>();
  MonolithicBehavior client = [out, rounds, seen, client_set](const MonoEvent& e) {
    MonoTransition t;
    const auto* now = std::get_if<AssertionSet>(&e);
    if (!now) return t;
    AssertionSet fresh = subtract(project(rec("box-state", {capture()}), *now), *seen);
    *seen = project(rec("box-state", {capture()}), *now);
    for (const auto& k : key_set(fresh, 1)) {
      (*out)("client: learned that box's value is now " + show(k[0]));
      if (k[0].as_int() < rounds) t.actions.push_back(Message{rec("set-box", {integer(k[0].as_int() + 1)})});
    }
    if (!t.actions.empty()) t.kind = Transition::Kind::Continue;
    return t;
  };

  Actions as;
  as.push_back(boot_with(box, box_set(0), "box"));
  as.push_back(boot_with(client, client_set, "client"));
  return as;
}

// Flip-flop.

Actions flip_flop_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Clock* c = &clock;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor([out] { on(message(rec("stdout-message", {capture()})), [out](const Bindings& j) { (*out)(show(j[0])); }); },
                           sym("printer")));

  struct States {
    static void active() {
      react([] {
        assert_(rec("active"));
        stop_when(message(rec("toggle")), [](const Bindings&) { inactive(); });
      });
    }
    static void inactive() {
      react([] { stop_when(message(rec("toggle")), [](const Bindings&) { active(); }); });
    }
  };
  as.push_back(spawn_actor([] { States::inactive(); }, sym("flip-flop")));

  as.push_back(spawn_actor(
      [] {
        on(asserted(rec("active")), [](const Bindings&) { send(rec("stdout-message", {str("Flip-flop is active")})); });
        on(retracted(rec("active")), [](const Bindings&) { send(rec("stdout-message", {str("Flip-flop is inactive")})); });
      },
      sym("monitor-flip-flop")));
  as.push_back(spawn_actor(
      [c] {
        Field next = field(integer(c->now_ms()));
        on(asserted([next] { return later_than(next()); }), [next](const Bindings&) {
          send(rec("toggle"));
          next.set(integer(next().as_int() + 1000));
        });
      },
      sym("periodic-toggle")));
  return as;
}

// Room presence: two users arrive in one patch, then leave one at a time.

Actions rooms_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [out] {
        Field rooms = field(set_value({}));
        Value pattern = tuple({wild(), sym("in"), capture()});
        on(asserted(pattern), [out, rooms](const Bindings& j) {
          auto s = set_elements(rooms());
          s.insert(j[0]);
          rooms.set(set_value(s));
          (*out)("room appeared: " + show(j[0]));
        });
        on(retracted(pattern), [out, rooms](const Bindings& j) {
          auto s = set_elements(rooms());
          s.erase(j[0]);
          rooms.set(set_value(s));
          (*out)("room disappeared: " + show(j[0]));
        });
      },
      sym("track")));

  auto in = [](const char* who) { return tuple({sym(who), sym("in"), sym("Lobby")}); };
  as.push_back(spawn_actor(
      [out, in] {
        on_start([out, in] {
          (*out)("Alice and Bob join Lobby");
          adhoc_assert(in("Alice"));
          adhoc_assert(in("Bob"));
        });
        react([out, in] {
          stop_when_timeout(1000, [out, in] {
            (*out)("Alice leaves Lobby");
            adhoc_retract(in("Alice"));
          });
        });
        react([out, in] {
          stop_when_timeout(2000, [out, in] {
            (*out)("Bob leaves Lobby");
            adhoc_retract(in("Bob"));
          });
        });
      },
      sym("users")));
  return as;
}

// Demand matcher: one worker per distinct hello, gone when the last hello is.

Actions demand_matcher_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [out] {
        on(asserted(rec("hello", {capture()})), [out](const Bindings& j) {
          Value x = j[0];
          // Interest in hello(x) is part of the worker's initial assertions so
          // a retraction racing the spawn is still seen.
          spawn(spawn_actor(
              [out, x] {
                stop_when(retracted(rec("hello", {x})));
                on_start([out, x] { (*out)("worker for " + show(x) + " started"); });
                on_stop([out, x] { (*out)("worker for " + show(x) + " stopped"); });
              },
              tuple({sym("worker"), x}), compile_set({observe(rec("hello", {x}))})));
        });
      },
      sym("demand-matcher")));

  struct Client {
    const char* name;
    const char* who;
    std::int64_t leave_ms;
  };
  for (Client cl : {Client{"client-1", "A", 1000}, Client{"client-2", "A", 2000}, Client{"client-3", "B", 3000}}) {
    as.push_back(spawn_actor(
        [out, cl] {
          assert_(rec("hello", {sym(cl.who)}));
          stop_when_timeout(cl.leave_ms, [out, cl] { (*out)(std::string(cl.name) + " withdraws hello " + cl.who); });
        },
        sym(cl.name)));
  }
  return as;
}

// Square server with a well-behaved client and, later, a wildcard client.

Actions square_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [] {
        during(observe(rec("square", {capture(), wild()})), [](const Bindings& j) {
          std::int64_t x = j[0].as_int();
          assert_(rec("square", {integer(x), integer(x * x)}));
        });
      },
      sym("square-server")));
  as.push_back(spawn_actor(
      [out] {
        on(asserted(rec("square", {integer(3), capture()})),
           [out](const Bindings& j) { (*out)("client: 3 squared is " + show(j[0])); });
        on(retracted(rec("square", {integer(3), capture()})),
           [out](const Bindings& j) { (*out)("client: lost the answer " + show(j[0])); });
      },
      sym("square-client")));
  as.push_back(spawn_actor(
      [out] {
        Value server_interest = observe(observe(rec("square", {wild(), wild()})));
        on(asserted(server_interest), [out](const Bindings&) { (*out)("monitor: square server is up"); });
        on(retracted(server_interest), [out](const Bindings&) { (*out)("monitor: square server is gone"); });
      },
      sym("monitor")));
  as.push_back(spawn_actor(
      [out] {
        stop_when_timeout(1000, [out] {
          (*out)("launching the wildcard client");
          spawn(spawn_actor(
              [out] {
                on(asserted(rec("square", {wild(), capture()})),
                   [out](const Bindings& j) { (*out)("wildcard client: saw " + show(j[0])); });
              },
              sym("wildcard-client")));
        });
      },
      sym("launcher")));
  return as;
}

// Supervised spawning (sequence-diagram demo).

Actions add1_program(Printer& print) {
  Printer* out = &print;
  Actions as;
  as.push_back(spawn_actor(
      [] {
        during_spawn(
            observe(rec("one-plus", {capture(), wild()})),
            [](const Bindings& j) { assert_(rec("one-plus", {j[0], integer(j[0].as_int() + 1)})); },
            [](const Bindings& j) { return tuple({sym("solving"), sym("one-plus"), j[0]}); });
      },
      sym("add1-server")));
  as.push_back(spawn_actor(
      [out] {
        stop_when(asserted(rec("one-plus", {integer(3), capture()})),
                  [out](const Bindings& j) { (*out)("1 + 3 = " + show(j[0])); });
      },
      sym("client-process")));
  return as;
}

// Forward-chaining ancestor relation.

Actions ancestor_program(Printer& print) {
  Printer* out = &print;
  Actions as;
  for (auto [who, of] : {std::pair{"john", "douglas"}, {"bob", "john"}, {"ebbon", "bob"}})
    as.push_back(spawn_actor([w = std::string(who), o = std::string(of)] { assert_(rec("parent", {sym(w), sym(o)})); },
                             tuple({sym("parent"), sym(who), sym(of)})));
  as.push_back(spawn_actor(
      [] {
        during(rec("parent", {capture(), capture()}), [](const Bindings& j) {
          Value a = j[0], c = j[1];
          assert_(rec("ancestor", {a, c}));
          during(rec("ancestor", {c, capture()}), [a](const Bindings& k) { assert_(rec("ancestor", {a, k[0]})); });
        });
      },
      sym("ancestor-rule")));
  as.push_back(spawn_actor(
      [out] {
        on(asserted(rec("ancestor", {capture(), capture()})),
           [out](const Bindings& j) { (*out)("ancestor(" + show(j[0]) + ", " + show(j[1]) + ")"); });
      },
      sym("reporter")));
  return as;
}

// Backward-chaining syllogism.

Actions syllogism_program(Printer& print) {
  Printer* out = &print;
  Actions as;
  as.push_back(spawn_actor([] { assert_(rec("human", {sym("turing")})); }, sym("human-turing")));
  as.push_back(spawn_actor(
      [] {
        during(observe(rec("fallible", {capture()})), [](const Bindings& j) {
          Value who = j[0];
          during(rec("human", {who}), [who](const Bindings&) { assert_(rec("fallible", {who})); });
        });
      },
      sym("mortality-rule")));
  as.push_back(spawn_actor(
      [out] {
        during(rec("fallible", {sym("turing")}), [out](const Bindings&) {
          on_start([out] { (*out)("Turing: fallible"); });
          on_stop([out] { (*out)("Turing: infallible"); });
        });
      },
      sym("inquirer")));
  return as;
}

// Mutable cells: factory, monitor, and a writer that waits for each update
// to be visible before reading again.

Actions cell_program(Printer& print) {
  Printer* out = &print;
  Actions as;
  as.push_back(spawn_actor(
      [] {
        on(message(rec("create-cell", {capture(), capture()})), [](const Bindings& j) {
          Value id = j[0], initial = j[1];
          spawn(spawn_actor(
              [id, initial] {
                Field value = field(initial);
                assert_([id, value] { return rec("cell", {id, value()}); });
                on(message(rec("update-cell", {id, capture()})), [value](const Bindings& k) { value.set(k[0]); });
                stop_when(message(rec("delete-cell", {id})));
              },
              tuple({sym("cell"), id})));
        });
      },
      sym("cell-factory")));

  auto monitor = [out](Value id) {
    return spawn_actor(
        [out, id] {
          on(asserted(rec("cell", {id, capture()})),
             [out, id](const Bindings& j) { (*out)("Cell " + show(id) + " updated to: " + show(j[0])); });
          on(retracted(rec("cell", {id, wild()})), [out, id](const Bindings&) { (*out)("Cell " + show(id) + " deleted"); });
        },
        tuple({sym("cell-monitor"), id}));
  };

  as.push_back(spawn_actor(
      [monitor] {
        on_start([monitor] {
          Value id = gensym("cell");
          send(rec("create-cell", {id, integer(123)}));
          spawn(monitor(id));
          // Each step waits for the value it expects, then bumps it.
          auto step = std::make_shared<std::function<void(std::int64_t, int)>>();
          *step = [id, step](std::int64_t expect, int left) {
            react([id, step, expect, left] {
              stop_when(asserted(rec("cell", {id, integer(expect)})), [id, step, expect, left](const Bindings&) {
                if (left == 0) {
                  send(rec("delete-cell", {id}));
                  *step = nullptr;
                  return;
                }
                send(rec("update-cell", {id, integer(expect + 1)}));
                (*step)(expect + 1, left - 1);
              });
            });
          };
          (*step)(123, 3);
        });
      },
      sym("main-actor")));
  return as;
}

// Timer demos.

Actions later_than_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Clock* c = &clock;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [out, c] {
        on_start([out] { (*out)("Starting demo-later-than"); });
        on_stop([out] { (*out)("Stopping demo-later-than"); });
        Field deadline = field(integer(c->now_ms() + 5000));
        stop_when(asserted([deadline] { return later_than(deadline()); }),
                  [out](const Bindings&) { (*out)("Deadline expired"); });
      },
      sym("demo-later-than")));
  return as;
}

Actions ticks_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Clock* c = &clock;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [out, c] {
        Field deadline = field(integer(c->now_ms()));
        Field counter = field(integer(0));
        on_when([counter] { return counter().as_int() < 10; }, asserted([deadline] { return later_than(deadline()); }),
                [out, deadline, counter](const Bindings&) {
                  (*out)("Tick " + show(counter()));
                  counter.set(integer(counter().as_int() + 1));
                  deadline.set(integer(deadline().as_int() + 1000));
                });
      },
      sym("demo-updating-later-than")));
  return as;
}

Actions timeout_program(Printer& print, Clock& clock) {
  Printer* out = &print;
  Actions as;
  add_drivers(as, clock);
  as.push_back(spawn_actor(
      [out] {
        on_start([out] { (*out)("Starting demo-timeout"); });
        on_stop([out] { (*out)("Stopping demo-timeout"); });
        stop_when_timeout(3000, [out] { (*out)("Three second timeout fired"); });
      },
      sym("demo-timeout")));
  return as;
}

// Line-driven chat. Input lines arrive from outside as stdin-line messages:
// "/join NAME", "/leave NAME", or "NAME: TEXT".

Actions chat_program(Printer& print) {
  Printer* out = &print;
  Actions as;
  as.push_back(spawn_actor(
      [out] {
        during(rec("present", {capture()}), [out](const Bindings& j) {
          Value who = j[0];
          on_start([out, who] { (*out)(show(who) + " arrived"); });
          on_stop([out, who] { (*out)(show(who) + " left"); });
        });
        on(message(rec("say", {capture(), capture()})),
           [out](const Bindings& j) { (*out)(show(j[0]) + ": " + show(j[1])); });
      },
      sym("room")));
  as.push_back(spawn_actor(
      [out] {
        on(message(inbound(rec("stdin-line", {capture()}))), [out](const Bindings& j) {
          const std::string line = j[0].as_string();
          if (line.starts_with("/join ")) {
            adhoc_assert(rec("present", {str(line.substr(6))}));
          } else if (line.starts_with("/leave ")) {
            adhoc_retract(rec("present", {str(line.substr(7))}));
          } else if (auto colon = line.find(": "); colon != std::string::npos) {
            send(rec("say", {str(line.substr(0, colon)), str(line.substr(colon + 2))}));
          } else if (!line.empty()) {
            (*out)("? " + line);
          }
        });
        stop_when(message(inbound(rec("stdin-eof"))));
      },
      sym("console")));
  return as;
}

// ---------------------------------------------------------------------------

// Cross-layer greetings. `inner` receives the nested dataspace when given.

namespace {

Actions cross_layer_actions(Printer& print, std::shared_ptr<Dataspace*> inner) {
  Printer* out = &print;
  auto greeting = [](Value t) { return rec("greeting", {std::move(t)}); };
  Actions nested;
  nested.push_back(spawn_actor([greeting] { assert_(outbound(greeting(str("Hi from inner!")))); }, str("D")));
  nested.push_back(spawn_actor(
      [out, greeting] {
        on(asserted(inbound(greeting(capture()))), [out](const Bindings& j) { (*out)("Inner dataspace: " + show(j[0])); });
      },
      str("E")));

  Actions as;
  as.push_back(spawn_actor([greeting] { assert_(greeting(str("Hi from outer space!"))); }, str("A")));
  as.push_back(spawn_actor(
      [out, greeting] {
        on(asserted(greeting(capture())), [out](const Bindings& j) { (*out)("Outer dataspace: " + show(j[0])); });
      },
      str("B")));
  as.push_back(Spawn{[inner, nested] {
                       auto d = std::make_unique<Dataspace>(nested);
                       if (inner) *inner = d.get();
                       return BootResult::init({}, relay_wrap(std::move(d)));
                     },
                     {},
                     str("C")});
  return as;
}

}  // namespace

Actions cross_layer_program(Printer& print) { return cross_layer_actions(print, nullptr); }

LayerSets run_cross_layer() {
  Printer print(nullptr);
  auto inner = std::make_shared<Dataspace*>(nullptr);
  TraceSink quiet;
  TraceScope scope({&quiet, {}, std::nullopt});
  reset_gensym();
  Dataspace ground(cross_layer_actions(print, inner));
  for (int i = 0; i < 10000; ++i)
    if (ground.step(nullptr).kind == Transition::Kind::Inert) break;

  LayerSets r;
  r.outer = ground.mux().aggregate();
  AssertionSet relay_own = compile_set({observe(outbound(wild())), observe(observe(inbound(wild())))});
  if (*inner) r.inner = subtract((*inner)->mux().aggregate(), relay_own);
  r.transcript = print.texts();
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Entry {
  ExampleInfo info;
  std::function<Actions(Printer&, Clock&, const RunOptions&)> build;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"box", "box and client exchanging an incrementing value", 0},
       [](Printer& p, Clock&, const RunOptions& o) { return box_program(p, o.rounds); }},
      {{"box-monolithic", "the box and client written as whole-set behaviors", 0},
       [](Printer& p, Clock&, const RunOptions& o) { return monolithic_box_program(p, o.rounds); }},
      {{"flip-flop", "flip-flop toggled every second, with a monitor", 3500},
       [](Printer& p, Clock& c, const RunOptions&) { return flip_flop_program(p, c); }},
      {{"rooms", "room list derived from user presence", 5000},
       [](Printer& p, Clock& c, const RunOptions&) { return rooms_program(p, c); }},
      {{"demand-matcher", "one worker per distinct hello", 5000},
       [](Printer& p, Clock& c, const RunOptions&) { return demand_matcher_program(p, c); }},
      {{"square", "square server crashed by a wildcard client", 5000},
       [](Printer& p, Clock& c, const RunOptions&) { return square_program(p, c); }},
      {{"add1", "supervised spawning of one-plus solvers", 0},
       [](Printer& p, Clock&, const RunOptions&) { return add1_program(p); }},
      {{"ancestor", "forward-chaining ancestor relation", 0},
       [](Printer& p, Clock&, const RunOptions&) { return ancestor_program(p); }},
      {{"syllogism", "backward-chaining proof that Turing is fallible", 0},
       [](Printer& p, Clock&, const RunOptions&) { return syllogism_program(p); }},
      {{"cell", "mutable cell service with a monitor and a writer", 0},
       [](Printer& p, Clock&, const RunOptions&) { return cell_program(p); }},
      {{"cross-layer", "greetings relayed between a nested and the ground dataspace", 0},
       [](Printer& p, Clock&, const RunOptions&) { return cross_layer_program(p); }},
      {{"later-than", "facet stopped by a later-than deadline", 10000},
       [](Printer& p, Clock& c, const RunOptions&) { return later_than_program(p, c); }},
      {{"ticks", "ten ticks from a moving deadline", 15000},
       [](Printer& p, Clock& c, const RunOptions&) { return ticks_program(p, c); }},
      {{"timeout", "facet stopped by stop_when_timeout", 10000},
       [](Printer& p, Clock& c, const RunOptions&) { return timeout_program(p, c); }},
      {{"chat", "line-driven chat room reading from standard input", 0},
       [](Printer& p, Clock&, const RunOptions&) { return chat_program(p); }},
  };
  return entries;
}

// Feeds input lines as stdin-line messages, then one stdin-eof.
class LineInjector : public Injector {
 public:
  explicit LineInjector(std::istream* in) : in_(in) {}
  std::optional<Event> next() override {
    if (done_) return std::nullopt;
    std::string line;
    if (in_ && std::getline(*in_, line)) return Message{rec("stdin-line", {str(line)})};
    done_ = true;
    return Message{rec("stdin-eof")};
  }

 private:
  std::istream* in_;
  bool done_ = false;
};

}  // namespace

const std::vector<ExampleInfo>& example_list() {
  static const std::vector<ExampleInfo> infos = [] {
    std::vector<ExampleInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

RunResult run_example(const std::string& name, const RunOptions& opts) {
  const Entry* entry = nullptr;
  for (const auto& e : registry())
    if (e.info.name == name) entry = &e;
  if (!entry) throw UnknownExample("unknown example: " + name);

  std::int64_t budget = opts.virtual_ms.value_or(entry->info.default_ms);
  TraceSink quiet;
  TraceSink* sink = opts.trace ? opts.trace : &quiet;
  GroundOptions g{sink, opts.max_steps};
  RunResult r;

  auto finish = [&](const Printer& p, const GroundResult& gr, const Clock& c) {
    r.transcript = p.lines();
    r.warnings = sink->warnings();
    r.completed = gr.completed;
    r.end_ms = c.now_ms();
  };

  if (opts.real_time) {
    QueueInjector q;
    GroundResult gr;
    std::optional<RealClock> clock;
    clock.emplace(q, budget > 0 ? budget : 60000, 200);
    Printer p(&*clock, opts.live);
    gr = ground_run(entry->build(p, *clock, opts), q, g);
    finish(p, gr, *clock);
    return r;
  }

  VirtualClock clock(budget);
  Printer p(&clock, opts.live);
  Actions boot = entry->build(p, clock, opts);
  GroundResult gr;
  if (name == "chat") {
    LineInjector lines(opts.input);
    gr = ground_run(std::move(boot), lines, g);
  } else {
    gr = ground_run(std::move(boot), clock, g);
  }
  finish(p, gr, clock);
  return r;
}

}  // namespace ds
