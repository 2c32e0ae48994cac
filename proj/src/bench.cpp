#include "dataspace/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dataspace/facet.hpp"

namespace ds {

namespace {

using Clock = std::chrono::steady_clock;

Value ping(Value from, Value to) { return record("ping", {std::move(from), std::move(to)}); }

template <typename F>
double time_ns(F f) {
  auto t0 = Clock::now();
  f();
  return std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
}

struct Sample {
  std::size_t units;
  double ns;
};

void settle(Dataspace& d) {
  while (d.step(nullptr).kind != Transition::Kind::Inert) {
  }
}

// A raw actor that only reacts to events.
Spawn reactor(AssertionSet initial, std::function<Transition(const Event&)> f) {
  return Spawn{[f] {
                 return BootResult::init({}, std::make_unique<FunctionProcess>([f](const Event* e) {
                   return e ? f(*e) : Transition::inert();
                 }));
               },
               std::move(initial), std::nullopt};
}

Actions echo_peers(std::size_t k) {
  Actions as;
  for (std::size_t i = 0; i < k; ++i) {
    auto me = static_cast<std::int64_t>(i);
    as.push_back(reactor(compile_set({observe(ping(wild(), integer(me)))}), [me](const Event& e) {
      const auto& body = std::get<Message>(e).body;
      return Transition::continue_({Message{ping(integer(me), body[0])}});
    }));
  }
  return as;
}

// The extra process exchanges `rounds` pings with peer 0; one unit per delivery.
Sample unicast_once(std::size_t k, std::size_t rounds) {
  Dataspace d(echo_peers(k));
  settle(d);
  auto me = static_cast<std::int64_t>(k);
  auto left = std::make_shared<std::size_t>(rounds);
  d.inject(Spawn{[me, left] {
                   return BootResult::init({Message{ping(integer(me), integer(0))}}, std::make_unique<FunctionProcess>([me, left](const Event* e) {
                     if (!e) return Transition::inert();
                     if (--*left == 0) return Transition::inert();
                     return Transition::continue_({Message{ping(integer(me), integer(0))}});
                   }));
                 },
                 compile_set({observe(ping(wild(), integer(me)))}), std::nullopt});
  double ns = time_ns([&] { settle(d); });
  return {rounds * 2, ns};
}

// Each ping goes to all k peers; peer 0 answers so the next one can go out.
Sample broadcast_once(std::size_t k, std::size_t rounds) {
  Actions as;
  Value bcast = record("bcast", {wild()});
  for (std::size_t i = 0; i < k; ++i) {
    bool answers = i == 0;
    as.push_back(reactor(compile_set({observe(bcast)}), [answers](const Event&) {
      if (!answers) return Transition::inert();
      return Transition::continue_({Message{record("pong", {})}});
    }));
  }
  Dataspace d(std::move(as));
  settle(d);
  auto left = std::make_shared<std::size_t>(rounds);
  d.inject(Spawn{[left] {
                   auto send = [] { return Message{record("bcast", {integer(0)})}; };
                   return BootResult::init({send()}, std::make_unique<FunctionProcess>([left, send](const Event* e) {
                     if (!e) return Transition::inert();
                     if (--*left == 0) return Transition::inert();
                     return Transition::continue_({send()});
                   }));
                 },
                 compile_set({observe(record("pong", {}))}), std::nullopt});
  double ns = time_ns([&] { settle(d); });
  return {rounds * (k + 1), ns};
}

Sample scn_flat_once(std::size_t k) {
  auto delivered = std::make_shared<std::size_t>(0);
  Actions as;
  as.push_back(Spawn{[] { return BootResult::init({}, std::make_unique<FunctionProcess>([](const Event*) {
                         return Transition::inert();
                       })); },
                     compile_set({sym("A")}), std::nullopt});
  for (std::size_t i = 0; i < k; ++i)
    as.push_back(reactor(compile_set({observe(sym("A"))}), [delivered](const Event&) {
      ++*delivered;
      return Transition::inert();
    }));
  std::optional<Dataspace> d;
  double ns = time_ns([&] {
    d.emplace(std::move(as));
    settle(*d);
  });
  if (*delivered != k) throw std::logic_error("scn-flat delivered an unexpected number of notifications");
  return {k, ns};
}

Actions presence_peers(std::size_t k, std::shared_ptr<std::vector<std::vector<std::size_t>>> log) {
  Actions as;
  for (std::size_t i = 0; i < k; ++i) {
    auto me = static_cast<std::int64_t>(i);
    as.push_back(reactor(compile_set({record("presence", {integer(me)}), observe(record("presence", {wild()}))}),
                         [log, i](const Event& e) {
                           if (log) {
                             const auto& p = std::get<Patch>(e);
                             (*log)[i].push_back(key_set(project(record("presence", {capture()}), p.added), 1).size());
                           }
                           return Transition::inert();
                         }));
  }
  return as;
}

Sample scn_presence_once(std::size_t k) {
  Actions as = presence_peers(k, nullptr);
  std::optional<Dataspace> d;
  double ns = time_ns([&] {
    d.emplace(std::move(as));
    settle(*d);
  });
  return {k * (k + 1) / 2, ns};
}

// Connections arrive in batches; the server spawns one actor per connection.
// The timed batch is the second half of the k connections.
struct ConnRig {
  std::unique_ptr<Dataspace> d;
  std::int64_t next = 0;
};

ConnRig conn_rig() {
  ConnRig r;
  Actions as;
  as.push_back(spawn_actor([] {
    on(asserted(record("conn", {capture()})), [](const Bindings& j) {
      Value id = j[0];
      spawn(spawn_actor(
          [id] {
            assert_(record("ready", {id}));
            stop_when(retracted(record("conn", {id})));
          },
          std::nullopt, compile_set({observe(record("conn", {id}))})));
    });
  }));
  r.d = std::make_unique<Dataspace>(std::move(as));
  settle(*r.d);
  return r;
}

void add_conns(ConnRig& r, std::size_t n) {
  AssertionSet batch;
  for (std::size_t i = 0; i < n; ++i) batch = union_(batch, compile_pattern(record("conn", {integer(r.next++)})));
  r.d->inject(Spawn{[] { return BootResult::init({}, std::make_unique<FunctionProcess>([](const Event*) {
                      return Transition::inert();
                    })); },
                    batch, std::nullopt});
  settle(*r.d);
}

}  // namespace

const std::vector<std::string>& bench_names() {
  static const std::vector<std::string> names = {"unicast", "broadcast", "scn-flat", "scn-presence", "conn-scale"};
  return names;
}

bool is_bench(const std::string& name) {
  const auto& ns = bench_names();
  return std::find(ns.begin(), ns.end(), name) != ns.end();
}

BenchPoint run_bench(const std::string& name, std::size_t k, std::size_t repeat, double min_seconds) {
  if (!is_bench(name)) throw std::invalid_argument("unknown benchmark: " + name);
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  TraceScope quiet({nullptr, {}, std::nullopt});

  std::function<Sample()> once;
  if (name == "unicast") {
    once = [k] { return unicast_once(k, 2000); };
  } else if (name == "broadcast") {
    once = [k] { return broadcast_once(k, std::max<std::size_t>(20, 20000 / k)); };
  } else if (name == "scn-flat") {
    once = [k] { return scn_flat_once(k); };
  } else if (name == "scn-presence") {
    once = [k] { return scn_presence_once(k); };
  }

  BenchPoint pt;
  pt.k = k;
  if (name == "conn-scale") {
    // Ramp to k/2 by doubling, then time the batch that brings the total to k.
    std::size_t reps = repeat ? repeat : 3;
    double total = 0;
    std::size_t units = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      ConnRig rig = conn_rig();
      std::size_t have = 0, step = 1;
      while (have < k / 2) {
        std::size_t n = std::min(step, k / 2 - have);
        add_conns(rig, n);
        have += n;
        step *= 2;
      }
      std::size_t last = k - have;
      total += time_ns([&] { add_conns(rig, last); });
      units = last;
    }
    pt.units = units;
    pt.repeats = reps;
    pt.ns_per_unit = total / static_cast<double>(units * reps);
    return pt;
  }

  // Warm up once, then repeat until the budget is spent.
  pt.units = once().units;
  double total = 0;
  std::size_t reps = 0;
  auto budget_ns = min_seconds * 1e9;
  while (repeat ? reps < repeat : (total < budget_ns || reps < 3)) {
    total += once().ns;
    ++reps;
  }
  pt.repeats = reps;
  pt.ns_per_unit = total / static_cast<double>(pt.units * reps);
  return pt;
}

void fit_inverse(const std::vector<BenchPoint>& pts, double& a, double& b) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    double x = 1.0 / static_cast<double>(p.k), y = p.ns_per_unit;
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double den = n * sxx - sx * sx;
  b = den == 0 ? 0 : (n * sxy - sx * sy) / den;
  a = (sy - b * sx) / n;
}

BenchReport bench_shape(const std::string& name, const std::vector<std::size_t>& ks, std::size_t repeat,
                        double min_seconds) {
  BenchReport r;
  r.name = name;
  for (auto k : ks) r.points.push_back(run_bench(name, k, repeat, min_seconds));
  if (r.points.empty()) return r;
  std::ostringstream v;
  if (name == "broadcast") {
    r.shape = "a+b/k";
    fit_inverse(r.points, r.a, r.b);
    // Each measurement may sit above the one before it by noise alone.
    bool decreasing = true;
    for (std::size_t i = 1; i < r.points.size(); ++i)
      if (r.points[i].ns_per_unit > r.points[i - 1].ns_per_unit * 1.15) decreasing = false;
    r.pass = r.a > 0 && r.b >= 0 && decreasing;
    v << "fit a=" << r.a << " ns, b=" << r.b << " ns; " << (decreasing ? "non-increasing" : "not decreasing")
      << " in k";
  } else {
    r.shape = "flat";
    auto [lo, hi] = std::minmax_element(r.points.begin(), r.points.end(),
                                        [](const auto& x, const auto& y) { return x.ns_per_unit < y.ns_per_unit; });
    double ratio = hi->ns_per_unit / lo->ns_per_unit;
    r.pass = ratio <= 2.0;
    v << "max/min ratio " << ratio << (r.pass ? " <= 2" : " > 2");
  }
  r.verdict = v.str();
  return r;
}

std::vector<std::vector<std::size_t>> presence_log(std::size_t k) {
  auto log = std::make_shared<std::vector<std::vector<std::size_t>>>(k);
  TraceScope quiet({nullptr, {}, std::nullopt});
  Dataspace d(presence_peers(k, log));
  settle(d);
  return *log;
}

std::string format_report(const BenchReport& r) {
  std::ostringstream o;
  o << "benchmark " << r.name << " (expected shape " << r.shape << ")\n";
  char line[128];
  std::snprintf(line, sizeof line, "%8s %16s %10s %8s\n", "k", "ns/unit", "units", "repeats");
  o << line;
  for (const auto& p : r.points) {
    std::snprintf(line, sizeof line, "%8zu %16.1f %10zu %8zu\n", p.k, p.ns_per_unit, p.units, p.repeats);
    o << line;
  }
  o << "verdict: " << (r.pass ? "PASS" : "FAIL") << " (" << r.verdict << ")\n";
  return o.str();
}

}  // namespace ds
