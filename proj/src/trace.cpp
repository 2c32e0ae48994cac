#include "dataspace/trace.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include "dataspace/values.hpp"

namespace ds {

namespace {

constexpr std::pair<TraceKind, std::string_view> kKinds[] = {
    {TraceKind::ActionProduced, "action-produced"}, {TraceKind::ActionInterpreted, "action-interpreted"},
    {TraceKind::EventDelivered, "event-delivered"}, {TraceKind::ActorSpawned, "actor-spawned"},
    {TraceKind::ActorExited, "actor-exited"},       {TraceKind::FacetStarted, "facet-started"},
    {TraceKind::FacetStopped, "facet-stopped"},
};

thread_local TraceContext tl_context;

}  // namespace

std::string_view kind_name(TraceKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

std::optional<TraceKind> kind_from_name(std::string_view s) {
  for (const auto& [kind, name] : kKinds)
    if (name == s) return kind;
  return std::nullopt;
}

std::string TraceRecord::to_line() const {
  std::vector<Value> p;
  for (auto id : path) p.push_back(integer(static_cast<std::int64_t>(id)));
  Value v = record("rec", {integer(static_cast<std::int64_t>(seq)), tuple(std::move(p)),
                           sym(std::string(kind_name(kind))), str(payload),
                           cause ? integer(static_cast<std::int64_t>(*cause)) : boolean(false)});
  return v.to_text();
}

TraceRecord parse_record(std::string_view line) {
  Value v;
  try {
    v = parse_value(line);
  } catch (const TextError& e) {
    throw MalformedTrace(std::string("unreadable record: ") + e.what());
  }
  auto bad = [&](const char* why) { return MalformedTrace(std::string(why) + ": " + std::string(line)); };
  if (!v.is_compound() || v.label() != "rec" || v.arity() != 5) throw bad("not a #rec of five fields");
  TraceRecord r;
  if (v[0].kind() != Kind::Integer || v[0].as_int() < 1) throw bad("bad seq");
  r.seq = static_cast<std::uint64_t>(v[0].as_int());
  if (!v[1].is_compound() || v[1].has_label()) throw bad("bad path");
  for (const auto& x : v[1].fields()) {
    if (x.kind() != Kind::Integer || x.as_int() < 0) throw bad("bad path element");
    r.path.push_back(static_cast<std::uint64_t>(x.as_int()));
  }
  if (v[2].kind() != Kind::Symbol) throw bad("bad kind");
  auto k = kind_from_name(v[2].as_string());
  if (!k) throw bad("unknown kind");
  r.kind = *k;
  if (v[3].kind() != Kind::String) throw bad("bad payload");
  r.payload = v[3].as_string();
  if (v[4].kind() == Kind::Integer) {
    if (v[4].as_int() < 1 || static_cast<std::uint64_t>(v[4].as_int()) >= r.seq) throw bad("cause must precede seq");
    r.cause = static_cast<std::uint64_t>(v[4].as_int());
  } else if (!(v[4].kind() == Kind::Boolean && !v[4].as_bool())) {
    throw bad("bad cause");
  }
  return r;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (first) {
      first = false;
      if (line != kTraceHeader) throw MalformedTrace("missing header line");
      continue;
    }
    if (line.empty() || line.front() == ';') continue;
    TraceRecord r = parse_record(line);
    if (!out.empty() && r.seq <= out.back().seq) throw MalformedTrace("seq not increasing");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedTrace("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (text.empty()) return {};
  return parse_trace(text);
}

std::string path_text(const TracePath& p) {
  std::string s = "/";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += '/';
    s += std::to_string(p[i]);
  }
  return s;
}

TraceSink TraceSink::to_file(const std::string& path) {
  TraceSink s;
  s.out_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
  if (!*s.out_) {
    std::cerr << "warning: cannot open trace file " << path << "; tracing disabled\n";
    s.out_.reset();
    return s;
  }
  *s.out_ << kTraceHeader << '\n';
  s.enabled_ = true;
  return s;
}

TraceSink TraceSink::in_memory() {
  TraceSink s;
  s.enabled_ = true;
  s.keep_ = true;
  return s;
}

std::optional<std::uint64_t> TraceSink::emit(const TracePath& path, TraceKind kind, std::string payload,
                                             std::optional<std::uint64_t> cause) {
  if (!enabled_) return std::nullopt;
  TraceRecord r{next_seq_++, path, kind, std::move(payload), cause};
  if (out_) {
    *out_ << r.to_line() << '\n';
    if (!*out_) {
      std::cerr << "warning: trace write failed; tracing disabled\n";
      out_.reset();
      if (!keep_) enabled_ = false;
    }
  }
  if (keep_) records_.push_back(std::move(r));
  return next_seq_ - 1;
}

void TraceSink::warn(const TracePath& path, const std::string& text) {
  std::string line = path_text(path) + " " + text;
  warnings_.push_back(line);
  if (out_) *out_ << "; warning " << line << '\n';
}

void TraceSink::flush() {
  if (out_) out_->flush();
}

const TraceContext& trace_context() { return tl_context; }

TraceScope::TraceScope(TraceContext ctx) : saved_(std::move(tl_context)) { tl_context = std::move(ctx); }

TraceScope::~TraceScope() { tl_context = std::move(saved_); }

std::optional<std::uint64_t> trace_emit(TraceKind kind, std::string payload) {
  if (!tl_context.sink) return std::nullopt;
  return tl_context.sink->emit(tl_context.path, kind, std::move(payload), tl_context.cause);
}

void trace_warn(const std::string& text) {
  if (tl_context.sink) tl_context.sink->warn(tl_context.path, text);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr std::size_t kLaneWidth = 12;

char mark_for(TraceKind k) {
  switch (k) {
    case TraceKind::ActionProduced: return '>';
    case TraceKind::ActionInterpreted: return '=';
    case TraceKind::EventDelivered: return '<';
    case TraceKind::ActorSpawned: return '*';
    case TraceKind::ActorExited: return 'X';
    case TraceKind::FacetStarted: return '+';
    case TraceKind::FacetStopped: return '-';
  }
  return '?';
}

std::string lane_name(const TraceRecord& spawn) {
  if (spawn.payload.empty() || spawn.payload == "#f") return "actor" + path_text(spawn.path);
  try {
    Value v = parse_value(spawn.payload);
    if (v.kind() == Kind::String || v.kind() == Kind::Symbol) return v.as_string();
  } catch (const TextError&) {
  }
  return spawn.payload;
}

std::string fit(std::string s, std::size_t w) {
  if (s.size() > w) s = s.substr(0, w - 1) + "~";
  s.resize(w, ' ');
  return s;
}

}  // namespace

std::string render_sequence_diagram(const std::vector<TraceRecord>& records) {
  // Records on the root path belong to the dataspace itself and go in the
  // gutter; every other path is an actor lane.
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);
  struct Lane {
    std::string name;
    bool active = false;
  };
  std::map<TracePath, std::size_t> index;
  std::vector<Lane> lanes;
  std::vector<TracePath> lane_paths;
  auto lane_of = [&](const TraceRecord& r) {
    if (r.path.empty()) return kRoot;
    auto it = index.find(r.path);
    if (it != index.end()) return it->second;
    std::size_t i = lanes.size();
    index.emplace(r.path, i);
    lanes.push_back({"actor" + path_text(r.path), false});
    lane_paths.push_back(r.path);
    return i;
  };
  std::map<std::uint64_t, std::size_t> lane_of_seq;
  for (const auto& r : records) {
    std::size_t i = lane_of(r);
    if (i != kRoot && r.kind == TraceKind::ActorSpawned) lanes[i].name = lane_name(r);
    lane_of_seq[r.seq] = i;
  }

  std::ostringstream out;
  out << "sequence diagram: " << lanes.size() << " lanes, " << records.size() << " records\n";
  for (std::size_t i = 0; i < lanes.size(); ++i)
    out << "  [" << i << "] " << lanes[i].name << " " << path_text(lane_paths[i]) << "\n";
  if (records.empty()) return out.str();

  out << "      ds ";
  for (const auto& l : lanes) out << fit(l.name, kLaneWidth);
  out << "\n";
  std::vector<bool> seen(lanes.size(), false);
  for (const auto& r : records) {
    std::size_t i = lane_of_seq[r.seq];
    if (i != kRoot && !seen[i]) {
      seen[i] = true;
      lanes[i].active = true;
    }
    std::string row(1, i == kRoot ? mark_for(r.kind) : ':');
    row += "  ";
    for (std::size_t j = 0; j < lanes.size(); ++j) {
      std::string cell(kLaneWidth, ' ');
      if (j == i)
        cell[0] = mark_for(r.kind);
      else if (lanes[j].active)
        cell[0] = '|';
      row += cell;
    }
    while (!row.empty() && row.back() == ' ') row.pop_back();
    std::string seq = std::to_string(r.seq);
    out << std::string(seq.size() < 5 ? 5 - seq.size() : 0, ' ') << seq << " "
        << fit(row, 3 + kLaneWidth * lanes.size()) << " " << kind_name(r.kind) << " " << r.payload;
    if (r.cause) {
      out << "  <- #" << *r.cause;
      auto c = lane_of_seq.find(*r.cause);
      if (c != lane_of_seq.end() && c->second != i) {
        if (c->second == kRoot)
          out << " from ds";
        else
          out << " from [" << c->second << "]";
      }
    }
    out << "\n";
    if (i != kRoot && r.kind == TraceKind::ActorExited) lanes[i].active = false;
  }
  for (std::size_t i = 0; i < lanes.size(); ++i)
    out << "  [" << i << "] " << (lanes[i].active ? "active at end" : "terminated") << "\n";
  return out.str();
}

}  // namespace ds
