#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ds {

using TracePath = std::vector<std::uint64_t>;

enum class TraceKind {
  ActionProduced,
  ActionInterpreted,
  EventDelivered,
  ActorSpawned,
  ActorExited,
  FacetStarted,
  FacetStopped,
};

std::string_view kind_name(TraceKind k);
std::optional<TraceKind> kind_from_name(std::string_view s);

struct TraceRecord {
  std::uint64_t seq = 0;
  TracePath path;
  TraceKind kind = TraceKind::ActionProduced;
  std::string payload;
  std::optional<std::uint64_t> cause;

  // One line of canonical value text: #rec(seq (path...) kind "payload" cause-or-#f)
  std::string to_line() const;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct MalformedTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kTraceHeader = "# dataspace-trace v1";

TraceRecord parse_record(std::string_view line);
// Skips the header and `;` comment lines.
std::vector<TraceRecord> parse_trace(std::string_view text);
std::vector<TraceRecord> read_trace_file(const std::string& path);

std::string path_text(const TracePath& p);

class TraceSink {
 public:
  TraceSink() = default;  // disabled
  static TraceSink to_file(const std::string& path);
  static TraceSink in_memory();

  bool enabled() const { return enabled_; }
  // Returns the record's seq, or nullopt when disabled.
  std::optional<std::uint64_t> emit(const TracePath& path, TraceKind kind, std::string payload,
                                    std::optional<std::uint64_t> cause);
  // Out-of-band diagnostics; written as comment lines and kept in memory.
  void warn(const TracePath& path, const std::string& text);

  const std::vector<TraceRecord>& records() const { return records_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void flush();

 private:
  bool enabled_ = false;
  bool keep_ = false;
  std::uint64_t next_seq_ = 1;
  std::unique_ptr<std::ofstream> out_;
  std::vector<TraceRecord> records_;
  std::vector<std::string> warnings_;
};

// Ambient trace context for the code currently running on this thread.
struct TraceContext {
  TraceSink* sink = nullptr;
  TracePath path;
  std::optional<std::uint64_t> cause;
};

const TraceContext& trace_context();

class TraceScope {
 public:
  explicit TraceScope(TraceContext ctx);
  ~TraceScope();
  TraceScope(const TraceScope&) = delete;
  TraceScope& operator=(const TraceScope&) = delete;

 private:
  TraceContext saved_;
};

// Emits against the ambient context.
std::optional<std::uint64_t> trace_emit(TraceKind kind, std::string payload);
void trace_warn(const std::string& text);

// Text sequence diagram: one lane per actor path, one row per record.
std::string render_sequence_diagram(const std::vector<TraceRecord>& records);

}  // namespace ds
