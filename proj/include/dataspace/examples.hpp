#pragma once

// Bundled example programs, runnable by name under the ground loop with a
// virtual clock. Each program prints through a Printer so runs can be
// captured as transcripts.

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataspace/drivers.hpp"

namespace ds {

struct UnknownExample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TranscriptLine {
  std::int64_t ms = 0;  // clock time when printed
  std::string text;
  friend bool operator==(const TranscriptLine&, const TranscriptLine&) = default;
};

class Printer {
 public:
  Printer(const Clock* clock, std::function<void(const std::string&)> live = {})
      : clock_(clock), live_(std::move(live)) {}
  void operator()(const std::string& text);
  const std::vector<TranscriptLine>& lines() const { return lines_; }
  std::vector<std::string> texts() const;

 private:
  const Clock* clock_;
  std::function<void(const std::string&)> live_;
  std::vector<TranscriptLine> lines_;
};

struct RunOptions {
  std::optional<std::int64_t> virtual_ms;  // default per example
  TraceSink* trace = nullptr;
  std::istream* input = nullptr;  // chat reads lines from here
  int rounds = 10;                // box: number of client increments
  bool real_time = false;         // wall clock instead of virtual
  std::uint64_t max_steps = 2'000'000;
  std::function<void(const std::string&)> live;  // called as each line prints
};

struct RunResult {
  std::vector<TranscriptLine> transcript;
  std::vector<std::string> warnings;
  bool completed = false;
  std::int64_t end_ms = 0;
  std::vector<std::string> texts() const;
};

struct ExampleInfo {
  std::string name;
  std::string summary;
  std::int64_t default_ms;
};

const std::vector<ExampleInfo>& example_list();
// Throws UnknownExample.
RunResult run_example(const std::string& name, const RunOptions& opts = {});

// Programs, exposed for tests. `print` and `clock` must outlive the run.
// Programs taking a clock include the timer drivers they need.
Actions box_program(Printer& print, int rounds);
Actions monolithic_box_program(Printer& print, int rounds);
Actions flip_flop_program(Printer& print, Clock& clock);
Actions rooms_program(Printer& print, Clock& clock);
Actions demand_matcher_program(Printer& print, Clock& clock);
Actions square_program(Printer& print, Clock& clock);
Actions add1_program(Printer& print);
Actions ancestor_program(Printer& print);
Actions syllogism_program(Printer& print);
Actions cell_program(Printer& print);
Actions later_than_program(Printer& print, Clock& clock);
Actions ticks_program(Printer& print, Clock& clock);
Actions timeout_program(Printer& print, Clock& clock);
Actions chat_program(Printer& print);
Actions cross_layer_program(Printer& print);

// Both layers of the cross-layer program after it quiesces. The inner set
// leaves out the relay's own subscription.
struct LayerSets {
  AssertionSet outer, inner;
  std::vector<std::string> transcript;
};
LayerSets run_cross_layer();

}  // namespace ds
