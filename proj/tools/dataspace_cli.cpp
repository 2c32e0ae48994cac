// dataspace: run bundled examples, benchmarks, and render trace files.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dataspace/bench.hpp"
#include "dataspace/examples.hpp"

namespace {

std::vector<std::size_t> default_ks(const std::string& name) {
  if (name == "unicast") return {10, 100, 1000};
  if (name == "broadcast") return {1, 3, 10, 30, 100, 300, 1000};
  if (name == "conn-scale") return {16, 64, 256, 1024};
  return {10, 100, 300};
}

int cmd_run(const std::string& name, std::string trace_path, std::optional<std::int64_t> virtual_ms, int rounds,
            bool real_time) {
  if (trace_path.empty())
    if (const char* env = std::getenv("DATASPACE_TRACE")) trace_path = env;
  ds::TraceSink sink = trace_path.empty() ? ds::TraceSink() : ds::TraceSink::to_file(trace_path);
  ds::RunOptions opts;
  opts.virtual_ms = virtual_ms;
  opts.trace = &sink;
  opts.input = &std::cin;
  opts.rounds = rounds;
  opts.real_time = real_time;
  opts.live = [](const std::string& line) { std::cout << line << '\n' << std::flush; };
  ds::RunResult r = ds::run_example(name, opts);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (!r.completed) std::cerr << "note: step budget exhausted before the program went quiet\n";
  return 0;
}

int cmd_bench(const std::string& name, std::vector<std::size_t> ks, std::size_t repeat) {
  if (!ds::is_bench(name)) {
    std::cerr << "unknown benchmark: " << name << '\n';
    return 2;
  }
  if (ks.empty()) ks = default_ks(name);
  ds::BenchReport r = ds::bench_shape(name, ks, repeat);
  std::cout << ds::format_report(r);
  return 0;
}

int cmd_render(const std::string& path, const std::string& output) {
  std::string diagram = ds::render_sequence_diagram(ds::read_trace_file(path));
  if (output.empty()) {
    std::cout << diagram;
    return 0;
  }
  std::ofstream out(output);
  if (!out) {
    std::cerr << "cannot write " << output << '\n';
    return 1;
  }
  out << diagram;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run dataspace example programs, benchmarks and trace renderings"};
  app.require_subcommand(1);

  std::string name, trace_path, output, render_path;
  std::optional<std::int64_t> virtual_ms;
  int rounds = 10;
  bool real_time = false;
  std::vector<std::size_t> ks;
  std::size_t repeat = 0;

  auto* run = app.add_subcommand("run", "Run a bundled example and print its transcript");
  run->add_option("name", name, "Example name (see `list`)")->required();
  run->add_option("--trace", trace_path, "Write a trace file (default: $DATASPACE_TRACE)");
  run->add_option("--virtual-ms", virtual_ms, "Virtual time budget in milliseconds");
  run->add_option("--rounds", rounds, "Box examples: number of increments")->check(CLI::NonNegativeNumber);
  run->add_flag("--real-time", real_time, "Use the wall clock instead of virtual time");

  auto* bench = app.add_subcommand("bench", "Run a benchmark and judge its shape");
  bench->add_option("name", name, "unicast, broadcast, scn-flat, scn-presence or conn-scale")->required();
  bench->add_option("--k", ks, "Group size; repeat for several")->check(CLI::PositiveNumber);
  bench->add_option("--repeat", repeat, "Repetitions per k (default: calibrated)");

  auto* render = app.add_subcommand("render", "Render a trace file as a text sequence diagram");
  render->add_option("path", render_path, "Trace file")->required();
  render->add_option("-o,--output", output, "Write the diagram here instead of stdout");

  auto* list = app.add_subcommand("list", "List examples and benchmarks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(name, trace_path, virtual_ms, rounds, real_time);
    if (*bench) return cmd_bench(name, ks, repeat);
    if (*render) return cmd_render(render_path, output);
    if (*list) {
      for (const auto& e : ds::example_list()) std::cout << "example  " << e.name << "  " << e.summary << '\n';
      for (const auto& b : ds::bench_names()) std::cout << "bench    " << b << '\n';
      return 0;
    }
  } catch (const ds::UnknownExample& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const ds::MalformedTrace& e) {
    std::cerr << "malformed trace: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
