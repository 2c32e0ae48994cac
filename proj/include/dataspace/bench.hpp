#pragma once

// Benchmark programs and shape verdicts. Timings are only ever compared
// against each other, never against absolute numbers.

#include <string>
#include <vector>

namespace ds {

struct BenchPoint {
  std::size_t k = 0;
  double ns_per_unit = 0;  // unit: delivered message, notification or connection
  std::size_t units = 0;   // per repetition
  std::size_t repeats = 0;
};

struct BenchReport {
  std::string name;
  std::vector<BenchPoint> points;
  std::string shape;  // "flat" or "a+b/k"
  double a = 0, b = 0;
  bool pass = false;
  std::string verdict;
};

const std::vector<std::string>& bench_names();
bool is_bench(const std::string& name);

// One measurement. repeat = 0 calibrates to about `min_seconds` of work.
BenchPoint run_bench(const std::string& name, std::size_t k, std::size_t repeat = 0, double min_seconds = 0.2);

// Measures each k and judges the shape expected for `name`.
BenchReport bench_shape(const std::string& name, const std::vector<std::size_t>& ks, std::size_t repeat = 0,
                        double min_seconds = 0.2);

// Least squares for y = a + b/k.
void fit_inverse(const std::vector<BenchPoint>& pts, double& a, double& b);

// Per-peer notification log of one scn-presence run: for peer i, the size of
// each patch it received, in order.
std::vector<std::vector<std::size_t>> presence_log(std::size_t k);

std::string format_report(const BenchReport& r);

}  // namespace ds
