#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "moeco/simulator.hpp"

namespace moeco {

struct TaskRuntime {
  std::uint64_t id = 0;
  double c_is = 0.0;
  double c_cl = 0.0;
};

struct MetricsReport {
  double stp = 0.0;
  double antt = 0.0;
  std::size_t n = 0;
  std::vector<TaskRuntime> per_task;
  std::string policy;
  std::uint64_t seed = 0;
};

// System throughput: sum of isolated-to-achieved runtime ratios.
double stp(std::span<const TaskRuntime> rows);
// Average normalized turnaround time.
double antt(std::span<const TaskRuntime> rows);

// Throw IncompleteTrace when a task never finished.
double stp(const SimTrace& trace);
double antt(const SimTrace& trace);
MetricsReport report(const SimTrace& trace);

struct Summary {
  std::string policy;
  std::size_t reports = 0;
  double stp_geomean = 0.0;
  double antt_geomean = 0.0;
  double stp_min = 0.0, stp_max = 0.0;
  double antt_min = 0.0, antt_max = 0.0;
};

Summary aggregate(std::span<const MetricsReport> reports);

double geometric_mean(std::span<const double> values);

std::string csv_header();  // policy,seed,n,stp,antt
std::string csv_row(const MetricsReport& r);
void write_report_json(const MetricsReport& r, std::ostream& out);

}  // namespace moeco
