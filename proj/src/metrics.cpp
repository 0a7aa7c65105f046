#include "moeco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "moeco/error.hpp"
#include "moeco/scheduler.hpp"

namespace moeco {

namespace {

void check_rows(std::span<const TaskRuntime> rows) {
  if (rows.empty()) throw Error(ErrorCode::IncompleteTrace, "no tasks in trace");
  for (const auto& r : rows) {
    if (!(r.c_is > 0.0) || !(r.c_cl > 0.0)) {
      throw Error(ErrorCode::IncompleteTrace,
                  "task " + std::to_string(r.id) + " has a non-positive runtime");
    }
  }
}

std::vector<TaskRuntime> rows_of(const SimTrace& trace) {
  std::vector<TaskRuntime> rows;
  rows.reserve(trace.tasks.size());
  for (const auto& t : trace.tasks) {
    if (!t.completed) {
      throw Error(ErrorCode::IncompleteTrace, "task " + std::to_string(t.id) + " did not complete");
    }
    rows.push_back({t.id, t.c_is, t.c_cl});
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double stp(std::span<const TaskRuntime> rows) {
  check_rows(rows);
  double sum = 0.0;
  for (const auto& r : rows) sum += r.c_is / r.c_cl;
  return sum;
}

double antt(std::span<const TaskRuntime> rows) {
  check_rows(rows);
  double sum = 0.0;
  for (const auto& r : rows) sum += r.c_cl / r.c_is;
  return sum / static_cast<double>(rows.size());
}

double stp(const SimTrace& trace) { return stp(rows_of(trace)); }
double antt(const SimTrace& trace) { return antt(rows_of(trace)); }

MetricsReport report(const SimTrace& trace) {
  MetricsReport r;
  r.per_task = rows_of(trace);
  r.stp = stp(r.per_task);
  r.antt = antt(r.per_task);
  r.n = r.per_task.size();
  r.policy = to_string(trace.policy);
  r.seed = trace.seed;
  return r;
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::DomainError, "geometric mean of nothing");
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw Error(ErrorCode::DomainError, "geometric mean needs positive values");
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

Summary aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::DomainError, "nothing to aggregate");
  Summary s;
  s.policy = reports.front().policy;
  s.reports = reports.size();
  std::vector<double> stps, antts;
  for (const auto& r : reports) {
    if (r.policy != s.policy) {
      throw Error(ErrorCode::DomainError, "cannot aggregate " + r.policy + " with " + s.policy);
    }
    stps.push_back(r.stp);
    antts.push_back(r.antt);
  }
  s.stp_geomean = geometric_mean(stps);
  s.antt_geomean = geometric_mean(antts);
  const auto [stp_lo, stp_hi] = std::minmax_element(stps.begin(), stps.end());
  const auto [antt_lo, antt_hi] = std::minmax_element(antts.begin(), antts.end());
  s.stp_min = *stp_lo;
  s.stp_max = *stp_hi;
  s.antt_min = *antt_lo;
  s.antt_max = *antt_hi;
  return s;
}

std::string csv_header() { return "policy,seed,n,stp,antt"; }

std::string csv_row(const MetricsReport& r) {
  return r.policy + "," + std::to_string(r.seed) + "," + std::to_string(r.n) + "," + fmt(r.stp) +
         "," + fmt(r.antt);
}

void write_report_json(const MetricsReport& r, std::ostream& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : r.per_task) rows.push_back({{"id", t.id}, {"c_is", t.c_is}, {"c_cl", t.c_cl}});
  nlohmann::json doc{{"policy", r.policy}, {"seed", r.seed}, {"n", r.n},
                     {"stp", r.stp},       {"antt", r.antt}, {"per_task", rows}};
  out << doc.dump(2) << '\n';
}

}  // namespace moeco
