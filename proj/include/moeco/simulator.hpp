#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "moeco/predictor.hpp"
#include "moeco/registry.hpp"
#include "moeco/scheduler.hpp"
#include "moeco/workload.hpp"

namespace moeco {

struct SimConfig {
  double kappa = 4.0;               // paging slowdown per unit of missing memory fraction
  double interference_rate = 0.05;  // slowdown per co-runner
  double interference_cap = 1.25;
  double oom_fraction = 0.25;       // below this share of the requirement the task dies
  double oom_detect_s = 60.0;       // time from placement until the OOM surfaces
  double monitor_window_s = 300.0;
  double monitor_tick_s = 60.0;
  double profiler_noise = 0.02;
  PredictorConfig predictor;
  SchedulerConfig scheduler;
};

enum class EventKind {
  Arrival,
  ProfilingStart,
  ProfilingEnd,
  Placement,
  PagingOnset,
  Oom,
  Completion,
};

std::string to_string(EventKind k);

struct TraceEvent {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  std::uint64_t task = 0;
  int node = -1;
  double allocation_gb = 0.0;  // placement
  int threads = 0;             // placement
  double node_allocated_gb = 0.0;  // placement: node total after the placement
  double value = 0.0;          // profiling: cost (s); paging: slowdown factor; oom: effective GB
  std::string detail;          // profiling: prediction source
};

struct TaskOutcome {
  std::uint64_t id = 0;
  double arrival = 0.0;
  double completion = 0.0;
  double c_is = 0.0;  // isolated runtime
  double c_cl = 0.0;  // turnaround under the policy
  bool completed = false;
  double allocation_gb = 0.0;  // last allocation granted
  double required_gb = 0.0;
  std::string source;  // MoE prediction source, empty otherwise
};

struct SimTrace {
  Policy policy = Policy::Isolation;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  std::vector<TaskOutcome> tasks;  // in task-id order
  std::size_t paging_events = 0;
  std::size_t oom_events = 0;
};

SimTrace run(const ClusterConfig& cluster, std::span<const Task> tasks, Policy policy,
             const Registry& registry, const FeatureSchema& schema, std::uint64_t seed,
             const SimConfig& config = {});

// One JSON object per line: time, kind, task, node, payload.
void write_trace(const SimTrace& trace, std::ostream& out);
std::string trace_to_text(const SimTrace& trace);

}  // namespace moeco
