#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace moeco {

enum class Policy { Isolation, SimpleColocation, MoE, Oracle };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);

struct RunningTask {
  std::uint64_t task_id = 0;
  double allocation_gb = 0.0;
  double cpu_demand = 0.0;
  int threads = 0;
  double start_time = 0.0;
};

struct NodeState {
  std::size_t id = 0;
  double physical_memory_gb = 64.0;
  int cores = 16;
  double allocated_memory_gb = 0.0;
  double cpu_load = 0.0;  // sum of co-runners' estimated CPU demand
  bool exclusive = false;  // an isolated task owns the node
  double monitored_memory_gb = 0.0;  // resource monitor's windowed average usage
  std::vector<RunningTask> running;  // in start order
};

std::vector<NodeState> make_nodes(std::size_t count, double memory_gb, int cores);

struct QueuedTask {
  std::uint64_t task_id = 0;
  double arrival = 0.0;
  double demand_memory_gb = 0.0;
  double demand_cpu = 0.0;
  bool isolation_only = false;  // must run alone with the whole node
  bool requeued = false;        // re-entered at the front after an OOM failure
};

struct Placement {
  std::uint64_t task_id = 0;
  std::size_t node_id = 0;
  double allocation_gb = 0.0;
  int threads = 0;
  double start_time = 0.0;
  bool isolated = false;
};

struct SchedulerConfig {
  std::size_t simple_max_per_node = 2;
  double simple_min_heap_gb = 1.0;
};

// Spare memory and aggregate CPU both stay within the node's capacity.
bool admit(const NodeState& node, double demand_memory_gb, double demand_cpu);

// Spreads the node's cores over its running tasks; earlier starters receive
// the remainder cores.
void rebalance_threads(NodeState& node);

// Strict FCFS: places tasks from the queue front until the head cannot be
// placed. Mutates `queue` and `nodes`.
std::vector<Placement> dispatch(std::deque<QueuedTask>& queue, std::vector<NodeState>& nodes,
                                Policy policy, double now, const SchedulerConfig& config = {});

// Frees the task's resources and rebalances its node. Throws StateError for
// unknown tasks.
RunningTask release(std::uint64_t task_id, std::vector<NodeState>& nodes,
                    std::size_t* node_id = nullptr);

std::vector<Placement> on_completion(std::uint64_t task_id, std::vector<NodeState>& nodes,
                                     std::deque<QueuedTask>& queue, Policy policy, double now,
                                     const SchedulerConfig& config = {});

// Kills an out-of-memory task and re-queues it at the front, isolation-only.
std::vector<Placement> on_oom(std::uint64_t task_id, std::vector<NodeState>& nodes,
                              std::deque<QueuedTask>& queue, Policy policy, double now,
                              const SchedulerConfig& config = {});

// Inserts a newly schedulable task by (arrival, id), behind any re-queued tasks.
void enqueue(std::deque<QueuedTask>& queue, const QueuedTask& task);

}  // namespace moeco
