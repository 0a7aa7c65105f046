#include "moeco/scheduler.hpp"

#include <algorithm>

#include "moeco/error.hpp"

namespace moeco {

namespace {

// Absorbs representation error in sums of allocations.
constexpr double kEps = 1e-9;

bool exceeds_every_node(const std::vector<NodeState>& nodes, double demand) {
  return std::none_of(nodes.begin(), nodes.end(),
                      [demand](const NodeState& n) { return demand <= n.physical_memory_gb + kEps; });
}

void start(NodeState& node, const QueuedTask& t, double allocation, bool isolated, double now,
           std::vector<Placement>& out) {
  node.running.push_back({t.task_id, allocation, t.demand_cpu, 0, now});
  node.allocated_memory_gb += allocation;
  node.cpu_load += t.demand_cpu;
  node.exclusive = node.exclusive || isolated;
  rebalance_threads(node);
  out.push_back({t.task_id, node.id, allocation, node.running.back().threads, now, isolated});
}

}  // namespace

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Isolation: return "isolation";
    case Policy::SimpleColocation: return "simple";
    case Policy::MoE: return "moe";
    case Policy::Oracle: return "oracle";
  }
  return "unknown";
}

Policy policy_from_string(const std::string& s) {
  if (s == "isolation") return Policy::Isolation;
  if (s == "simple") return Policy::SimpleColocation;
  if (s == "moe") return Policy::MoE;
  if (s == "oracle") return Policy::Oracle;
  throw Error(ErrorCode::UsageError, "unknown policy '" + s + "'");
}

std::vector<NodeState> make_nodes(std::size_t count, double memory_gb, int cores) {
  std::vector<NodeState> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    nodes[i].id = i;
    nodes[i].physical_memory_gb = memory_gb;
    nodes[i].cores = cores;
  }
  return nodes;
}

bool admit(const NodeState& node, double demand_memory_gb, double demand_cpu) {
  return node.allocated_memory_gb + demand_memory_gb <= node.physical_memory_gb + kEps &&
         node.cpu_load + demand_cpu <= 1.0 + kEps;
}

void rebalance_threads(NodeState& node) {
  if (node.running.empty()) return;
  const int n = static_cast<int>(node.running.size());
  const int base = std::max(1, node.cores / n);
  const int extra = node.cores >= n ? node.cores % n : 0;
  for (int i = 0; i < n; ++i) node.running[i].threads = base + (i < extra ? 1 : 0);
}

std::vector<Placement> dispatch(std::deque<QueuedTask>& queue, std::vector<NodeState>& nodes,
                                Policy policy, double now, const SchedulerConfig& config) {
  std::vector<Placement> out;
  while (!queue.empty()) {
    const QueuedTask& head = queue.front();
    NodeState* target = nullptr;
    double allocation = 0.0;
    bool isolated = head.isolation_only || policy == Policy::Isolation;
    if (!isolated && (policy == Policy::MoE || policy == Policy::Oracle)) {
      isolated = exceeds_every_node(nodes, head.demand_memory_gb);
    }

    if (isolated) {
      for (auto& n : nodes) {
        if (n.running.empty()) {
          target = &n;
          allocation = n.physical_memory_gb;
          break;
        }
      }
    } else if (policy == Policy::SimpleColocation) {
      for (auto& n : nodes) {
        if (n.exclusive || n.running.size() >= config.simple_max_per_node) continue;
        const double free = n.running.empty()
                                ? n.physical_memory_gb
                                : n.physical_memory_gb - n.monitored_memory_gb;
        if (free >= config.simple_min_heap_gb && n.cpu_load + head.demand_cpu <= 1.0 + kEps) {
          target = &n;
          allocation = free;
          break;
        }
      }
    } else {
      for (auto& n : nodes) {
        if (n.exclusive || n.running.size() >= static_cast<std::size_t>(n.cores)) continue;
        if (admit(n, head.demand_memory_gb, head.demand_cpu)) {
          target = &n;
          allocation = head.demand_memory_gb;
          break;
        }
      }
    }

    if (target == nullptr) break;  // head blocks the queue
    start(*target, head, allocation, isolated, now, out);
    queue.pop_front();
  }
  return out;
}

RunningTask release(std::uint64_t task_id, std::vector<NodeState>& nodes, std::size_t* node_id) {
  for (auto& n : nodes) {
    auto it = std::find_if(n.running.begin(), n.running.end(),
                           [task_id](const RunningTask& r) { return r.task_id == task_id; });
    if (it == n.running.end()) continue;
    RunningTask r = *it;
    n.running.erase(it);
    n.allocated_memory_gb -= r.allocation_gb;
    n.cpu_load -= r.cpu_demand;
    if (n.running.empty()) {
      n.allocated_memory_gb = 0.0;
      n.cpu_load = 0.0;
      n.exclusive = false;
    }
    rebalance_threads(n);
    if (node_id != nullptr) *node_id = n.id;
    return r;
  }
  throw Error(ErrorCode::StateError, "task " + std::to_string(task_id) + " is not running");
}

std::vector<Placement> on_completion(std::uint64_t task_id, std::vector<NodeState>& nodes,
                                     std::deque<QueuedTask>& queue, Policy policy, double now,
                                     const SchedulerConfig& config) {
  release(task_id, nodes);
  return dispatch(queue, nodes, policy, now, config);
}

std::vector<Placement> on_oom(std::uint64_t task_id, std::vector<NodeState>& nodes,
                              std::deque<QueuedTask>& queue, Policy policy, double now,
                              const SchedulerConfig& config) {
  const RunningTask r = release(task_id, nodes);
  QueuedTask again;
  again.task_id = task_id;
  again.demand_memory_gb = r.allocation_gb;
  again.demand_cpu = r.cpu_demand;
  again.isolation_only = true;
  again.requeued = true;
  queue.push_front(again);
  return dispatch(queue, nodes, policy, now, config);
}

void enqueue(std::deque<QueuedTask>& queue, const QueuedTask& task) {
  auto later = [&task](const QueuedTask& q) {
    return !q.requeued && (q.arrival > task.arrival ||
                           (q.arrival == task.arrival && q.task_id > task.task_id));
  };
  queue.insert(std::find_if(queue.begin(), queue.end(), later), task);
}

}  // namespace moeco
