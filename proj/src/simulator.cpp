#include "moeco/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "moeco/error.hpp"
#include "moeco/profiler.hpp"

namespace moeco {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Arrival: return "arrival";
    case EventKind::ProfilingStart: return "profiling-start";
    case EventKind::ProfilingEnd: return "profiling-end";
    case EventKind::Placement: return "placement";
    case EventKind::PagingOnset: return "paging-onset";
    case EventKind::Oom: return "oom";
    case EventKind::Completion: return "completion";
  }
  return "unknown";
}

namespace {

// Pending simulator events. At equal times completions are handled first so
// freed resources are visible to tasks becoming ready at the same instant.
enum class Pending { Completion = 0, Oom = 1, ProfilingEnd = 2, Arrival = 3 };

struct PendingEvent {
  double time;
  Pending kind;
  std::uint64_t task;
  std::uint64_t token;  // completion generation or placement incarnation

  bool operator>(const PendingEvent& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    if (task != o.task) return task > o.task;
    return token > o.token;
  }
};

TraceEvent make_event(double time, EventKind kind, std::uint64_t task, int node = -1) {
  TraceEvent e;
  e.time = time;
  e.kind = kind;
  e.task = task;
  e.node = node;
  return e;
}

struct TaskState {
  const Task* task = nullptr;
  double remaining = 0.0;  // isolated-runtime seconds of work left
  double factor = 1.0;     // current slowdown
  double last_update = 0.0;
  std::uint64_t generation = 0;
  std::uint64_t incarnation = 0;
  int node = -1;
  bool paging = false;
  bool just_placed = false;
  bool isolated = false;
  double demand_gb = 0.0;
  double demand_cpu = 0.0;
  TaskOutcome outcome;
};

class Simulation {
 public:
  Simulation(const ClusterConfig& cluster, std::span<const Task> tasks, Policy policy,
             const Registry& registry, const FeatureSchema& schema, std::uint64_t seed,
             const SimConfig& config)
      : policy_(policy),
        config_(config),
        registry_(registry),
        profiler_(schema, tasks, config.profiler_noise, seed),
        nodes_(make_nodes(cluster.nodes, cluster.memory_gb, cluster.cores)),
        next_tick_(cluster.nodes, config.monitor_tick_s) {
    trace_.policy = policy;
    trace_.seed = seed;
    for (const auto& t : tasks) {
      if (!states_.emplace(t.id(), TaskState{}).second) {
        throw Error(ErrorCode::StateError, "duplicate task id " + std::to_string(t.id()));
      }
      TaskState& s = states_[t.id()];
      s.task = &t;
      s.remaining = t.base_runtime;
      s.outcome.id = t.id();
      s.outcome.arrival = t.submission.arrival;
      s.outcome.c_is = t.base_runtime;
      s.outcome.required_gb = t.required_gb();
      events_.push({t.submission.arrival, Pending::Arrival, t.id(), 0});
    }
  }

  SimTrace run() {
    while (!events_.empty()) {
      const PendingEvent ev = events_.top();
      events_.pop();
      TaskState& s = states_.at(ev.task);
      if (ev.kind == Pending::Completion && ev.token != s.generation) continue;
      if (ev.kind == Pending::Oom && (s.node < 0 || ev.token != s.incarnation)) continue;
      advance_monitors(ev.time);
      switch (ev.kind) {
        case Pending::Arrival: on_arrival(s, ev.time); break;
        case Pending::ProfilingEnd:
          emit(make_event(ev.time, EventKind::ProfilingEnd, ev.task));
          make_ready(s);
          break;
        case Pending::Completion: on_completion(s, ev.time); break;
        case Pending::Oom: on_oom(s, ev.time); break;
      }
      schedule(ev.time);
    }
    for (auto& [id, s] : states_) trace_.tasks.push_back(s.outcome);
    std::sort(trace_.tasks.begin(), trace_.tasks.end(),
              [](const TaskOutcome& a, const TaskOutcome& b) { return a.id < b.id; });
    return std::move(trace_);
  }

 private:
  void emit(TraceEvent e) {
    if (e.kind == EventKind::PagingOnset) ++trace_.paging_events;
    if (e.kind == EventKind::Oom) ++trace_.oom_events;
    trace_.events.push_back(std::move(e));
  }

  void on_arrival(TaskState& s, double now) {
    const Task& t = *s.task;
    emit(make_event(now, EventKind::Arrival, t.id()));
    s.demand_cpu = t.cpu_load;
    switch (policy_) {
      case Policy::Isolation:
      case Policy::SimpleColocation:
        break;
      case Policy::Oracle:
        s.demand_gb = t.required_gb();
        break;
      case Policy::MoE: {
        double cost = 0.0;
        try {
          PredictOutcome out = predict(t.submission, registry_, profiler_, config_.predictor);
          registry_ = std::move(out.registry);
          s.demand_gb = out.prediction.allocation_gb;
          s.demand_cpu = out.prediction.cpu_load;
          s.outcome.source = to_string(out.prediction.source);
          cost = out.prediction.profiling_cost;
        } catch (const PredictionError&) {
          s.isolated = true;
          s.outcome.source = "prediction_failed";
        }
        if (cost > 0.0) {
          TraceEvent e = make_event(now, EventKind::ProfilingStart, t.id());
          e.value = cost;
          e.detail = s.outcome.source;
          emit(e);
          events_.push({now + cost, Pending::ProfilingEnd, t.id(), 0});
          return;
        }
        break;
      }
    }
    make_ready(s);
  }

  void make_ready(TaskState& s) {
    QueuedTask q;
    q.task_id = s.task->id();
    q.arrival = s.task->submission.arrival;
    q.demand_memory_gb = s.demand_gb;
    q.demand_cpu = s.demand_cpu;
    q.isolation_only = s.isolated;
    enqueue(queue_, q);
  }

  void on_completion(TaskState& s, double now) {
    settle(s, now);
    std::size_t node = 0;
    release(s.task->id(), nodes_, &node);
    TraceEvent e = make_event(now, EventKind::Completion, s.task->id(), static_cast<int>(node));
    emit(e);
    s.node = -1;
    s.outcome.completed = true;
    s.outcome.completion = now;
    s.outcome.c_cl = now - s.outcome.arrival;
    dirty_.insert(node);
  }

  void on_oom(TaskState& s, double now) {
    settle(s, now);
    const double effective = effective_memory(static_cast<std::size_t>(s.node), s.task->id());
    std::size_t node = 0;
    const RunningTask r = release(s.task->id(), nodes_, &node);
    TraceEvent e = make_event(now, EventKind::Oom, s.task->id(), static_cast<int>(node));
    e.value = effective;
    emit(e);
    s.node = -1;
    s.paging = false;
    s.remaining = s.task->base_runtime;  // restarts from scratch
    ++s.generation;
    QueuedTask again;
    again.task_id = s.task->id();
    again.arrival = s.task->submission.arrival;
    again.demand_memory_gb = r.allocation_gb;
    again.demand_cpu = r.cpu_demand;
    again.isolation_only = true;
    again.requeued = true;
    queue_.push_front(again);
    dirty_.insert(node);
  }

  void schedule(double now) {
    for (const Placement& p : dispatch(queue_, nodes_, policy_, now, config_.scheduler)) {
      TaskState& s = states_.at(p.task_id);
      s.node = static_cast<int>(p.node_id);
      s.last_update = now;
      s.just_placed = true;
      s.isolated = s.isolated || p.isolated;
      ++s.incarnation;
      s.outcome.allocation_gb = p.allocation_gb;
      TraceEvent e = make_event(now, EventKind::Placement, p.task_id, static_cast<int>(p.node_id));
      e.allocation_gb = p.allocation_gb;
      e.threads = p.threads;
      e.node_allocated_gb = nodes_[p.node_id].allocated_memory_gb;
      emit(e);
      dirty_.insert(p.node_id);
    }
    for (std::size_t n : dirty_) refresh(n, now);
    dirty_.clear();
  }

  // Memory each co-runner actually holds; earlier starters keep theirs and the
  // latest arrivals absorb any over-commitment.
  std::vector<double> effective_memory(const NodeState& node) const {
    std::vector<double> eff;
    double used = 0.0;
    for (const auto& r : node.running) {
      const double req = states_.at(r.task_id).outcome.required_gb;
      const double e = std::max(0.0, std::min({req, r.allocation_gb, node.physical_memory_gb - used}));
      eff.push_back(e);
      used += e;
    }
    return eff;
  }

  double effective_memory(std::size_t node, std::uint64_t task) const {
    const auto eff = effective_memory(nodes_[node]);
    for (std::size_t i = 0; i < eff.size(); ++i) {
      if (nodes_[node].running[i].task_id == task) return eff[i];
    }
    return 0.0;
  }

  void settle(TaskState& s, double now) {
    if (s.node >= 0) {
      s.remaining = std::max(0.0, s.remaining - (now - s.last_update) / s.factor);
    }
    s.last_update = now;
  }

  void refresh(std::size_t node_id, double now) {
    const NodeState& node = nodes_[node_id];
    const auto eff = effective_memory(node);
    const double co = static_cast<double>(node.running.size());
    const double interference =
        std::min(config_.interference_cap, 1.0 + config_.interference_rate * (co - 1.0));
    for (std::size_t i = 0; i < node.running.size(); ++i) {
      const RunningTask& r = node.running[i];
      TaskState& s = states_.at(r.task_id);
      settle(s, now);
      const double req = s.outcome.required_gb;
      const double cpu = s.task->cpu_load;
      // Core share relative to what the task used in isolation: a task that
      // needed a quarter of the machine runs at full speed on a quarter of it.
      const double share = std::min(
          1.0, static_cast<double>(r.threads) / static_cast<double>(node.cores) / cpu);
      const double cpu_factor = (1.0 - cpu) + cpu / share;
      const double paging = eff[i] < req ? 1.0 + config_.kappa * (req - eff[i]) / req : 1.0;
      s.factor = cpu_factor * interference * paging;

      if (paging > 1.0 && !s.paging) {
        TraceEvent e = make_event(now, EventKind::PagingOnset, r.task_id, static_cast<int>(node_id));
        e.value = paging;
        emit(e);
      }
      s.paging = paging > 1.0;
      if (s.just_placed) {
        s.just_placed = false;
        if (!s.isolated && eff[i] < config_.oom_fraction * req) {
          events_.push({now + config_.oom_detect_s, Pending::Oom, r.task_id, s.incarnation});
        }
      }
      ++s.generation;
      events_.push({now + s.remaining * s.factor, Pending::Completion, r.task_id, s.generation});
    }
  }

  // Windowed averages sampled every tick; usage is piecewise constant between events.
  void advance_monitors(double now) {
    const double alpha = 1.0 - std::exp(-config_.monitor_tick_s / config_.monitor_window_s);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (next_tick_[i] > now) continue;
      const double ticks = std::floor((now - next_tick_[i]) / config_.monitor_tick_s) + 1.0;
      double usage = 0.0;
      for (double e : effective_memory(nodes_[i])) usage += e;
      auto& avg = nodes_[i].monitored_memory_gb;
      avg = usage + (avg - usage) * std::pow(1.0 - alpha, ticks);
      next_tick_[i] += ticks * config_.monitor_tick_s;
    }
  }

  Policy policy_;
  SimConfig config_;
  Registry registry_;
  SimulatedProfiler profiler_;
  std::vector<NodeState> nodes_;
  std::vector<double> next_tick_;
  std::unordered_map<std::uint64_t, TaskState> states_;
  std::priority_queue<PendingEvent, std::vector<PendingEvent>, std::greater<>> events_;
  std::deque<QueuedTask> queue_;
  std::set<std::size_t> dirty_;
  SimTrace trace_;
};

}  // namespace

SimTrace run(const ClusterConfig& cluster, std::span<const Task> tasks, Policy policy,
             const Registry& registry, const FeatureSchema& schema, std::uint64_t seed,
             const SimConfig& config) {
  if (cluster.nodes < 1) throw Error(ErrorCode::SpecError, "cluster needs at least one node");
  return Simulation(cluster, tasks, policy, registry, schema, seed, config).run();
}

void write_trace(const SimTrace& trace, std::ostream& out) {
  using nlohmann::json;
  for (const auto& e : trace.events) {
    json payload = json::object();
    switch (e.kind) {
      case EventKind::Placement:
        payload = {{"allocation_gb", e.allocation_gb},
                   {"threads", e.threads},
                   {"node_allocated_gb", e.node_allocated_gb}};
        break;
      case EventKind::ProfilingStart:
        payload = {{"cost_s", e.value}, {"source", e.detail}};
        break;
      case EventKind::PagingOnset:
        payload = {{"slowdown", e.value}};
        break;
      case EventKind::Oom:
        payload = {{"effective_gb", e.value}};
        break;
      default:
        break;
    }
    json line{{"time", e.time},
              {"kind", to_string(e.kind)},
              {"task", e.task},
              {"node", e.node >= 0 ? json(e.node) : json(nullptr)},
              {"payload", payload}};
    out << line.dump() << '\n';
  }
}

std::string trace_to_text(const SimTrace& trace) {
  std::ostringstream ss;
  write_trace(trace, ss);
  return ss.str();
}

}  // namespace moeco
