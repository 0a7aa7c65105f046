#include <deque>
#include <random>
#include <vector>

#include "doctest.h"
#include "moeco/error.hpp"
#include "moeco/scheduler.hpp"

using namespace moeco;

namespace {

QueuedTask q(std::uint64_t id, double mem, double cpu, double arrival = 0.0) {
  QueuedTask t;
  t.task_id = id;
  t.arrival = arrival;
  t.demand_memory_gb = mem;
  t.demand_cpu = cpu;
  return t;
}

struct RefNode {
  double phys, alloc = 0, cpu = 0;
  int cores, count = 0;
  bool exclusive = false;
};

struct RefPlacement {
  std::uint64_t task;
  std::size_t node;
  double allocation;
};

// Independent first-fit reference for the MoE/Oracle policies.
std::vector<RefPlacement> first_fit_reference(std::vector<QueuedTask> queue, std::vector<RefNode>& nodes) {
  std::vector<RefPlacement> out;
  std::size_t head = 0;
  while (head < queue.size()) {
    const QueuedTask& t = queue[head];
    bool oversize = true;
    for (const auto& n : nodes) oversize = oversize && t.demand_memory_gb > n.phys + 1e-9;
    int chosen = -1;
    for (std::size_t i = 0; i < nodes.size() && chosen < 0; ++i) {
      RefNode& n = nodes[i];
      if (oversize || t.isolation_only) {
        if (n.count == 0) chosen = static_cast<int>(i);
      } else if (!n.exclusive && n.count < n.cores && n.alloc + t.demand_memory_gb <= n.phys + 1e-9 &&
                 n.cpu + t.demand_cpu <= 1.0 + 1e-9) {
        chosen = static_cast<int>(i);
      }
    }
    if (chosen < 0) break;
    RefNode& n = nodes[static_cast<std::size_t>(chosen)];
    const bool iso = oversize || t.isolation_only;
    const double a = iso ? n.phys : t.demand_memory_gb;
    n.alloc += a;
    n.cpu += t.demand_cpu;
    n.count += 1;
    n.exclusive = n.exclusive || iso;
    out.push_back({t.task_id, static_cast<std::size_t>(chosen), a});
    ++head;
  }
  return out;
}

}  // namespace

TEST_CASE("admission checks spare memory and aggregate CPU") {
  auto nodes = make_nodes(1, 64.0, 16);
  CHECK(admit(nodes[0], 32.0, 0.4));
  nodes[0].allocated_memory_gb = 60.0;
  CHECK_FALSE(admit(nodes[0], 5.0, 0.1));
  CHECK(admit(nodes[0], 4.0, 0.1));
  nodes[0].allocated_memory_gb = 0.0;
  nodes[0].cpu_load = 0.7;
  CHECK_FALSE(admit(nodes[0], 1.0, 0.4));
  CHECK(admit(nodes[0], 1.0, 0.3));
}

TEST_CASE("threads split evenly with the remainder to earlier starters") {
  NodeState n;
  n.cores = 16;
  n.running.resize(1);
  rebalance_threads(n);
  CHECK(n.running[0].threads == 16);
  n.running.resize(2);
  rebalance_threads(n);
  CHECK(n.running[0].threads == 8);
  CHECK(n.running[1].threads == 8);
  n.running.resize(3);
  rebalance_threads(n);
  CHECK(n.running[0].threads == 6);
  CHECK(n.running[1].threads == 5);
  CHECK(n.running[2].threads == 5);
}

TEST_CASE("worked example placement on one 32 GB node") {
  auto nodes = make_nodes(1, 32.0, 16);
  std::deque<QueuedTask> queue{q(0, 5.68, 0.3), q(1, 5.76, 0.35), q(2, 32.0, 0.3)};
  auto placed = dispatch(queue, nodes, Policy::MoE, 0.0);
  REQUIRE(placed.size() == 2);
  CHECK(placed[0].task_id == 0);
  CHECK(placed[1].task_id == 1);
  CHECK(nodes[0].allocated_memory_gb == doctest::Approx(11.44));
  CHECK(queue.size() == 1);

  CHECK(on_completion(0, nodes, queue, Policy::MoE, 10.0).empty());
  CHECK(nodes[0].running[0].threads == 16);
  placed = on_completion(1, nodes, queue, Policy::MoE, 20.0);
  REQUIRE(placed.size() == 1);
  CHECK(placed[0].task_id == 2);
  CHECK(placed[0].allocation_gb == 32.0);
  CHECK(placed[0].threads == 16);
}

TEST_CASE("isolation runs one task per node") {
  auto nodes = make_nodes(2, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 1, 0.1), q(1, 1, 0.1), q(2, 1, 0.1)};
  const auto placed = dispatch(queue, nodes, Policy::Isolation, 0.0);
  REQUIRE(placed.size() == 2);
  CHECK(placed[0].node_id == 0);
  CHECK(placed[1].node_id == 1);
  CHECK(placed[0].allocation_gb == 64.0);
  CHECK(placed[0].isolated);
  CHECK(queue.size() == 1);
  for (const auto& n : nodes) CHECK(n.running.size() == 1);
}

TEST_CASE("the blocked head stops the scan") {
  auto nodes = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 40, 0.2), q(1, 30, 0.2), q(2, 1, 0.1)};
  const auto placed = dispatch(queue, nodes, Policy::Oracle, 0.0);
  CHECK(placed.size() == 1);
  CHECK(queue.front().task_id == 1);  // task 2 would fit but may not skip ahead
}

TEST_CASE("oversize demands run alone on the first idle node") {
  auto nodes = make_nodes(2, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 10, 0.2), q(1, 80, 0.2), q(2, 5, 0.1)};
  const auto placed = dispatch(queue, nodes, Policy::MoE, 0.0);
  REQUIRE(placed.size() == 3);
  CHECK(placed[1].node_id == 1);
  CHECK(placed[1].isolated);
  CHECK(placed[1].allocation_gb == 64.0);
  CHECK(nodes[1].exclusive);
  CHECK(placed[2].node_id == 0);  // exclusive node is skipped
}

TEST_CASE("simple co-location: pairwise, free-memory heap, CPU-bounded") {
  auto nodes = make_nodes(2, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 0, 0.3), q(1, 0, 0.3), q(2, 0, 0.3), q(3, 0, 0.3), q(4, 0, 0.3)};
  nodes[0].monitored_memory_gb = 0.0;
  auto placed = dispatch(queue, nodes, Policy::SimpleColocation, 0.0);
  REQUIRE(placed.size() == 4);
  CHECK(placed[0].node_id == 0);
  CHECK(placed[1].node_id == 0);
  CHECK(placed[2].node_id == 1);
  CHECK(placed[3].node_id == 1);
  CHECK(placed[0].allocation_gb == 64.0);
  CHECK(queue.size() == 1);

  // The second task's heap is what the monitor reports as free.
  auto fresh = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> one{q(0, 0, 0.3)};
  dispatch(one, fresh, Policy::SimpleColocation, 0.0);
  fresh[0].monitored_memory_gb = 20.0;
  std::deque<QueuedTask> two{q(1, 0, 0.3)};
  placed = dispatch(two, fresh, Policy::SimpleColocation, 0.0);
  REQUIRE(placed.size() == 1);
  CHECK(placed[0].allocation_gb == 44.0);

  // Below the minimum heap, or over the CPU budget, the task waits.
  fresh[0].monitored_memory_gb = 63.5;
  auto blocked = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> a{q(0, 0, 0.8)};
  dispatch(a, blocked, Policy::SimpleColocation, 0.0);
  std::deque<QueuedTask> b{q(1, 0, 0.3)};
  CHECK(dispatch(b, blocked, Policy::SimpleColocation, 0.0).empty());
  auto low = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> c{q(0, 0, 0.1)};
  dispatch(c, low, Policy::SimpleColocation, 0.0);
  low[0].monitored_memory_gb = 63.5;
  std::deque<QueuedTask> d{q(1, 0, 0.1)};
  CHECK(dispatch(d, low, Policy::SimpleColocation, 0.0).empty());
}

TEST_CASE("first-fit matches a brute-force reference on random queues") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_nodes = 1 + rng() % 4;
    const std::vector<double> phys_choices{16.0, 32.0, 64.0};
    std::vector<NodeState> nodes;
    std::vector<RefNode> ref;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      NodeState n;
      n.id = i;
      n.physical_memory_gb = phys_choices[rng() % 3];
      n.cores = 2 + static_cast<int>(rng() % 15);
      nodes.push_back(n);
      ref.push_back({n.physical_memory_gb, 0, 0, n.cores});
    }
    std::deque<QueuedTask> queue;
    for (std::uint64_t t = 0; t < 12; ++t) {
      QueuedTask qt = q(t, 0.5 + 70.0 * u(rng) * u(rng), 0.05 + 0.45 * u(rng));
      qt.isolation_only = u(rng) < 0.1;
      queue.push_back(qt);
    }
    const std::vector<QueuedTask> snapshot(queue.begin(), queue.end());
    const Policy policy = trial % 2 ? Policy::MoE : Policy::Oracle;
    const auto placed = dispatch(queue, nodes, policy, 0.0);
    const auto want = first_fit_reference(snapshot, ref);
    REQUIRE(placed.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(placed[i].task_id == want[i].task);
      CHECK(placed[i].node_id == want[i].node);
      CHECK(placed[i].allocation_gb == want[i].allocation);
    }
    for (const auto& n : nodes) {
      CHECK(n.allocated_memory_gb <= n.physical_memory_gb + 1e-9);
      CHECK(n.cpu_load <= 1.0 + 1e-9);
      int threads = 0;
      for (const auto& r : n.running) {
        threads += r.threads;
        CHECK(r.threads >= 1);
      }
      if (!n.running.empty()) CHECK(threads == n.cores);
    }
  }
}

TEST_CASE("completion frees resources and places waiting work") {
  auto nodes = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 34, 0.2), q(1, 30, 0.2), q(2, 30, 0.2)};
  CHECK(dispatch(queue, nodes, Policy::MoE, 0.0).size() == 2);
  const auto placed = on_completion(0, nodes, queue, Policy::MoE, 5.0);
  REQUIRE(placed.size() == 1);
  CHECK(placed[0].task_id == 2);
  CHECK(placed[0].start_time == 5.0);
  CHECK(nodes[0].running[0].threads == 8);
  CHECK(nodes[0].running[1].threads == 8);
  CHECK_THROWS_AS(on_completion(99, nodes, queue, Policy::MoE, 6.0), Error);
  try {
    release(99, nodes);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateError);
  }
}

TEST_CASE("an out-of-memory task goes back to the front, isolation-only") {
  auto nodes = make_nodes(1, 64.0, 16);
  std::deque<QueuedTask> queue{q(0, 10, 0.2), q(1, 10, 0.2), q(2, 60, 0.2)};
  CHECK(dispatch(queue, nodes, Policy::MoE, 0.0).size() == 2);
  CHECK(on_oom(1, nodes, queue, Policy::MoE, 60.0).empty());
  REQUIRE(queue.size() == 2);
  CHECK(queue.front().task_id == 1);
  CHECK(queue.front().isolation_only);
  CHECK(queue.front().requeued);
  const auto placed = on_completion(0, nodes, queue, Policy::MoE, 100.0);
  REQUIRE(placed.size() == 1);
  CHECK(placed[0].task_id == 1);
  CHECK(placed[0].isolated);
  CHECK(placed[0].allocation_gb == 64.0);
}

TEST_CASE("enqueue keeps arrival order behind re-queued tasks") {
  std::deque<QueuedTask> queue;
  enqueue(queue, q(5, 1, 0.1, 10.0));
  enqueue(queue, q(3, 1, 0.1, 5.0));
  enqueue(queue, q(4, 1, 0.1, 5.0));
  QueuedTask back = q(9, 1, 0.1, 20.0);
  back.requeued = true;
  queue.push_front(back);
  enqueue(queue, q(1, 1, 0.1, 0.0));
  std::vector<std::uint64_t> ids;
  for (const auto& t : queue) ids.push_back(t.task_id);
  CHECK(ids == std::vector<std::uint64_t>{9, 1, 3, 4, 5});
}

TEST_CASE("policy names round-trip") {
  for (Policy p : {Policy::Isolation, Policy::SimpleColocation, Policy::MoE, Policy::Oracle}) {
    CHECK(policy_from_string(to_string(p)) == p);
  }
  CHECK_THROWS_AS(policy_from_string("greedy"), Error);
}
