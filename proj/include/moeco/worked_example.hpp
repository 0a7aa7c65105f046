#pragma once

#include <vector>

#include "moeco/registry.hpp"
#include "moeco/workload.hpp"

namespace moeco {

// Three-application scheduling scenario: Wordcount (279 GB), TeraSort (30 GB)
// and Kmeans (512 GB) arriving in that order at a single 32 GB node, with a
// two-expert registry holding a Sort-like and a PageRank-like program.
//
// Features are already normalized, so the registry's scaling and PCA are
// identity transforms. Ground-truth curves are chosen so that calibrated
// predictions come out at 5.68, 5.76 and 32.00 GB.
struct WorkedExample {
  FeatureSchema schema;  // in, cs, r, bo, cm
  Registry registry;
  std::vector<Task> tasks;
  ClusterConfig cluster;
};

WorkedExample build_worked_example_fixture();

}  // namespace moeco
