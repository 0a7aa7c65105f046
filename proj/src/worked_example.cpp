#include "moeco/worked_example.hpp"

#include <cmath>

namespace moeco {

WorkedExample build_worked_example_fixture() {
  WorkedExample ex;
  ex.schema.names = {"in", "cs", "r", "bo", "cm"};
  const std::size_t dim = ex.schema.dimension();
  const std::string sid = ex.schema.id();
  const FeatureSchema pcs = FeatureSchema::principal_components(dim);

  ScalingParams scaling;
  scaling.mode = ScalingMode::MinMax;
  scaling.schema_id = sid;
  scaling.lo.assign(dim, 0.0);
  scaling.hi.assign(dim, 1.0);

  PcaModel pca;
  pca.input_schema_id = sid;
  pca.mean.assign(dim, 0.0);
  pca.components.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) pca.components[i * dim + i] = 1.0;
  pca.explained.assign(dim, 1.0 / static_cast<double>(dim));
  pca.variance_target = 0.95;
  pca.k = dim;

  auto record = [&](std::uint64_t id, std::string name, std::string checksum,
                    std::vector<double> features, MemoryFunction fn, double cpu) {
    TrainingRecord r;
    r.id = id;
    r.name = std::move(name);
    r.checksum = std::move(checksum);
    r.raw_features = FeatureVector(ex.schema, features);
    r.pc_features = FeatureVector(pcs, features);
    r.function = fn;
    r.cpu_load = cpu;
    return r;
  };

  // Sort-like sits between Wordcount and TeraSort, PageRank-like next to Kmeans.
  std::vector<TrainingRecord> records;
  records.push_back(record(0, "Sort", "5a0b6c1d2e3f40516273849aabbccdd1",
                           {-0.405, 0.30, -0.165, 0.27, -0.275},
                           {Family::Exponential, 5.768, 4.479}, 0.3));
  records.push_back(record(1, "PageRank", "7f1e2d3c4b5a69788796a5b4c3d2e1f0",
                           {1.2, -0.4, 0.1, -0.6, 0.4}, {Family::NapierianLog, 16.333, 1.79},
                           0.3));
  ex.registry = Registry(ex.schema, scaling, pca, std::move(records), 1.0);

  auto task = [&](std::uint64_t id, std::string name, std::string checksum, double arrival,
                  double input, MemoryFunction truth, double cpu, double runtime,
                  std::vector<double> features) {
    Task t;
    t.submission = {id, std::move(name), std::move(checksum), input, arrival};
    t.ground_truth = truth;
    t.cpu_load = cpu;
    t.base_runtime = runtime;
    t.latent_features = std::move(features);
    return t;
  };

  // Saturating curves reach 5.675 and 5.755 GB well before the full input;
  // the log curve is anchored so it passes through 31.995 GB at 512 GB.
  const double kmeans_m = 31.995 - 1.79 * std::log(512.0);
  ex.tasks.push_back(task(0, "Wordcount", "0123456789abcdef0123456789abcdef", 0.0, 279.0,
                          {Family::Exponential, 5.675, 0.1}, 0.3, 1200.0,
                          {-0.13, 0.12, 0.18, 0.10, 0.10}));
  ex.tasks.push_back(task(1, "TeraSort", "fedcba9876543210fedcba9876543210", 1.0, 30.0,
                          {Family::Exponential, 5.755, 1.0}, 0.35, 900.0,
                          {-0.68, 0.48, -0.51, 0.44, -0.65}));
  ex.tasks.push_back(task(2, "Kmeans", "00112233445566778899aabbccddeeff", 2.0, 512.0,
                          {Family::NapierianLog, kmeans_m, 1.79}, 0.3, 1500.0,
                          {1.32, -0.51, 0.08, -0.72, 0.43}));

  ex.cluster = ClusterConfig{1, 32.0, 16};
  return ex;
}

}  // namespace moeco
