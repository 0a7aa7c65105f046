#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "moeco/predictor.hpp"
#include "moeco/workload.hpp"

namespace moeco {

// Stands in for running an application on a slice of its input. Observations
// are the task's hidden behaviour plus seeded relative noise; the noise for a
// given (task, sample size) pair is fixed by the seed, independent of call order.
class SimulatedProfiler : public Profiler {
 public:
  // Memory configurations tried per sample: 1 GB, then 4 GB steps up to 32 GB.
  static constexpr std::array<double, 9> kSweepGb{1, 4, 8, 12, 16, 20, 24, 28, 32};
  static constexpr double kMinWallSeconds = 10.0;
  static constexpr double kMaxWallSeconds = 120.0;

  SimulatedProfiler(FeatureSchema schema, std::span<const Task> tasks, double noise,
                    std::uint64_t seed);

  ProfileSample profile(const TaskSubmission& task, double sample_gb) const override;

  // Smallest swept configuration that runs without paging; the largest one
  // when none suffices.
  static double sweep_config(double footprint_gb);

 private:
  const Task& find(const TaskSubmission& task) const;

  FeatureSchema schema_;
  std::vector<Task> tasks_;
  std::unordered_map<std::uint64_t, std::size_t> by_id_;
  double noise_;
  std::uint64_t seed_;
};

}  // namespace moeco
