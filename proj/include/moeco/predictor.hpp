#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "moeco/experts.hpp"
#include "moeco/features.hpp"
#include "moeco/registry.hpp"

namespace moeco {

// What the runtime sees of an incoming application.
struct TaskSubmission {
  std::uint64_t id = 0;
  std::string name;
  std::string checksum;
  double input_gb = 0.0;
  double arrival = 0.0;
};

struct ProfileSample {
  FeatureVector features;
  double memory_gb = 0.0;
  double cpu_load = 0.0;
  double wall_seconds = 0.0;
  double config_gb = 0.0;  // memory configuration the footprint was measured under, if any
};

// Runs a task on a slice of its input and reports what was observed. Must be
// deterministic for a fixed (task, sample size) pair.
class Profiler {
 public:
  virtual ~Profiler() = default;
  virtual ProfileSample profile(const TaskSubmission& task, double sample_gb) const = 0;
};

struct PredictorConfig {
  double profile_size_gb = 0.2;
  std::array<double, 2> calib_fractions{0.05, 0.10};
  std::vector<double> new_function_fractions{0.05, 0.10, 0.20, 0.40};
  double profile_floor_gb = 0.05;
  double headroom = 0.0;  // fractional over-provisioning, 0.1 = +10%
};

enum class PredictionSource { ChecksumHit, KnnExpert, NewFunction };

std::string to_string(PredictionSource s);

struct Prediction {
  std::uint64_t task_id = 0;
  double allocation_gb = 0.0;
  MemoryFunction function;
  PredictionSource source = PredictionSource::NewFunction;
  std::uint64_t expert_id = 0;  // record whose family was reused (KnnExpert) or matched (ChecksumHit)
  double expert_distance = 0.0;
  double cpu_load = 0.0;
  double profiling_cost = 0.0;  // seconds
};

struct PredictOutcome {
  Prediction prediction;
  Registry registry;  // input registry plus any record learned for this task
};

// Sample sizes used for two-point calibration of a task with `input_gb` of input.
std::array<double, 2> calibration_sizes(double input_gb, const PredictorConfig& config);

// Rounds a footprint up to the next 0.01 GB after applying headroom.
double round_allocation(double footprint_gb, double headroom);

PredictOutcome predict(const TaskSubmission& task, const Registry& registry,
                       const Profiler& profiler, const PredictorConfig& config = {});

}  // namespace moeco
