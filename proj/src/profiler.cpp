#include "moeco/profiler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "moeco/error.hpp"
#include "moeco/rng.hpp"

namespace moeco {

SimulatedProfiler::SimulatedProfiler(FeatureSchema schema, std::span<const Task> tasks,
                                     double noise, std::uint64_t seed)
    : schema_(std::move(schema)), tasks_(tasks.begin(), tasks.end()), noise_(noise), seed_(seed) {
  for (std::size_t i = 0; i < tasks_.size(); ++i) by_id_[tasks_[i].id()] = i;
}

const Task& SimulatedProfiler::find(const TaskSubmission& task) const {
  auto it = by_id_.find(task.id);
  if (it == by_id_.end()) {
    throw Error(ErrorCode::StateError, "profiler knows no task " + std::to_string(task.id));
  }
  return tasks_[it->second];
}

double SimulatedProfiler::sweep_config(double footprint_gb) {
  for (double c : kSweepGb) {
    if (c >= footprint_gb) return c;
  }
  return kSweepGb.back();
}

ProfileSample SimulatedProfiler::profile(const TaskSubmission& submission,
                                         double sample_gb) const {
  const Task& task = find(submission);
  const double input = task.submission.input_gb;
  if (!(sample_gb > 0.0) || sample_gb > input * (1.0 + 1e-12)) {
    throw Error(ErrorCode::DomainError, "sample size " + std::to_string(sample_gb) +
                                            " GB outside (0, " + std::to_string(input) + "]");
  }

  Rng rng(splitmix64(derive_seed(seed_, "profiler", task.id()) ^
                     std::bit_cast<std::uint64_t>(sample_gb)));
  std::normal_distribution<double> normal;

  ProfileSample s;
  std::vector<double> observed = task.latent_features;
  for (auto& v : observed) v *= 1.0 + noise_ * normal(rng);
  s.features = FeatureVector(schema_, std::move(observed));

  // The sweep settles on the first configuration that does not page; the
  // footprint reported is the peak resident size seen in that run.
  const double footprint = eval(task.ground_truth, sample_gb);
  s.config_gb = sweep_config(footprint);
  s.memory_gb = footprint * (1.0 + noise_ * normal(rng));

  s.cpu_load = task.cpu_load;
  s.wall_seconds =
      std::clamp(task.base_runtime * sample_gb / input, kMinWallSeconds, kMaxWallSeconds);
  return s;
}

}  // namespace moeco
