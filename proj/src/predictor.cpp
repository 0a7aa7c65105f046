#include "moeco/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "moeco/error.hpp"

namespace moeco {

std::string to_string(PredictionSource s) {
  switch (s) {
    case PredictionSource::ChecksumHit: return "checksum_hit";
    case PredictionSource::KnnExpert: return "knn_expert";
    case PredictionSource::NewFunction: return "new_function";
  }
  return "unknown";
}

std::array<double, 2> calibration_sizes(double input_gb, const PredictorConfig& config) {
  const double floor = std::min(config.profile_floor_gb, input_gb);
  double x1 = std::clamp(config.calib_fractions[0] * input_gb, floor, input_gb);
  double x2 = std::clamp(config.calib_fractions[1] * input_gb, floor, input_gb);
  if (x1 > x2) std::swap(x1, x2);
  if (x1 == x2) {
    x2 = std::min(input_gb, std::max(2.0 * x1, x1 + floor));
    if (x1 == x2) x1 = 0.5 * x2;
  }
  return {x1, x2};
}

double round_allocation(double footprint_gb, double headroom) {
  const double scaled = footprint_gb * (1.0 + headroom);
  // The small bias keeps values that are already on the 0.01 grid from being
  // pushed up a step by representation error.
  const double cents = std::ceil(scaled * 100.0 - 1e-7);
  return std::max(0.01, cents / 100.0);
}

namespace {

std::vector<double> new_function_sizes(double input_gb, const PredictorConfig& config) {
  const double floor = std::min(config.profile_floor_gb, input_gb);
  std::vector<double> sizes;
  for (double f : config.new_function_fractions) {
    sizes.push_back(std::clamp(f * input_gb, floor, input_gb));
  }
  for (double f : {0.25, 0.5, 1.0}) {
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.size() >= 3) break;
    sizes.push_back(f * input_gb);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return sizes;
}

}  // namespace

PredictOutcome predict(const TaskSubmission& task, const Registry& registry,
                       const Profiler& profiler, const PredictorConfig& config) {
  if (!(task.input_gb > 0.0)) {
    throw Error(ErrorCode::DomainError, "task input size must be positive");
  }

  Prediction pred;
  pred.task_id = task.id;
  double cost = 0.0;
  auto run = [&](int step, double size) {
    try {
      ProfileSample s = profiler.profile(task, size);
      cost += s.wall_seconds;
      return s;
    } catch (const Error& e) {
      throw PredictionError(step, e.message());
    }
  };

  // (1) Known binary with instantiated coefficients: nothing to profile.
  const TrainingRecord* hit = registry.lookup_checksum(task.checksum);
  if (hit != nullptr && hit->calibrated) {
    pred.source = PredictionSource::ChecksumHit;
    pred.function = hit->function;
    pred.expert_id = hit->id;
    pred.cpu_load = std::clamp(hit->cpu_load, 0.0, 1.0);
    pred.allocation_gb = round_allocation(eval(pred.function, task.input_gb), config.headroom);
    return {pred, registry};
  }

  // (2) Feature extraction on a small slice of the input.
  const ProfileSample features = run(2, std::min(config.profile_size_gb, task.input_gb));
  pred.cpu_load = std::clamp(features.cpu_load, 0.0, 1.0);

  // (3) Expert selection in PC space.
  FeatureVector pc;
  std::optional<Family> family;
  if (hit != nullptr) {
    family = hit->function.family;
    pred.expert_id = hit->id;
    pc = hit->pc_features;
  } else {
    try {
      pc = registry.to_pc_space(features.features);
      if (!registry.empty()) {
        const ExpertChoice choice = registry.select_expert(pc);
        pred.expert_distance = choice.nearest.distance;
        if (choice.selected()) {
          const auto& rec = registry.records()[choice.nearest.index];
          family = rec.function.family;
          pred.expert_id = rec.id;
        }
      }
    } catch (const Error& e) {
      throw PredictionError(3, e.message());
    }
  }

  // (4) Two-point calibration of the chosen family.
  std::vector<Point> measured;
  std::optional<MemoryFunction> fn;
  if (family) {
    const auto sizes = calibration_sizes(task.input_gb, config);
    for (double x : sizes) measured.push_back({x, run(4, x).memory_gb});
    try {
      fn = calibrate(*family, measured[0], measured[1]);
      pred.source = hit != nullptr ? PredictionSource::ChecksumHit : PredictionSource::KnnExpert;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unsolvable && e.code() != ErrorCode::DomainError &&
          e.code() != ErrorCode::DegenerateInput) {
        throw PredictionError(4, e.message());
      }
    }
  }

  // (5) No usable expert: learn a new function from a small input sweep.
  if (!fn) {
    for (double x : new_function_sizes(task.input_gb, config)) {
      const bool have = std::any_of(measured.begin(), measured.end(),
                                    [x](const Point& p) { return p.x == x; });
      if (!have) measured.push_back({x, run(5, x).memory_gb});
    }
    try {
      fn = select_best_fit(measured).winner.function;
    } catch (const Error& e) {
      throw PredictionError(5, e.message());
    }
    pred.source = PredictionSource::NewFunction;
  }
  pred.function = *fn;
  pred.profiling_cost = cost;

  Registry updated = registry;
  if (hit != nullptr) {
    updated = registry.with_function(static_cast<std::size_t>(hit - registry.records().data()), *fn);
  } else {
    TrainingRecord rec;
    rec.name = task.name;
    rec.checksum = task.checksum;
    rec.raw_features = features.features;
    rec.pc_features = pc;
    rec.function = *fn;
    rec.calibrated = true;
    rec.cpu_load = pred.cpu_load;
    try {
      updated = registry.with_record(std::move(rec));
    } catch (const Error& e) {
      throw PredictionError(5, e.message());
    }
  }

  // (6) Footprint at the full input size.
  try {
    pred.allocation_gb = round_allocation(eval(pred.function, task.input_gb), config.headroom);
  } catch (const Error& e) {
    throw PredictionError(6, e.message());
  }
  return {pred, std::move(updated)};
}

}  // namespace moeco
