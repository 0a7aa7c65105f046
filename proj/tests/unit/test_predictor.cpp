#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "moeco/error.hpp"
#include "moeco/predictor.hpp"
#include "moeco/profiler.hpp"
#include "moeco/worked_example.hpp"

using namespace moeco;

namespace {

// Reports points on a fixed curve with fixed features; counts calls.
class CurveProfiler : public Profiler {
 public:
  CurveProfiler(FeatureSchema schema, std::vector<double> features, MemoryFunction truth)
      : schema_(std::move(schema)), features_(std::move(features)), truth_(truth) {}

  ProfileSample profile(const TaskSubmission& task, double sample_gb) const override {
    ++calls;
    sizes.push_back(sample_gb);
    if (fail_at_call == calls) throw Error(ErrorCode::StateError, "profiler crashed");
    ProfileSample s{FeatureVector(schema_, features_), eval(truth_, sample_gb), 0.3,
                    std::clamp(1000.0 * sample_gb / task.input_gb, 10.0, 120.0), 0.0};
    return s;
  }

  mutable int calls = 0;
  mutable std::vector<double> sizes;
  int fail_at_call = -1;

 private:
  FeatureSchema schema_;
  std::vector<double> features_;
  MemoryFunction truth_;
};

TaskSubmission submission(std::uint64_t id, const std::string& checksum, double input) {
  return {id, "t" + std::to_string(id), checksum, input, 0.0};
}

}  // namespace

TEST_CASE("allocation rounding") {
  CHECK(round_allocation(5.675, 0.0) == 5.68);
  CHECK(round_allocation(5.68, 0.0) == 5.68);
  CHECK(round_allocation(5.6800001, 0.0) == 5.69);
  CHECK(round_allocation(31.995, 0.0) == 32.0);
  CHECK(round_allocation(10.0, 0.1) == 11.0);
  CHECK(round_allocation(0.0001, 0.0) == 0.01);
}

TEST_CASE("calibration sizes follow the input fractions with a floor") {
  PredictorConfig c;
  auto s = calibration_sizes(279.0, c);
  CHECK(s[0] == doctest::Approx(13.95));
  CHECK(s[1] == doctest::Approx(27.9));
  s = calibration_sizes(0.3, c);
  CHECK(s[0] == 0.05);
  CHECK(s[1] > s[0]);
  s = calibration_sizes(0.05, c);
  CHECK(s[0] < s[1]);
  CHECK(s[1] <= 0.05);
}

TEST_CASE("worked example: expert choice and allocations") {
  const WorkedExample ex = build_worked_example_fixture();
  const SimulatedProfiler profiler(ex.schema, ex.tasks, 0.0, 1);
  const std::vector<std::string> experts{"Sort", "Sort", "PageRank"};
  const std::vector<Family> families{Family::Exponential, Family::Exponential, Family::NapierianLog};
  const std::vector<double> allocations{5.68, 5.76, 32.00};
  for (std::size_t i = 0; i < 3; ++i) {
    const PredictOutcome out = predict(ex.tasks[i].submission, ex.registry, profiler);
    const Prediction& p = out.prediction;
    CHECK(p.source == PredictionSource::KnnExpert);
    CHECK(ex.registry.records()[p.expert_id].name == experts[i]);
    CHECK(p.function.family == families[i]);
    CHECK(p.allocation_gb == doctest::Approx(allocations[i]).epsilon(1e-12));
    CHECK(p.expert_distance <= 1.0);
    CHECK(out.registry.records().size() == 3);
  }
  // The fixture's features are the normalized table values verbatim.
  CHECK(ex.tasks[0].latent_features == std::vector<double>{-0.13, 0.12, 0.18, 0.10, 0.10});
  CHECK(ex.tasks[1].latent_features == std::vector<double>{-0.68, 0.48, -0.51, 0.44, -0.65});
  CHECK(ex.tasks[2].latent_features == std::vector<double>{1.32, -0.51, 0.08, -0.72, 0.43});
  CHECK(ex.schema.names == std::vector<std::string>{"in", "cs", "r", "bo", "cm"});
}

TEST_CASE("profiling cost covers feature extraction and both calibration runs") {
  const WorkedExample ex = build_worked_example_fixture();
  const SimulatedProfiler profiler(ex.schema, ex.tasks, 0.0, 1);
  // Wordcount: 1200 s task, samples of 0.2, 13.95 and 27.9 GB of 279 GB.
  const Prediction p = predict(ex.tasks[0].submission, ex.registry, profiler).prediction;
  const double want = std::clamp(1200.0 * 0.2 / 279.0, 10.0, 120.0) +
                      std::clamp(1200.0 * 13.95 / 279.0, 10.0, 120.0) +
                      std::clamp(1200.0 * 27.9 / 279.0, 10.0, 120.0);
  CHECK(p.profiling_cost == doctest::Approx(want));
  CHECK(p.profiling_cost > 0.0);
}

TEST_CASE("a second submission of the same binary hits the checksum cache") {
  const WorkedExample ex = build_worked_example_fixture();
  const SimulatedProfiler profiler(ex.schema, ex.tasks, 0.0, 1);
  const PredictOutcome first = predict(ex.tasks[1].submission, ex.registry, profiler);
  const PredictOutcome second = predict(ex.tasks[1].submission, first.registry, profiler);
  CHECK(second.prediction.source == PredictionSource::ChecksumHit);
  CHECK(second.prediction.profiling_cost == 0.0);
  CHECK(second.prediction.allocation_gb == first.prediction.allocation_gb);
  CHECK(second.registry == first.registry);
}

TEST_CASE("perfect registry gives near-exact allocations") {
  const WorkedExample ex = build_worked_example_fixture();
  const MemoryFunction sort{Family::Exponential, 5.768, 4.479};
  // Features right on the Sort record.
  CurveProfiler prof(ex.schema, ex.registry.records()[0].raw_features.values(), sort);
  for (double input : {0.3, 0.8, 2.0, 30.0}) {
    const Prediction p =
        predict(submission(9, "abcdefabcdefabcdefabcdefabcdef00", input), ex.registry, prof).prediction;
    CHECK(p.source == PredictionSource::KnnExpert);
    CHECK(std::abs(p.allocation_gb - eval(sort, input)) <= 0.01 + 1e-4 * eval(sort, input));
    CHECK(p.function.m == doctest::Approx(5.768).epsilon(1e-4));
    CHECK(p.function.b == doctest::Approx(4.479).epsilon(1e-4));
  }
  const MemoryFunction pr{Family::NapierianLog, 16.333, 1.79};
  CurveProfiler prof2(ex.schema, ex.registry.records()[1].raw_features.values(), pr);
  const Prediction p =
      predict(submission(9, "abcdefabcdefabcdefabcdefabcdef01", 700.0), ex.registry, prof2).prediction;
  CHECK(p.function.m == doctest::Approx(16.333).epsilon(1e-6));
  CHECK(p.function.b == doctest::Approx(1.79).epsilon(1e-6));
}

TEST_CASE("far-away programs get a new function appended to the registry") {
  const WorkedExample ex = build_worked_example_fixture();
  const MemoryFunction truth{Family::PowerLaw, 2.0, 0.5};
  CurveProfiler prof(ex.schema, {5, 5, 5, 5, 5}, truth);
  const PredictOutcome out =
      predict(submission(4, "99999999999999999999999999999999", 100.0), ex.registry, prof);
  CHECK(out.prediction.source == PredictionSource::NewFunction);
  CHECK(out.prediction.function.family == Family::PowerLaw);
  CHECK(out.prediction.function.m == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(out.prediction.allocation_gb == doctest::Approx(20.0).epsilon(1e-3));
  CHECK(out.prediction.expert_distance > 1.0);
  REQUIRE(out.registry.records().size() == 3);
  const TrainingRecord& added = out.registry.records().back();
  CHECK(added.id == 2);
  CHECK(added.checksum == "99999999999999999999999999999999");
  CHECK(added.raw_features.values() == std::vector<double>{5, 5, 5, 5, 5});
  CHECK(prof.calls == 5);  // features plus four sweep sizes
}

TEST_CASE("a family that cannot calibrate falls back to a new function") {
  const WorkedExample ex = build_worked_example_fixture();
  // Near Sort (exponential), but the curve is linear: no exponential passes
  // through both calibration points.
  const MemoryFunction linear{Family::PowerLaw, 0.1, 1.0};
  CurveProfiler prof(ex.schema, ex.registry.records()[0].raw_features.values(), linear);
  const Prediction p =
      predict(submission(5, "88888888888888888888888888888888", 200.0), ex.registry, prof).prediction;
  CHECK(p.source == PredictionSource::NewFunction);
  CHECK(p.function.family == Family::PowerLaw);
  CHECK(p.allocation_gb == doctest::Approx(20.0).epsilon(1e-3));
}

TEST_CASE("profiler failures surface as prediction errors with the step") {
  const WorkedExample ex = build_worked_example_fixture();
  CurveProfiler prof(ex.schema, ex.registry.records()[0].raw_features.values(),
                     {Family::Exponential, 5.768, 4.479});
  for (int call : {1, 2}) {
    prof.calls = 0;
    prof.fail_at_call = call;
    try {
      predict(submission(6, "77777777777777777777777777777777", 10.0), ex.registry, prof);
      FAIL("expected PredictionError");
    } catch (const PredictionError& e) {
      CHECK(e.code() == ErrorCode::PredictionError);
      CHECK(e.step() == (call == 1 ? 2 : 4));
    }
  }
  prof.fail_at_call = -1;
  CHECK_THROWS_AS(predict(submission(6, "77777777777777777777777777777777", 0.0), ex.registry, prof),
                  Error);
}

TEST_CASE("allocations never shrink as inputs grow") {
  const WorkedExample ex = build_worked_example_fixture();
  CurveProfiler prof(ex.schema, ex.registry.records()[1].raw_features.values(),
                     {Family::NapierianLog, 16.333, 1.79});
  double prev = 0;
  for (double input = 1.0; input < 2000; input *= 1.7) {
    const double a =
        predict(submission(7, "66666666666666666666666666666666", input), ex.registry, prof)
            .prediction.allocation_gb;
    CHECK(a >= prev);
    prev = a;
  }
}

TEST_CASE("headroom over-provisions the rounded allocation") {
  const WorkedExample ex = build_worked_example_fixture();
  const SimulatedProfiler profiler(ex.schema, ex.tasks, 0.0, 1);
  PredictorConfig c;
  c.headroom = 0.1;
  const Prediction p = predict(ex.tasks[2].submission, ex.registry, profiler, c).prediction;
  CHECK(p.allocation_gb == doctest::Approx(round_allocation(31.995 * 1.1, 0.0)).epsilon(1e-9));
}
