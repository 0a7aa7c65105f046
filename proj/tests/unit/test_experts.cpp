#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "moeco/error.hpp"
#include "moeco/experts.hpp"

using namespace moeco;

namespace {

const MemoryFunction kSort{Family::Exponential, 5.768, 4.479};
const MemoryFunction kPageRank{Family::NapierianLog, 16.333, 1.79};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::StateError;
}

std::vector<Point> sample(const MemoryFunction& f, std::vector<double> xs) {
  std::vector<Point> pts;
  for (double x : xs) pts.push_back({x, eval(f, x)});
  return pts;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("evaluation follows each family's formula") {
  CHECK(eval(kPageRank, 1.0) == 16.333);
  CHECK(eval(kSort, 1.0) == doctest::Approx(5.768 * (1.0 - std::exp(-4.479))));
  CHECK(eval(kSort, 1.0) == doctest::Approx(5.70256).epsilon(1e-5));
  CHECK(eval({Family::PowerLaw, 2.0, 1.0}, 3.0) == 6.0);
  CHECK(code_of([] { eval(kSort, 0.0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { eval(kPageRank, -1.0); }) == ErrorCode::DomainError);
}

TEST_CASE("coefficient invariants") {
  CHECK_NOTHROW(validate(kSort));
  CHECK_NOTHROW(validate({Family::NapierianLog, -3.0, 0.5}));
  CHECK(code_of([] { validate({Family::PowerLaw, 0.0, 1.0}); }) == ErrorCode::DomainError);
  CHECK(code_of([] { validate({Family::Exponential, 1.0, -0.1}); }) == ErrorCode::DomainError);
  CHECK(code_of([] { validate({Family::Exponential, -1.0, 0.1}); }) == ErrorCode::DomainError);
}

TEST_CASE("families are strictly increasing in x") {
  const std::vector<MemoryFunction> fs{kSort, kPageRank, {Family::PowerLaw, 2.0, 0.4}};
  for (const auto& f : fs) {
    double prev = eval(f, 0.01);
    for (double x = 0.02; x < 6.0; x *= 1.3) {
      const double y = eval(f, x);
      CHECK(y > prev);
      prev = y;
    }
  }
}

TEST_CASE("inverse finds where the curve reaches a footprint") {
  for (const auto& f : {kPageRank, MemoryFunction{Family::PowerLaw, 2.0, 0.4}, kSort}) {
    const double x = inverse(f, eval(f, 0.37));
    CHECK(x == doctest::Approx(0.37).epsilon(1e-9));
  }
  CHECK(code_of([] { inverse(kSort, 6.0); }) == ErrorCode::DomainError);
}

TEST_CASE("family names round-trip") {
  for (Family f : kAllFamilies) CHECK(family_from_string(to_string(f)) == f);
  CHECK(code_of([] { family_from_string("cubic"); }) == ErrorCode::ParseError);
}

TEST_CASE("two-point calibration examples") {
  const MemoryFunction nl =
      calibrate(Family::NapierianLog, {1.0, 16.333}, {std::exp(1.0), eval(kPageRank, std::exp(1.0))});
  CHECK(nl.m == doctest::Approx(16.333).epsilon(1e-12));
  CHECK(nl.b == doctest::Approx(1.79).epsilon(1e-12));

  const MemoryFunction pl = calibrate(Family::PowerLaw, {1, 2}, {2, 4});
  CHECK(pl.m == doctest::Approx(2.0));
  CHECK(pl.b == doctest::Approx(1.0));

  const MemoryFunction ex =
      calibrate(Family::Exponential, {0.1, eval(kSort, 0.1)}, {0.5, eval(kSort, 0.5)});
  CHECK(rel(ex.m, 5.768) <= 1e-4);
  CHECK(rel(ex.b, 4.479) <= 1e-4);
  // Point order does not matter.
  const MemoryFunction swapped =
      calibrate(Family::Exponential, {0.5, eval(kSort, 0.5)}, {0.1, eval(kSort, 0.1)});
  CHECK(swapped.b == doctest::Approx(ex.b).epsilon(1e-12));
}

TEST_CASE("calibration passes through both points") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const Family fam = kAllFamilies[i % 3];
    const double x1 = 0.1 + 5.0 * u(rng);
    const double x2 = x1 * (1.2 + u(rng));
    MemoryFunction truth{fam, 1.0 + 20.0 * u(rng), 0.1 + u(rng)};
    const MemoryFunction got = calibrate(fam, {x1, eval(truth, x1)}, {x2, eval(truth, x2)});
    CHECK(rel(eval(got, x1), eval(truth, x1)) <= 1e-6);
    CHECK(rel(eval(got, x2), eval(truth, x2)) <= 1e-6);
  }
}

TEST_CASE("calibration errors") {
  CHECK(code_of([] { calibrate(Family::PowerLaw, {1, 2}, {1, 3}); }) == ErrorCode::DegenerateInput);
  CHECK(code_of([] { calibrate(Family::PowerLaw, {1, -2}, {2, 3}); }) == ErrorCode::DomainError);
  CHECK(code_of([] { calibrate(Family::Exponential, {1, 0}, {2, 3}); }) == ErrorCode::DomainError);
  CHECK(code_of([] { calibrate(Family::NapierianLog, {0, 1}, {2, 3}); }) == ErrorCode::DomainError);
  // Ratio y1/y2 must fall inside (x1/x2, 1) for an exponential curve.
  CHECK(code_of([] { calibrate(Family::Exponential, {1, 1}, {2, 3}); }) == ErrorCode::Unsolvable);
  CHECK(code_of([] { calibrate(Family::Exponential, {1, 3}, {2, 3}); }) == ErrorCode::Unsolvable);
  CHECK(code_of([] { calibrate(Family::Exponential, {1, 4}, {2, 3}); }) == ErrorCode::Unsolvable);
  // NapierianLog accepts any footprints, including a falling pair.
  CHECK(calibrate(Family::NapierianLog, {1, 3}, {2, 2}).b < 0.0);
}

TEST_CASE("least squares recovers noiseless in-family data") {
  const FitReport nl = fit_least_squares(Family::NapierianLog, sample(kPageRank, {1, 2, 4, 8}));
  CHECK(rel(nl.function.m, 16.333) <= 1e-6);
  CHECK(rel(nl.function.b, 1.79) <= 1e-6);
  CHECK(nl.rmse <= 1e-9);
  CHECK(nl.points_used == 4);

  const FitReport pl =
      fit_least_squares(Family::PowerLaw, sample({Family::PowerLaw, 3.0, 0.5}, {1, 4, 9, 16}));
  CHECK(rel(pl.function.m, 3.0) <= 1e-6);
  CHECK(rel(pl.function.b, 0.5) <= 1e-6);
  CHECK(pl.rmse <= 1e-8);

  const FitReport ex =
      fit_least_squares(Family::Exponential, sample(kSort, {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}));
  CHECK(rel(ex.function.m, 5.768) <= 1e-6);
  CHECK(rel(ex.function.b, 4.479) <= 1e-6);
  CHECK(ex.rmse <= 1e-8);
}

TEST_CASE("flat data fits a zero-slope log curve") {
  const std::vector<Point> flat{{1, 7}, {2, 7}, {5, 7}};
  const FitReport r = fit_least_squares(Family::NapierianLog, flat);
  CHECK(std::abs(r.function.b) <= 1e-12);
  CHECK(r.function.m == doctest::Approx(7.0));
}

TEST_CASE("least-squares errors") {
  CHECK(code_of([] { fit_least_squares(Family::PowerLaw, std::vector<Point>{{1, 1}, {2, 2}}); }) ==
        ErrorCode::InsufficientData);
  CHECK(code_of([] {
          fit_least_squares(Family::NapierianLog, std::vector<Point>{{2, 1}, {2, 2}, {2, 3}});
        }) == ErrorCode::Unsolvable);
  CHECK(code_of([] {
          fit_least_squares(Family::PowerLaw, std::vector<Point>{{1, 1}, {2, -2}, {3, 3}});
        }) == ErrorCode::Unsolvable);
}

TEST_CASE("RMSE is measured on the original scale") {
  const std::vector<Point> pts{{1, 2}, {2, 4.5}, {4, 7.5}};
  const FitReport r = fit_least_squares(Family::PowerLaw, pts);
  double sse = 0;
  for (const auto& p : pts) sse += std::pow(p.y - eval(r.function, p.x), 2);
  CHECK(r.rmse == doctest::Approx(std::sqrt(sse / 3.0)).epsilon(1e-12));
  CHECK(rmse(r.function, pts) == doctest::Approx(r.rmse).epsilon(1e-12));
}

TEST_CASE("best fit picks the generating family") {
  CHECK(select_best_fit(sample(kSort, {0.05, 0.1, 0.2, 0.4, 0.8, 1.6})).winner.function.family ==
        Family::Exponential);
  CHECK(select_best_fit(sample(kPageRank, {0.3, 1, 3, 10, 30, 100})).winner.function.family ==
        Family::NapierianLog);
  const BestFit line = select_best_fit(std::vector<Point>{{1, 2}, {2, 4}, {3, 6}});
  CHECK(line.winner.function.family == Family::PowerLaw);
  CHECK(line.reports.size() == 3);
}

TEST_CASE("winner has the minimal rmse and is order independent") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<Point> pts;
  for (double x : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back({x, eval(kPageRank, x) * (1 + noise(rng))});
  const BestFit a = select_best_fit(pts);
  for (const auto& r : a.reports) CHECK(a.winner.rmse <= r.rmse);
  std::shuffle(pts.begin(), pts.end(), rng);
  const BestFit b = select_best_fit(pts);
  CHECK(a.winner.function == b.winner.function);
  CHECK(a.winner.rmse == b.winner.rmse);
}

TEST_CASE("best fit fails only when every family does") {
  // Negative footprints rule out the power law but not the log curve.
  const std::vector<Point> pts{{1, -1}, {2, 0}, {4, 1}};
  const BestFit r = select_best_fit(pts);
  CHECK(r.winner.function.family == Family::NapierianLog);
  CHECK(code_of([] { select_best_fit(std::vector<Point>{{3, 1}, {3, 2}, {3, 3}}); }) ==
        ErrorCode::Unsolvable);
}
