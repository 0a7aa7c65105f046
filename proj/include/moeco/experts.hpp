#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace moeco {

// The memory-function families. Adding a family means extending this enum and
// the switch statements in experts.cpp; nothing else dispatches on it.
enum class Family { PowerLaw, Exponential, NapierianLog };

inline constexpr std::array<Family, 3> kAllFamilies{Family::PowerLaw, Family::Exponential,
                                                    Family::NapierianLog};

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Memory footprint (GB) as a function of input size x (GB):
//   PowerLaw      y = m * x^b
//   Exponential   y = m * (1 - e^(-b x))
//   NapierianLog  y = m + b * ln(x)
struct MemoryFunction {
  Family family = Family::PowerLaw;
  double m = 0.0;
  double b = 0.0;

  bool operator==(const MemoryFunction&) const = default;
};

// Throws DomainError when the coefficients violate the family's invariants.
void validate(const MemoryFunction& f);

double eval(const MemoryFunction& f, double x);

// Smallest x with eval(f, x) >= y, for increasing functions. Throws
// DomainError when y is not attainable (e.g. y >= m for Exponential).
double inverse(const MemoryFunction& f, double y);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

MemoryFunction calibrate(Family family, Point p1, Point p2);

struct FitReport {
  MemoryFunction function;
  double rmse = 0.0;
  std::size_t points_used = 0;
};

FitReport fit_least_squares(Family family, std::span<const Point> points);

struct BestFit {
  FitReport winner;
  std::vector<FitReport> reports;  // families that could be fitted, in family order
};

BestFit select_best_fit(std::span<const Point> points);

double rmse(const MemoryFunction& f, std::span<const Point> points);

}  // namespace moeco
