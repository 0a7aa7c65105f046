#include "moeco/experts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "moeco/error.hpp"

namespace moeco {

namespace {

constexpr double kExpBMin = 1e-9;
constexpr double kExpBMax = 1e4;
constexpr double kRatioTolerance = 1e-12;

// 1 - e^(-b x), accurate for small b x.
double saturation(double b, double x) { return -std::expm1(-b * x); }

void require_positive_x(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::DomainError, "input size must be positive and finite, got " +
                                            std::to_string(x));
  }
}

struct LineFit {
  double intercept;
  double slope;
};

// Ordinary least squares for v = intercept + slope * u.
LineFit fit_line(std::span<const double> u, std::span<const double> v) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  if (!(suu > 0.0)) {
    throw Error(ErrorCode::Unsolvable, "all sample sizes coincide; slope is unidentifiable");
  }
  const double slope = suv / suu;
  return {mv - slope * mu, slope};
}

// Closed-form amplitude for a fixed Exponential shape, and the resulting SSE.
std::pair<double, double> exponential_amplitude(std::span<const Point> pts, double b) {
  double sgg = 0.0, syg = 0.0;
  for (const auto& p : pts) {
    const double g = saturation(b, p.x);
    sgg += g * g;
    syg += p.y * g;
  }
  const double m = syg / sgg;
  double sse = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - m * saturation(b, p.x);
    sse += r * r;
  }
  return {m, sse};
}

FitReport fit_exponential(std::span<const Point> pts) {
  // Coarse scan in log(b), then golden-section refinement around the best cell.
  constexpr int kGrid = 481;
  const double lo = std::log(kExpBMin);
  const double hi = std::log(kExpBMax);
  const double step = (hi - lo) / (kGrid - 1);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double sse = exponential_amplitude(pts, std::exp(lo + i * step)).second;
    if (sse < best_sse) {
      best_sse = sse;
      best = i;
    }
  }

  auto objective = [&](double t) { return exponential_amplitude(pts, std::exp(t)).second; };
  double a = lo + std::max(0, best - 1) * step;
  double c = lo + std::min(kGrid - 1, best + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - inv_phi * (c - a);
  double x2 = a + inv_phi * (c - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && (c - a) > 1e-14; ++it) {
    if (f1 <= f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - inv_phi * (c - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (c - a);
      f2 = objective(x2);
    }
  }
  double t = 0.5 * (a + c);
  // The grid point may still beat the refined interior (flat objectives).
  if (objective(t) > best_sse) t = lo + best * step;

  const double b = std::exp(t);
  const auto [m, sse] = exponential_amplitude(pts, b);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorCode::Unsolvable, "exponential fit yields non-positive amplitude");
  }
  (void)sse;
  MemoryFunction f{Family::Exponential, m, b};
  return {f, rmse(f, pts), pts.size()};
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::PowerLaw: return "power_law";
    case Family::Exponential: return "exponential";
    case Family::NapierianLog: return "napierian_log";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::ParseError, "unknown memory function family '" + s + "'");
}

void validate(const MemoryFunction& f) {
  if (!std::isfinite(f.m) || !std::isfinite(f.b)) {
    throw Error(ErrorCode::DomainError, "memory function coefficients must be finite");
  }
  switch (f.family) {
    case Family::PowerLaw:
      if (!(f.m > 0.0)) throw Error(ErrorCode::DomainError, "power law requires m > 0");
      break;
    case Family::Exponential:
      if (!(f.m > 0.0) || !(f.b > 0.0)) {
        throw Error(ErrorCode::DomainError, "exponential requires m > 0 and b > 0");
      }
      break;
    case Family::NapierianLog:
      break;
  }
}

double eval(const MemoryFunction& f, double x) {
  require_positive_x(x);
  double y = 0.0;
  switch (f.family) {
    case Family::PowerLaw: y = f.m * std::pow(x, f.b); break;
    case Family::Exponential: y = f.m * saturation(f.b, x); break;
    case Family::NapierianLog: y = f.m + f.b * std::log(x); break;
  }
  if (!std::isfinite(y)) throw Error(ErrorCode::DomainError, "memory function overflowed");
  return y;
}

double inverse(const MemoryFunction& f, double y) {
  double x = 0.0;
  switch (f.family) {
    case Family::PowerLaw:
      if (f.b == 0.0 || !(y > 0.0)) throw Error(ErrorCode::DomainError, "power law not invertible");
      x = std::pow(y / f.m, 1.0 / f.b);
      break;
    case Family::Exponential:
      if (!(y < f.m) || !(y > 0.0)) {
        throw Error(ErrorCode::DomainError, "exponential never reaches the requested footprint");
      }
      x = -std::log1p(-y / f.m) / f.b;
      break;
    case Family::NapierianLog:
      if (f.b == 0.0) throw Error(ErrorCode::DomainError, "flat logarithm not invertible");
      x = std::exp((y - f.m) / f.b);
      break;
  }
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::DomainError, "no positive inverse");
  return x;
}

MemoryFunction calibrate(Family family, Point p1, Point p2) {
  require_positive_x(p1.x);
  require_positive_x(p2.x);
  if (p1.x == p2.x) {
    throw Error(ErrorCode::DegenerateInput, "calibration needs two distinct input sizes");
  }
  if (!std::isfinite(p1.y) || !std::isfinite(p2.y)) {
    throw Error(ErrorCode::DomainError, "calibration footprints must be finite");
  }
  if (family != Family::NapierianLog && (!(p1.y > 0.0) || !(p2.y > 0.0))) {
    throw Error(ErrorCode::DomainError, to_string(family) + " needs positive footprints");
  }

  switch (family) {
    case Family::PowerLaw: {
      const double b = std::log(p1.y / p2.y) / std::log(p1.x / p2.x);
      return {family, p1.y / std::pow(p1.x, b), b};
    }
    case Family::NapierianLog: {
      const double b = (p1.y - p2.y) / (std::log(p1.x) - std::log(p2.x));
      return {family, p1.y - b * std::log(p1.x), b};
    }
    case Family::Exponential:
      break;
  }

  if (p1.x > p2.x) std::swap(p1, p2);
  // ratio(b) = (1 - e^(-b x1)) / (1 - e^(-b x2)) rises from x1/x2 (b -> 0) to 1 (b -> inf).
  const double target = p1.y / p2.y;
  auto ratio = [&](double b) { return saturation(b, p1.x) / saturation(b, p2.x); };
  double lo = std::log(kExpBMin);
  double hi = std::log(kExpBMax);
  if (!(target > ratio(kExpBMin)) || !(target < ratio(kExpBMax))) {
    throw Error(ErrorCode::Unsolvable,
                "footprint ratio " + std::to_string(target) +
                    " is outside the range an exponential curve can produce");
  }
  double b = std::exp(0.5 * (lo + hi));
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    b = std::exp(mid);
    const double r = ratio(b);
    if (std::abs(r - target) <= kRatioTolerance) break;
    if (r < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {Family::Exponential, p1.y / saturation(b, p1.x), b};
}

double rmse(const MemoryFunction& f, std::span<const Point> points) {
  if (points.empty()) return 0.0;
  double sse = 0.0;
  for (const auto& p : points) {
    const double r = p.y - eval(f, p.x);
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(points.size()));
}

FitReport fit_least_squares(Family family, std::span<const Point> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::InsufficientData,
                "least-squares fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  std::vector<Point> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    require_positive_x(p.x);
    if (!std::isfinite(p.y)) throw Error(ErrorCode::DomainError, "footprint must be finite");
  }
  // Canonical order makes the result independent of the caller's ordering.
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.front().x == pts.back().x) {
    throw Error(ErrorCode::Unsolvable, "all sample sizes coincide");
  }

  std::vector<double> u(pts.size()), v(pts.size());
  switch (family) {
    case Family::NapierianLog: {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        u[i] = std::log(pts[i].x);
        v[i] = pts[i].y;
      }
      const LineFit line = fit_line(u, v);
      MemoryFunction f{family, line.intercept, line.slope};
      return {f, rmse(f, pts), pts.size()};
    }
    case Family::PowerLaw: {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].y > 0.0)) {
          throw Error(ErrorCode::Unsolvable, "power law fit needs positive footprints");
        }
        u[i] = std::log(pts[i].x);
        v[i] = std::log(pts[i].y);
      }
      const LineFit line = fit_line(u, v);
      MemoryFunction f{family, std::exp(line.intercept), line.slope};
      return {f, rmse(f, pts), pts.size()};
    }
    case Family::Exponential:
      return fit_exponential(pts);
  }
  throw Error(ErrorCode::Unsolvable, "unknown family");
}

BestFit select_best_fit(std::span<const Point> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::InsufficientData,
                "best-fit selection needs at least 3 points, got " + std::to_string(points.size()));
  }
  BestFit out;
  std::string failures;
  for (Family f : kAllFamilies) {
    try {
      out.reports.push_back(fit_least_squares(f, points));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientData) throw;
      failures += " " + to_string(f) + ": " + e.message() + ";";
    }
  }
  if (out.reports.empty()) {
    throw Error(ErrorCode::Unsolvable, "no memory function family fits:" + failures);
  }
  // Earlier families win ties; a tie is a difference below floating-point noise.
  out.winner = out.reports.front();
  for (std::size_t i = 1; i < out.reports.size(); ++i) {
    const double tol = 1e-12 + 1e-9 * std::max(out.winner.rmse, out.reports[i].rmse);
    if (out.reports[i].rmse < out.winner.rmse - tol) out.winner = out.reports[i];
  }
  return out;
}

}  // namespace moeco
