#pragma once

// Data-parallel inner loops shared by the feature pipeline and the expert
// selector. Each kernel has a scalar reference implementation and, where the
// target supports it, a vectorised variant. The active variant is chosen once
// at first use from the CPU's reported capabilities.

#include <cstddef>
#include <span>
#include <string_view>

namespace moeco::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

// Best backend the running CPU supports.
Backend detect_backend();
Backend active_backend();
bool backend_available(Backend b);
// Overrides dispatch (tests, benchmarking). Throws if `b` is unavailable.
void set_backend(Backend b);

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

// Throws if `b` is not compiled in or not supported by this CPU.
const KernelTable& kernels_for(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out[r] = |query - rows[r]|^2 for a row-major block of out.size() rows with
// query.size() columns.
void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::span<double> out);

}  // namespace moeco::simd
