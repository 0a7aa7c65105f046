#include <atomic>
#include <cassert>

#include "kernels_impl.hpp"
#include "moeco/error.hpp"
#include "moeco/simd/kernels.hpp"

namespace moeco::simd {

namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::squared_distance, scalar::axpy};
#if defined(MOECO_HAVE_AVX2)
constexpr KernelTable kAvx2{avx2::dot, avx2::squared_distance, avx2::axpy};
#endif
#if defined(MOECO_HAVE_NEON)
constexpr KernelTable kNeon{neon::dot, neon::squared_distance, neon::axpy};
#endif

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(MOECO_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(MOECO_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernels_for(detect_backend())};
  return table;
}

std::atomic<Backend>& active_tag() {
  static std::atomic<Backend> tag{detect_backend()};
  return tag;
}

const KernelTable& table() { return *active_table().load(std::memory_order_acquire); }

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

Backend detect_backend() {
  if (cpu_supports(Backend::Avx2)) return Backend::Avx2;
  if (cpu_supports(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

bool backend_available(Backend b) { return cpu_supports(b); }

Backend active_backend() { return active_tag().load(std::memory_order_acquire); }

const KernelTable& kernels_for(Backend b) {
  if (!cpu_supports(b)) {
    throw Error(ErrorCode::DomainError,
                "simd backend '" + std::string(to_string(b)) + "' is not available");
  }
  switch (b) {
    case Backend::Scalar:
      return kScalar;
#if defined(MOECO_HAVE_AVX2)
    case Backend::Avx2:
      return kAvx2;
#endif
#if defined(MOECO_HAVE_NEON)
    case Backend::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

void set_backend(Backend b) {
  const KernelTable& t = kernels_for(b);
  active_table().store(&t, std::memory_order_release);
  active_tag().store(b, std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return table().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return table().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::span<double> out) {
  const std::size_t dim = query.size();
  assert(rows.size() == dim * out.size());
  const KernelTable& t = table();
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = t.squared_distance(query.data(), rows.data() + r * dim, dim);
  }
}

}  // namespace moeco::simd
