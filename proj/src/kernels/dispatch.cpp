#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace pass::kernels {

namespace {

constexpr KernelTable kScalar{
    &detail::dot_scalar,
    &detail::axpy_scalar,
    &detail::cosine_terms_scalar,
    &detail::sgd_momentum_scalar,
};

#if defined(PASS_HAVE_AVX2)
constexpr KernelTable kAvx2{
    &detail::dot_avx2,
    &detail::axpy_avx2,
    &detail::cosine_terms_avx2,
    &detail::sgd_momentum_avx2,
};
#endif

bool cpu_has_avx2() {
#if defined(PASS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// PASS_KERNELS=scalar forces the reference path.
Backend detect_backend() {
  if (const char* env = std::getenv("PASS_KERNELS"); env != nullptr) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect_backend()};
  return backend;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!backend_available(backend)) {
    throw std::runtime_error("kernel backend not available: " +
                             std::string(backend_name(backend)));
  }
#if defined(PASS_HAVE_AVX2)
  if (backend == Backend::avx2) return kAvx2;
#endif
  return kScalar;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

const KernelTable& active() {
#if defined(PASS_HAVE_AVX2)
  if (active_backend() == Backend::avx2) return kAvx2;
#endif
  return kScalar;
}

void set_backend(Backend backend) {
  (void)table(backend);
  current().store(backend, std::memory_order_relaxed);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace pass::kernels
