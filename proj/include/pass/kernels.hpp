#pragma once

// Data-parallel inner loops used by training, prediction and agreement
// scoring. Every kernel has a scalar reference implementation; on x86-64
// an AVX2/FMA variant is selected at runtime when the CPU supports it.
//
// The two backends are not bit-identical (FMA contraction and a different
// reduction order), so one process sticks to one backend for its lifetime
// unless a test switches it explicitly.

#include <cstddef>
#include <span>
#include <string_view>

namespace pass::kernels {

enum class Backend { scalar, avx2 };

struct CosineTerms {
  double uv = 0.0;
  double uu = 0.0;
  double vv = 0.0;
};

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  CosineTerms (*cosine_terms)(const double* u, const double* v, std::size_t n);
  // velocity = momentum * velocity + grad + decay * w;  w -= lr * velocity
  void (*sgd_momentum)(double* w, double* velocity, const double* grad, std::size_t n,
                       double lr, double momentum, double decay);
};

const KernelTable& scalar_table();
// Throws std::runtime_error when the backend is not compiled in or not
// supported by the running CPU.
const KernelTable& table(Backend backend);

bool backend_available(Backend backend);
Backend active_backend();
const KernelTable& active();
// Not thread-safe with respect to in-flight kernel calls; intended for
// start-up and tests.
void set_backend(Backend backend);

std::string_view backend_name(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline CosineTerms cosine_terms(std::span<const double> u, std::span<const double> v) {
  return active().cosine_terms(u.data(), v.data(), u.size());
}

inline void sgd_momentum(std::span<double> w, std::span<double> velocity,
                         std::span<const double> grad, double lr, double momentum,
                         double decay) {
  active().sgd_momentum(w.data(), velocity.data(), grad.data(), w.size(), lr, momentum, decay);
}

}  // namespace pass::kernels
