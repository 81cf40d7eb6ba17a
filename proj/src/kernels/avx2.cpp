// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a CPUID check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace pass::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

CosineTerms cosine_terms_avx2(const double* u, const double* v, std::size_t n) {
  __m256d uv = _mm256_setzero_pd();
  __m256d uu = _mm256_setzero_pd();
  __m256d vv = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(u + i);
    const __m256d b = _mm256_loadu_pd(v + i);
    uv = _mm256_fmadd_pd(a, b, uv);
    uu = _mm256_fmadd_pd(a, a, uu);
    vv = _mm256_fmadd_pd(b, b, vv);
  }
  CosineTerms t{hsum(uv), hsum(uu), hsum(vv)};
  for (; i < n; ++i) {
    t.uv += u[i] * v[i];
    t.uu += u[i] * u[i];
    t.vv += v[i] * v[i];
  }
  return t;
}

void sgd_momentum_avx2(double* w, double* velocity, const double* grad, std::size_t n,
                       double lr, double momentum, double decay) {
  const __m256d vmu = _mm256_set1_pd(momentum);
  const __m256d vdecay = _mm256_set1_pd(decay);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    __m256d vel = _mm256_fmadd_pd(vmu, _mm256_loadu_pd(velocity + i), _mm256_loadu_pd(grad + i));
    vel = _mm256_fmadd_pd(vdecay, vw, vel);
    _mm256_storeu_pd(velocity + i, vel);
    _mm256_storeu_pd(w + i, _mm256_fnmadd_pd(vlr, vel, vw));
  }
  for (; i < n; ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + decay * w[i];
    w[i] -= lr * velocity[i];
  }
}

}  // namespace pass::kernels::detail
