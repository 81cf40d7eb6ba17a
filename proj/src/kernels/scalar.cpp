#include "kernels_impl.hpp"

namespace pass::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

CosineTerms cosine_terms_scalar(const double* u, const double* v, std::size_t n) {
  CosineTerms t;
  for (std::size_t i = 0; i < n; ++i) {
    t.uv += u[i] * v[i];
    t.uu += u[i] * u[i];
    t.vv += v[i] * v[i];
  }
  return t;
}

void sgd_momentum_scalar(double* w, double* velocity, const double* grad, std::size_t n,
                         double lr, double momentum, double decay) {
  for (std::size_t i = 0; i < n; ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + decay * w[i];
    w[i] -= lr * velocity[i];
  }
}

}  // namespace pass::kernels::detail
