#pragma once

#include "pass/kernels.hpp"

namespace pass::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
CosineTerms cosine_terms_scalar(const double* u, const double* v, std::size_t n);
void sgd_momentum_scalar(double* w, double* velocity, const double* grad, std::size_t n,
                         double lr, double momentum, double decay);

#if defined(PASS_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
CosineTerms cosine_terms_avx2(const double* u, const double* v, std::size_t n);
void sgd_momentum_avx2(double* w, double* velocity, const double* grad, std::size_t n,
                       double lr, double momentum, double decay);
#endif

}  // namespace pass::kernels::detail
