#include <doctest.h>

#include <vector>

#include "pass/kernels.hpp"
#include "pass/numerics.hpp"

using namespace pass;

namespace {

std::vector<double> random_vector(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match hand sums") {
  const auto& k = kernels::scalar_table();
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(k.dot(a.data(), b.data(), 3) == 32.0);
  std::vector<double> y{1, 1, 1};
  k.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  const auto t = k.cosine_terms(a.data(), b.data(), 3);
  CHECK(t.uv == 32.0);
  CHECK(t.uu == 14.0);
  CHECK(t.vv == 77.0);
  std::vector<double> w{1.0, -1.0}, vel{0.5, 0.0};
  const std::vector<double> g{0.2, 0.4};
  k.sgd_momentum(w.data(), vel.data(), g.data(), 2, 0.1, 0.9, 0.01);
  CHECK(vel[0] == doctest::Approx(0.45 + 0.2 + 0.01));
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 0.66));
  CHECK(vel[1] == doctest::Approx(0.4 - 0.01));
  CHECK(w[1] == doctest::Approx(-1.0 - 0.1 * 0.39));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!kernels::backend_available(kernels::Backend::avx2)) {
    MESSAGE("AVX2 not available on this CPU; skipping equivalence check");
    return;
  }
  const auto& s = kernels::scalar_table();
  const auto& v = kernels::table(kernels::Backend::avx2);
  RandomStream rng(7, 1);
  // Lengths around the vector width exercise both the main loop and the tail.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 64u, 65u, 1000u}) {
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    CHECK(v.dot(a.data(), b.data(), n) == doctest::Approx(s.dot(a.data(), b.data(), n)).epsilon(1e-12));
    const auto ts = s.cosine_terms(a.data(), b.data(), n);
    const auto tv = v.cosine_terms(a.data(), b.data(), n);
    CHECK(tv.uv == doctest::Approx(ts.uv).epsilon(1e-12));
    CHECK(tv.uu == doctest::Approx(ts.uu).epsilon(1e-12));
    CHECK(tv.vv == doctest::Approx(ts.vv).epsilon(1e-12));

    auto ys = b, yv = b;
    s.axpy(0.37, a.data(), ys.data(), n);
    v.axpy(0.37, a.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(yv[i] == doctest::Approx(ys[i]).epsilon(1e-14));

    auto ws = a, wv = a, vs = b, vv = b;
    const auto g = random_vector(rng, n);
    s.sgd_momentum(ws.data(), vs.data(), g.data(), n, 0.01, 0.9, 5e-4);
    v.sgd_momentum(wv.data(), vv.data(), g.data(), n, 0.01, 0.9, 5e-4);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(vv[i] == doctest::Approx(vs[i]).epsilon(1e-14));
      CHECK(wv[i] == doctest::Approx(ws[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("backend switching") {
  const auto original = kernels::active_backend();
  kernels::set_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  CHECK(kernels::backend_name(kernels::Backend::scalar) == "scalar");
  kernels::set_backend(original);
}
