#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "pass/error.hpp"
#include "pass/numerics.hpp"

using namespace pass;

TEST_CASE("softmax is stable and on the simplex") {
  const auto p = softmax(std::vector<double>{1000.0, 1000.0});
  CHECK(p[0] == doctest::Approx(0.5));
  const auto q = softmax(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q[2] == doctest::Approx(std::exp(3.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
  CHECK_THROWS_AS(softmax(std::vector<double>{NAN, 1.0}), NumericalError);
}

TEST_CASE("cosine") {
  CHECK(cosine(std::vector<double>{0.6, 0.4}, std::vector<double>{0.4, 0.6}) ==
        doctest::Approx(0.48 / 0.52).epsilon(1e-15));
  CHECK_THROWS_AS(cosine(std::vector<double>{0.0, 0.0}, std::vector<double>{0.5, 0.5}), NumericalError);
  CHECK_THROWS_AS(cosine(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(cosine(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("matrix rejects non-finite data") {
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, INFINITY}), InvalidArgument);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0}), InvalidArgument);
  Matrix m(2, 3);
  m(1, 2) = 4.0;
  CHECK(m.row(1)[2] == 4.0);
}

TEST_CASE("random streams are reproducible and independent") {
  RandomStream a(42, stream_id(StreamPurpose::init, 0));
  RandomStream b(42, stream_id(StreamPurpose::init, 0));
  RandomStream c(42, stream_id(StreamPurpose::init, 1));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("random stream distributions") {
  RandomStream rng(1, 2);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
  CHECK_THROWS_AS(rng.below(0), InvalidArgument);
}

TEST_CASE("shuffle is a permutation") {
  RandomStream rng(3, 4);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
}

TEST_CASE("stream ids pack purpose and indices") {
  CHECK(stream_id(StreamPurpose::shuffle, 1, 2) != stream_id(StreamPurpose::shuffle, 2, 1));
  CHECK(stream_id(StreamPurpose::init, 0) != stream_id(StreamPurpose::shuffle, 0));
}
