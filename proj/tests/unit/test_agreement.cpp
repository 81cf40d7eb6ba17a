#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pass/agreement.hpp"
#include "pass/error.hpp"

using namespace pass;

namespace {

ProbMatrix rows(std::size_t cols, std::vector<double> values) {
  const std::size_t n = values.size() / cols;
  return ProbMatrix(Matrix(n, cols, std::move(values)));
}

ProbMatrix random_simplex(RandomStream& rng, std::size_t n, std::size_t c) {
  std::vector<double> v(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < c; ++j) total += v[i * c + j] = -std::log(1.0 - rng.uniform());
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] /= total;
  }
  return ProbMatrix(Matrix(n, c, std::move(v)));
}

}  // namespace

TEST_CASE("agreement examples") {
  const auto a = rows(2, {0.6, 0.4});
  const auto b = rows(2, {0.4, 0.6});
  CHECK(agreement_scores(a, b).scores[0] == doctest::Approx(0.923077).epsilon(1e-6));
  CHECK(std::abs(agreement_scores(a, b).scores[0] - 0.48 / 0.52) < 1e-15);
  CHECK(agreement_scores(a, a).scores[0] == 1.0);
  CHECK(agreement_scores(rows(3, {1, 0, 0}), rows(3, {0, 1, 0})).scores[0] == 0.0);
  CHECK(agreement_scores(rows(3, {1, 0, 0}), rows(3, {1, 0, 0})).scores[0] == 1.0);
  for (std::size_t c : {2u, 5u, 10u}) {
    const auto u = rows(c, std::vector<double>(c, 1.0 / c));
    CHECK(agreement_scores(u, u).scores[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("agreement range and symmetry on random simplex rows") {
  RandomStream rng(1, 1);
  const auto a = random_simplex(rng, 2000, 5);
  const auto b = random_simplex(rng, 2000, 5);
  const auto ab = agreement_scores(a, b, {1, 2});
  const auto ba = agreement_scores(b, a, {2, 1});
  CHECK(ab.peer_ids == std::array<std::size_t, 2>{1, 2});
  for (std::size_t i = 0; i < ab.scores.size(); ++i) {
    CHECK(ab.scores[i] == ba.scores[i]);
    CHECK((ab.scores[i] >= 0.0 && ab.scores[i] <= 1.0));
  }
  for (double s : agreement_scores(a, a).scores) CHECK(s == 1.0);
}

TEST_CASE("agreement validates inputs") {
  CHECK_THROWS_AS(rows(2, {0.7, 0.4}), InvalidArgument);
  CHECK_THROWS_AS(rows(2, {1.1, -0.1}), InvalidArgument);
  CHECK_THROWS_AS(agreement_scores(rows(2, {0.5, 0.5}), rows(3, {0.2, 0.3, 0.5})), InvalidArgument);
  CHECK_THROWS_AS(agreement_scores(rows(2, {0.5, 0.5}), rows(2, {0.5, 0.5, 0.2, 0.8})), InvalidArgument);
}

TEST_CASE("scores csv") {
  AgreementScores s{{0.5, 1.0}, {0, 1}};
  std::ostringstream out;
  write_scores_csv(s, IndexList{7, 9}, out);
  CHECK(out.str() == "id,score\n7,0.5\n9,1\n");
}
