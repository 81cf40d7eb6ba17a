#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "pass/error.hpp"
#include "pass/partition.hpp"

using namespace pass;

namespace {

using Idx = std::vector<std::size_t>;

void check_complete(const Partition& p, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (auto i : p.clean) ++seen[i];
  for (auto i : p.noisy) ++seen[i];
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("histogram binning") {
  CHECK(histogram_bin(0.0, 10) == 0);
  CHECK(histogram_bin(0.1, 10) == 1);
  CHECK(histogram_bin(0.999, 10) == 9);
  CHECK(histogram_bin(1.0, 10) == 9);
  const auto h = build_histogram(std::vector<double>{0.05, 0.05, 0.55, 1.0}, 10);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[5] == 1);
  CHECK(h.counts[9] == 1);
  CHECK_THROWS_AS(build_histogram(std::vector<double>{1.5}, 10), InvalidArgument);
}

TEST_CASE("otsu examples") {
  const std::vector<double> s{0.1, 0.1, 0.9, 0.9};
  const auto search = otsu_search(s, 10);
  CHECK(std::abs(search.between_class_variance - 0.16) <= 0.02);
  const auto p = otsu_threshold(s, 10);
  CHECK(p.clean == Idx{2, 3});
  CHECK(p.noisy == Idx{0, 1});
  // Plateau of maximal variance spans edges 2..9; lower middle is edge 5.
  CHECK(search.edge == 5);
  CHECK(*p.threshold == doctest::Approx(0.5));

  const auto two = otsu_threshold(std::vector<double>{0.0, 1.0});
  CHECK(two.clean == Idx{1});
  CHECK(two.noisy == Idx{0});
  CHECK(two.method == PartitionMethod::otsu);
}

TEST_CASE("otsu degenerate and invalid inputs") {
  CHECK_THROWS_WITH_AS(otsu_threshold(std::vector<double>{0.3, 0.3, 0.3}), "degenerate score distribution",
                       DegenerateDistribution);
  CHECK_THROWS_AS(otsu_threshold(std::vector<double>{0.5}), InvalidArgument);
  CHECK_THROWS_AS(otsu_threshold(std::vector<double>{0.5, 1.2}), InvalidArgument);
}

TEST_CASE("otsu matches the exhaustive scan on random vectors") {
  RandomStream rng(11, 11);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(10 + rng.below(500));
    const double m1 = rng.uniform(), m2 = rng.uniform(), sd = 0.01 + 0.2 * rng.uniform();
    for (auto& v : s) v = std::clamp((rng.below(2) ? m1 : m2) + sd * rng.normal(), 0.0, 1.0);
    const auto scan = oracle::otsu_scan(s, 256);
    if (scan.best_variance == 0.0) continue;
    const auto got = otsu_search(s);
    CHECK(got.between_class_variance == scan.best_variance);
    CHECK(got.edge == scan.plateau_edge);
    const auto p = otsu_threshold(s);
    check_complete(p, s.size());
    for (auto i : p.clean) CHECK(s[i] >= *p.threshold);
  }
}

TEST_CASE("kmeans examples") {
  const auto fit = kmeans2_fit(std::vector<double>{0.1, 0.2, 0.8, 0.9});
  CHECK(fit.centroids[0] == doctest::Approx(0.15));
  CHECK(fit.centroids[1] == doctest::Approx(0.85));
  CHECK(fit.partition.clean == Idx{2, 3});
  CHECK(kmeans2_partition(std::vector<double>{0.0, 1.0}).clean == Idx{1});
  CHECK_THROWS_AS(kmeans2_partition(std::vector<double>{0.4, 0.4}), DegenerateDistribution);
}

TEST_CASE("gmm examples") {
  RandomStream rng(2, 2);
  std::vector<double> s;
  for (int i = 0; i < 200; ++i) s.push_back(0.2 + 0.02 * rng.normal());
  for (int i = 0; i < 200; ++i) s.push_back(0.8 + 0.02 * rng.normal());
  const auto fit = gmm2_fit(s);
  CHECK(std::abs(fit.means[0] - 0.2) <= 0.02);
  CHECK(std::abs(fit.means[1] - 0.8) <= 0.02);
  const auto p = gmm2_partition(s);
  CHECK(p.clean.size() == 200);
  for (auto i : p.clean) CHECK(i >= 200);
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
    CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-10);
  }
  CHECK(gmm2_partition(std::vector<double>{0.1, 0.1, 0.9, 0.9}).clean == Idx{2, 3});
  CHECK_THROWS_AS(gmm2_partition(std::vector<double>{0.1, 0.9, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(gmm2_partition(std::vector<double>{0.5, 0.5, 0.5, 0.5}), DegenerateDistribution);
}

TEST_CASE("kmeans inertia and em likelihood are monotone") {
  RandomStream rng(4, 4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(30 + rng.below(300));
    for (auto& x : v) x = rng.uniform() * rng.uniform();
    const auto km = kmeans2_fit(v);
    for (std::size_t i = 1; i < km.inertia_trace.size(); ++i) {
      CHECK(km.inertia_trace[i] <= km.inertia_trace[i - 1]);
    }
    const auto g = gmm2_fit(v);
    for (std::size_t i = 1; i < g.loglik_trace.size(); ++i) {
      CHECK(g.loglik_trace[i] >= g.loglik_trace[i - 1] - 1e-10);
    }
  }
}

TEST_CASE("all methods agree on two point masses") {
  std::vector<double> s;
  for (int i = 0; i < 30; ++i) s.push_back(0.25);
  for (int i = 0; i < 70; ++i) s.push_back(0.95);
  const auto o = otsu_threshold(s);
  CHECK(o.clean.size() == 70);
  CHECK(kmeans2_partition(s).clean == o.clean);
  CHECK(gmm2_partition(s).clean == o.clean);
}

TEST_CASE("fixed threshold") {
  const std::vector<double> s{0.4, 0.5, 0.6};
  CHECK(partition_from_threshold(s, 0.5).clean == Idx{1, 2});
  CHECK(partition_from_threshold(s, 0.0).clean.size() == 3);
  CHECK(partition_from_threshold(s, 1.0).clean.empty());
  CHECK(partition_from_threshold(s, 0.5).method == PartitionMethod::fixed);
  CHECK_THROWS_AS(partition_from_threshold(s, 1.0 + 1e-12), InvalidArgument);
}

TEST_CASE("percentile and method names") {
  CHECK(percentile(std::vector<double>{3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile(std::vector<double>{1, 2}, 0.1) == doctest::Approx(1.1));
  for (auto m : {PartitionMethod::otsu, PartitionMethod::kmeans, PartitionMethod::gmm, PartitionMethod::fixed}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("dbscan"), InvalidArgument);
}
