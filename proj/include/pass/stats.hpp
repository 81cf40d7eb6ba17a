#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pass/numerics.hpp"

namespace pass {

// methods x datasets performance table as read from a scores CSV
// (`dataset,method1,...,methodk`).
struct ScoresTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  Matrix scores;  // datasets x methods
};

ScoresTable read_scores_csv(std::istream& in);
ScoresTable read_scores_csv(const std::filesystem::path& path);

// N x k ranks, 1 = best, ties share the average rank.
struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  Matrix ranks;

  std::size_t method_count() const { return ranks.cols(); }
  std::size_t dataset_count() const { return ranks.rows(); }
  std::vector<double> rank_sums() const;
  std::vector<double> mean_ranks() const;
};

// Throws InvalidArgument for N < 2, k < 2 or non-finite scores.
RankTable rank_rows(const Matrix& scores, bool higher_is_better = true,
                    std::vector<std::string> methods = {}, std::vector<std::string> datasets = {});
RankTable rank_rows(const ScoresTable& table, bool higher_is_better = true);

struct FriedmanResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  // Set when N < 5 or k < 3: the chi-square approximation is unreliable.
  bool approximation_warning = false;
};

// chi2_F = 12 / (N k (k+1)) * sum_j R_j^2 - 3 N (k+1), R_j the column rank
// sums; p from the chi-square upper tail with k - 1 degrees of freedom.
FriedmanResult friedman(const RankTable& ranks);
FriedmanResult friedman_from_rank_sums(std::span<const double> rank_sums, std::size_t datasets);

// Upper tail of the chi-square distribution (regularised upper incomplete
// gamma Q(df/2, x/2)).
double chi_square_sf(double x, double df);

// Studentized-range based critical values q_alpha / sqrt(2) for the Nemenyi
// test, k = 2..10, alpha in {0.05, 0.10}. Throws InvalidArgument otherwise.
double nemenyi_q(std::size_t k, double alpha);

// CD = q_alpha(k) * sqrt(k (k+1) / (6 N)).
double nemenyi_cd(std::size_t k, std::size_t datasets, double alpha);

struct PairComparison {
  std::size_t a = 0;
  std::size_t b = 0;
  double rank_gap = 0.0;
  double cd = 0.0;
  bool significant = false;
};

// Pair (a, b) is significant iff |mean_rank_a - mean_rank_b| >= cd.
std::vector<PairComparison> nemenyi_pairwise(std::span<const double> mean_ranks, double cd);
std::vector<PairComparison> nemenyi_pairwise(const RankTable& ranks, double alpha);

}  // namespace pass
