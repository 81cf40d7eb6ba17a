#pragma once

// Independent re-implementations used to check the library. Nothing here
// calls the library routine it is meant to check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pass/classifier.hpp"
#include "pass/data.hpp"

namespace oracle {

struct OtsuScan {
  double best_variance = 0.0;
  std::vector<std::size_t> best_edges;  // every interior edge attaining the maximum
  // Edge chosen by the plateau rule: the lower middle of the first run of
  // consecutive maximal edges.
  std::size_t plateau_edge = 0;
};

// Recomputes both classes from the raw scores at every edge 1..B-1.
OtsuScan otsu_scan(std::span<const double> scores, std::size_t bins);

// Plain loops over the layer tensors; no shared code with the library.
std::vector<double> mlp_forward(const pass::MlpParams& params, std::span<const double> x);
double mlp_loss(const pass::MlpParams& params, std::span<const double> x, pass::Label label);

// Central differences of mlp_loss, ordered layer by layer as (weights, bias).
std::vector<double> finite_difference_gradient(const pass::MlpParams& params,
                                               std::span<const double> x, pass::Label label,
                                               double h = 1e-5);

double relative_error(double a, double b);

// Multinomial logistic regression by full-batch gradient descent; returns the
// training accuracy against the noisy labels.
double logistic_regression_train_accuracy(const pass::LabeledDataset& ds,
                                          std::size_t iterations = 2000, double lr = 0.5);

// chi2_F = 12 / (N k (k + 1)) * sum R_j^2 - 3 N (k + 1), written out term by term.
double friedman_by_hand(std::span<const double> rank_sums, std::size_t datasets);
// Upper tail of chi-square with 2 degrees of freedom.
double chi2_df2_tail(double x);

struct OracleReport {
  std::string name;
  std::size_t cases = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Otsu vs exhaustive scan on 1000 random score vectors (exact equality).
OracleReport otsu_oracle();
// Analytic vs central-difference gradients on 100 random tiny networks.
OracleReport gradient_oracle();
// GMM log-likelihood and K-Means inertia traces on 100 random 1-D fits.
OracleReport monotonicity_oracle();
// Friedman statistic and df-2 p-value vs the hand formula on random tables.
OracleReport friedman_oracle();

std::vector<OracleReport> run_oracles();

}  // namespace oracle
