#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pass/data.hpp"

namespace pass {

enum class PartitionMethod { otsu, kmeans, gmm, fixed };

std::string_view method_name(PartitionMethod method);
// Throws InvalidArgument for unknown names.
PartitionMethod parse_method(std::string_view name);

// Clean/noisy split of positions 0..n-1 of a score vector. Both lists are
// sorted, disjoint and together cover every position.
struct Partition {
  IndexList clean;
  IndexList noisy;
  std::optional<double> threshold;
  PartitionMethod method = PartitionMethod::fixed;
};

// B uniform bins over [0, 1]; a score s falls in bin min(floor(s * B), B - 1).
struct Histogram {
  std::size_t bin_count = 0;
  std::vector<std::size_t> counts;

  double edge(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(bin_count); }
  double center(std::size_t j) const {
    return (static_cast<double>(j) + 0.5) / static_cast<double>(bin_count);
  }
};

std::size_t histogram_bin(double score, std::size_t bin_count);
Histogram build_histogram(std::span<const double> scores, std::size_t bin_count);

constexpr std::size_t kDefaultOtsuBins = 256;

// Between-class variance w1 w2 (mu1 - mu2)^2 of a histogram split, with the
// class means taken over bin centres. Arguments are the class counts and
// the class sums of (2b + 1) over member bins b, so the centre sums stay
// exact integers.
double between_class_variance(long long noisy_count, long long noisy_center_sum,
                              long long clean_count, long long clean_center_sum,
                              std::size_t bin_count);

struct OtsuSearch {
  std::size_t edge = 0;     // chosen interior edge index in [1, B-1]
  double threshold = 0.0;   // edge / B
  double between_class_variance = 0.0;
  std::vector<double> variance_by_edge;  // index j = edge j; entry 0 unused
};

// Exhaustive scan of every interior bin edge. On a plateau of maximal
// variance the midpoint edge (lower middle) of the first plateau wins.
// Throws InvalidArgument on n < 2 or scores outside [0, 1], and
// DegenerateDistribution when no edge separates the scores.
OtsuSearch otsu_search(std::span<const double> scores, std::size_t bin_count = kDefaultOtsuBins);

// clean = scores whose bin is at or above the chosen edge (s >= t*).
Partition otsu_threshold(std::span<const double> scores, std::size_t bin_count = kDefaultOtsuBins);

struct KMeansFit {
  Partition partition;
  std::array<double, 2> centroids{};  // ascending
  std::vector<double> inertia_trace;  // one entry per assignment step
  std::size_t iterations = 0;
};

// Lloyd's algorithm in one dimension with centroids seeded at the 10th and
// 90th percentiles; stops when assignments repeat or after 100 iterations.
// clean = cluster with the larger centroid. Reported threshold is the
// centroid midpoint.
KMeansFit kmeans2_fit(std::span<const double> scores);
Partition kmeans2_partition(std::span<const double> scores);

struct Gmm2Fit {
  std::array<double, 2> means{};  // component 0 has the lower mean
  std::array<double, 2> variances{};
  std::array<double, 2> weights{};
  std::vector<double> loglik_trace;
  std::vector<double> posterior_high;  // responsibility of component 1 per sample
  std::size_t iterations = 0;
};

struct GmmOptions {
  std::size_t max_iterations = 200;
  double tolerance = 1e-8;
  double variance_floor = 1e-6;
};

// Two-component 1-D Gaussian mixture by EM. Means start at the 10th/90th
// percentiles, both variances at the sample variance, weights 0.5/0.5.
// Throws InvalidArgument on n < 4, DegenerateDistribution on identical values.
Gmm2Fit gmm2_fit(std::span<const double> values, const GmmOptions& options = {});

// clean = posterior of the higher-mean component >= 0.5. The threshold is
// the point between the two means where that posterior crosses 0.5, when
// such a crossing exists.
Partition gmm2_partition(std::span<const double> scores, const GmmOptions& options = {});

// clean = {i : s_i >= t}. Throws InvalidArgument for t outside [0, 1].
Partition partition_from_threshold(std::span<const double> scores, double threshold);

// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::span<const double> values, double q);

}  // namespace pass
