#include "pass/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pass/error.hpp"

namespace pass {

std::string_view method_name(PartitionMethod method) {
  switch (method) {
    case PartitionMethod::otsu:
      return "otsu";
    case PartitionMethod::kmeans:
      return "kmeans";
    case PartitionMethod::gmm:
      return "gmm";
    case PartitionMethod::fixed:
      return "fixed";
  }
  return "unknown";
}

PartitionMethod parse_method(std::string_view name) {
  if (name == "otsu") return PartitionMethod::otsu;
  if (name == "kmeans") return PartitionMethod::kmeans;
  if (name == "gmm") return PartitionMethod::gmm;
  if (name == "fixed") return PartitionMethod::fixed;
  throw InvalidArgument("unknown partition method '" + std::string(name) + "'");
}

namespace {

void check_scores(std::span<const double> scores, std::size_t min_size, bool unit_interval) {
  if (scores.size() < min_size) {
    throw InvalidArgument("need at least " + std::to_string(min_size) + " scores");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite score");
    if (unit_interval && (s < 0.0 || s > 1.0)) throw InvalidArgument("score outside [0, 1]");
  }
}

bool all_identical(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
}

Partition split_by(std::span<const double> scores, PartitionMethod method,
                   std::optional<double> threshold, auto&& is_clean) {
  Partition p;
  p.method = method;
  p.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (is_clean(i) ? p.clean : p.noisy).push_back(i);
  }
  return p;
}

std::array<double, 2> seed_pair(std::span<const double> values) {
  double lo = percentile(values, 0.10);
  double hi = percentile(values, 0.90);
  if (!(lo < hi)) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  return {lo, hi};
}

}  // namespace

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::size_t histogram_bin(double score, std::size_t bin_count) {
  const auto b = static_cast<std::size_t>(std::floor(score * static_cast<double>(bin_count)));
  return std::min(b, bin_count - 1);
}

Histogram build_histogram(std::span<const double> scores, std::size_t bin_count) {
  if (bin_count < 2) throw InvalidArgument("histogram needs at least 2 bins");
  check_scores(scores, 0, true);
  Histogram h{bin_count, std::vector<std::size_t>(bin_count, 0)};
  for (double s : scores) ++h.counts[histogram_bin(s, bin_count)];
  return h;
}

double between_class_variance(long long noisy_count, long long noisy_center_sum,
                              long long clean_count, long long clean_center_sum,
                              std::size_t bin_count) {
  if (noisy_count == 0 || clean_count == 0) return 0.0;
  const double n = static_cast<double>(noisy_count + clean_count);
  const double scale = 2.0 * static_cast<double>(bin_count);
  const double w_noisy = static_cast<double>(noisy_count) / n;
  const double w_clean = static_cast<double>(clean_count) / n;
  const double mu_noisy = static_cast<double>(noisy_center_sum) / (scale * static_cast<double>(noisy_count));
  const double mu_clean = static_cast<double>(clean_center_sum) / (scale * static_cast<double>(clean_count));
  const double gap = mu_clean - mu_noisy;
  return w_clean * w_noisy * gap * gap;
}

OtsuSearch otsu_search(std::span<const double> scores, std::size_t bin_count) {
  check_scores(scores, 2, true);
  const Histogram hist = build_histogram(scores, bin_count);

  long long total_count = 0;
  long long total_sum = 0;
  for (std::size_t b = 0; b < bin_count; ++b) {
    total_count += static_cast<long long>(hist.counts[b]);
    total_sum += static_cast<long long>(hist.counts[b]) * static_cast<long long>(2 * b + 1);
  }

  OtsuSearch out;
  out.variance_by_edge.assign(bin_count, 0.0);
  long long below_count = 0;
  long long below_sum = 0;
  double best = 0.0;
  for (std::size_t j = 1; j < bin_count; ++j) {
    below_count += static_cast<long long>(hist.counts[j - 1]);
    below_sum += static_cast<long long>(hist.counts[j - 1]) * static_cast<long long>(2 * j - 1);
    const double v = between_class_variance(below_count, below_sum, total_count - below_count,
                                            total_sum - below_sum, bin_count);
    out.variance_by_edge[j] = v;
    best = std::max(best, v);
  }
  if (!(best > 0.0)) throw DegenerateDistribution();

  std::size_t first = 1;
  while (out.variance_by_edge[first] != best) ++first;
  std::size_t last = first;
  while (last + 1 < bin_count && out.variance_by_edge[last + 1] == best) ++last;
  out.edge = first + (last - first) / 2;
  out.threshold = hist.edge(out.edge);
  out.between_class_variance = best;
  return out;
}

Partition otsu_threshold(std::span<const double> scores, std::size_t bin_count) {
  const OtsuSearch search = otsu_search(scores, bin_count);
  return split_by(scores, PartitionMethod::otsu, search.threshold,
                  [&](std::size_t i) { return histogram_bin(scores[i], bin_count) >= search.edge; });
}

KMeansFit kmeans2_fit(std::span<const double> scores) {
  check_scores(scores, 2, false);
  if (all_identical(scores)) throw DegenerateDistribution();

  KMeansFit fit;
  std::array<double, 2> c = seed_pair(scores);
  std::vector<std::uint8_t> assign(scores.size(), 0);
  std::vector<std::uint8_t> previous;
  constexpr std::size_t kMaxIterations = 100;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double d0 = std::abs(scores[i] - c[0]);
      const double d1 = std::abs(scores[i] - c[1]);
      assign[i] = d1 <= d0 ? 1 : 0;
      const double d = assign[i] ? d1 : d0;
      inertia += d * d;
    }
    fit.inertia_trace.push_back(inertia);
    fit.iterations = it + 1;
    if (assign == previous) break;
    previous = assign;

    std::array<double, 2> sum{0.0, 0.0};
    std::array<std::size_t, 2> count{0, 0};
    for (std::size_t i = 0; i < scores.size(); ++i) {
      sum[assign[i]] += scores[i];
      ++count[assign[i]];
    }
    for (int k = 0; k < 2; ++k) {
      if (count[k] > 0) c[k] = sum[k] / static_cast<double>(count[k]);
    }
  }

  const int high = c[1] >= c[0] ? 1 : 0;
  fit.centroids = {std::min(c[0], c[1]), std::max(c[0], c[1])};
  fit.partition = split_by(scores, PartitionMethod::kmeans, 0.5 * (c[0] + c[1]),
                           [&](std::size_t i) { return assign[i] == high; });
  return fit;
}

Partition kmeans2_partition(std::span<const double> scores) { return kmeans2_fit(scores).partition; }

namespace {

double log_normal_pdf(double x, double mean, double variance) {
  const double diff = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + diff * diff / variance);
}

// Responsibility of component 1 at x, and log p(x).
std::pair<double, double> posterior(const Gmm2Fit& fit, double x) {
  const double a = std::log(fit.weights[0]) + log_normal_pdf(x, fit.means[0], fit.variances[0]);
  const double b = std::log(fit.weights[1]) + log_normal_pdf(x, fit.means[1], fit.variances[1]);
  const double top = std::max(a, b);
  const double log_total = top + std::log(std::exp(a - top) + std::exp(b - top));
  return {std::exp(b - log_total), log_total};
}

double e_step(Gmm2Fit& fit, std::span<const double> values) {
  double ll = 0.0;
  fit.posterior_high.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [r, lp] = posterior(fit, values[i]);
    fit.posterior_high[i] = r;
    ll += lp;
  }
  return ll;
}

void m_step(Gmm2Fit& fit, std::span<const double> values, double variance_floor) {
  const double n = static_cast<double>(values.size());
  for (int k = 0; k < 2; ++k) {
    double mass = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r = k == 1 ? fit.posterior_high[i] : 1.0 - fit.posterior_high[i];
      mass += r;
      sum += r * values[i];
    }
    // A component that lost all mass keeps its previous parameters.
    if (mass < 1e-12) continue;
    const double mean = sum / mass;
    double sq = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r = k == 1 ? fit.posterior_high[i] : 1.0 - fit.posterior_high[i];
      sq += r * (values[i] - mean) * (values[i] - mean);
    }
    fit.means[k] = mean;
    fit.variances[k] = std::max(sq / mass, variance_floor);
    fit.weights[k] = mass / n;
  }
}

}  // namespace

Gmm2Fit gmm2_fit(std::span<const double> values, const GmmOptions& options) {
  check_scores(values, 4, false);
  if (all_identical(values)) throw DegenerateDistribution();

  Gmm2Fit fit;
  fit.means = seed_pair(values);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = std::max(var / static_cast<double>(values.size()), options.variance_floor);
  fit.variances = {var, var};
  fit.weights = {0.5, 0.5};

  bool converged = false;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const double ll = e_step(fit, values);
    if (!std::isfinite(ll)) throw NumericalError("GMM log-likelihood is not finite");
    fit.loglik_trace.push_back(ll);
    fit.iterations = it + 1;
    if (fit.loglik_trace.size() > 1 &&
        std::abs(ll - fit.loglik_trace[fit.loglik_trace.size() - 2]) < options.tolerance) {
      converged = true;
      break;
    }
    m_step(fit, values, options.variance_floor);
  }
  if (!converged) fit.loglik_trace.push_back(e_step(fit, values));

  if (fit.means[0] > fit.means[1]) {
    std::swap(fit.means[0], fit.means[1]);
    std::swap(fit.variances[0], fit.variances[1]);
    std::swap(fit.weights[0], fit.weights[1]);
    for (double& r : fit.posterior_high) r = 1.0 - r;
  }
  return fit;
}

Partition gmm2_partition(std::span<const double> scores, const GmmOptions& options) {
  const Gmm2Fit fit = gmm2_fit(scores, options);
  std::optional<double> threshold;
  double lo = fit.means[0];
  double hi = fit.means[1];
  if (lo < hi && posterior(fit, lo).first < 0.5 && posterior(fit, hi).first >= 0.5) {
    for (int step = 0; step < 100; ++step) {
      const double mid = 0.5 * (lo + hi);
      (posterior(fit, mid).first >= 0.5 ? hi : lo) = mid;
    }
    threshold = hi;
  }
  return split_by(scores, PartitionMethod::gmm, threshold,
                  [&](std::size_t i) { return fit.posterior_high[i] >= 0.5; });
}

Partition partition_from_threshold(std::span<const double> scores, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  return split_by(scores, PartitionMethod::fixed, threshold,
                  [&](std::size_t i) { return scores[i] >= threshold; });
}

}  // namespace pass
