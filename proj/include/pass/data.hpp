#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pass/numerics.hpp"

namespace pass {

using Label = std::uint32_t;
using IndexList = std::vector<std::size_t>;

// Features plus clean and observed (noisy) labels. noise_mask is the
// experiment's ground truth: mask[i] == 1 iff the observed label differs
// from the clean one.
struct LabeledDataset {
  Matrix features;
  std::vector<Label> clean_labels;
  std::vector<Label> noisy_labels;
  std::vector<std::uint8_t> noise_mask;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  double noise_rate() const;
  bool noise_free() const;
  // Throws InvalidArgument when any invariant is broken.
  void validate() const;

  bool operator==(const LabeledDataset&) const = default;
};

struct SplitIndices {
  IndexList train;
  IndexList test;
};

// C classes with balanced counts (sample i has class i mod C). Means lie on
// a sphere of radius class_separation: mutually orthogonal random directions
// when C <= d, independent random directions otherwise. Unit-variance
// isotropic noise around each mean.
LabeledDataset generate_gaussian_mixture(std::size_t n, std::size_t d, std::size_t class_count,
                                         double class_separation, std::uint64_t seed);

// Per-sample flip probabilities of the instance-dependent model:
// q_i = rate * n * g(x_i) / sum_j g(x_j), clipped to [0, 0.95], with
// g(x) = logistic(w.x + b). The projection w.x is standardised over the
// dataset so the spread of g does not depend on feature scale.
std::vector<double> idn_flip_probabilities(const LabeledDataset& ds, double rate,
                                           std::uint64_t seed);

// Flips sample i with probability q_i; the new label is the arg max of a
// fixed random class projection W x_i over the wrong classes.
LabeledDataset inject_idn_noise(const LabeledDataset& ds, double rate, std::uint64_t seed);

// Exactly round(rate * n) uniformly chosen samples get a uniformly random
// wrong label.
LabeledDataset inject_symmetric_noise(const LabeledDataset& ds, double rate, std::uint64_t seed);

// Stratified by clean label. Per-class test counts follow largest-remainder
// rounding so |test| == round(test_fraction * n). Both lists are sorted.
SplitIndices split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

// CSV: header `id,f0,...,f{d-1},clean_label,noisy_label`, LF line endings,
// rows in id order, features in shortest round-trip form.
void write_dataset_csv(const LabeledDataset& ds, std::ostream& out);
void write_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path);

// class_count defaults to max label + 1 (at least 2). Errors name the line.
LabeledDataset read_dataset_csv(std::istream& in,
                                std::optional<std::size_t> class_count = std::nullopt);
LabeledDataset read_dataset_csv(const std::filesystem::path& path,
                                std::optional<std::size_t> class_count = std::nullopt);

}  // namespace pass
