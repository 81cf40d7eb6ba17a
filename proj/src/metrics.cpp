#include "pass/metrics.hpp"

#include <algorithm>

#include "pass/error.hpp"

namespace pass {

SelectionQuality selection_quality(std::span<const std::size_t> selected,
                                   std::span<const std::uint8_t> noise_mask,
                                   std::span<const std::size_t> train_indices) {
  SelectionQuality q;
  for (std::size_t i : train_indices) {
    if (i >= noise_mask.size()) throw InvalidArgument("training index outside the noise mask");
    if (noise_mask[i] == 0) ++q.truly_clean;
  }
  for (std::size_t i : selected) {
    if (i >= noise_mask.size()) throw InvalidArgument("selected index outside the noise mask");
    if (noise_mask[i] == 0) ++q.selected_clean;
  }
  q.selected = selected.size();
  q.empty_selection = q.selected == 0;
  q.precision = q.empty_selection ? 0.0 : static_cast<double>(q.selected_clean) / static_cast<double>(q.selected);
  q.recall = q.truly_clean == 0 ? 0.0 : static_cast<double>(q.selected_clean) / static_cast<double>(q.truly_clean);
  q.f1 = q.precision + q.recall > 0.0 ? 2.0 * q.precision * q.recall / (q.precision + q.recall) : 0.0;
  q.clean_ratio = train_indices.empty() ? 0.0
                                        : static_cast<double>(q.selected) / static_cast<double>(train_indices.size());
  return q;
}

SelectionQuality selection_quality(const Partition& partition,
                                   std::span<const std::uint8_t> noise_mask,
                                   std::span<const std::size_t> train_indices) {
  if (partition.clean.size() + partition.noisy.size() != train_indices.size()) {
    throw InvalidArgument("partition does not cover the training set");
  }
  IndexList selected;
  selected.reserve(partition.clean.size());
  for (std::size_t pos : partition.clean) {
    if (pos >= train_indices.size()) throw InvalidArgument("partition position out of range");
    selected.push_back(train_indices[pos]);
  }
  return selection_quality(selected, noise_mask, train_indices);
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

double test_accuracy(std::span<const MlpParams> members, const LabeledDataset& ds,
                     std::span<const std::size_t> test_indices) {
  if (members.empty()) throw InvalidArgument("no classifiers to evaluate");
  if (test_indices.empty()) throw InvalidArgument("empty test set");
  std::vector<ProbMatrix> probs;
  probs.reserve(members.size());
  for (const MlpParams& m : members) probs.push_back(predict_all(m, ds, test_indices));
  const std::size_t classes = probs.front().cols();
  std::vector<double> mean(classes);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test_indices.size(); ++r) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (const ProbMatrix& p : probs) {
      for (std::size_t c = 0; c < classes; ++c) mean[c] += p.row(r)[c];
    }
    if (argmax(mean) == ds.clean_labels[test_indices[r]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_indices.size());
}

double test_accuracy(const MlpParams& model, const LabeledDataset& ds,
                     std::span<const std::size_t> test_indices) {
  return test_accuracy(std::span<const MlpParams>(&model, 1), ds, test_indices);
}

}  // namespace pass
