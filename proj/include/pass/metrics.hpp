#pragma once

#include <span>
#include <vector>

#include "pass/classifier.hpp"
#include "pass/data.hpp"
#include "pass/partition.hpp"

namespace pass {

// Positive class = truly clean. precision is the purity of the selected set,
// recall the share of clean samples that were selected, clean_ratio the
// share of the training set that was selected.
struct SelectionQuality {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double clean_ratio = 0.0;
  bool empty_selection = false;  // precision undefined, reported as 0
  std::size_t selected = 0;
  std::size_t selected_clean = 0;
  std::size_t truly_clean = 0;
};

// `selected` holds dataset indices (a subset of train_indices).
SelectionQuality selection_quality(std::span<const std::size_t> selected,
                                   std::span<const std::uint8_t> noise_mask,
                                   std::span<const std::size_t> train_indices);

// Partition positions refer to train_indices.
SelectionQuality selection_quality(const Partition& partition,
                                   std::span<const std::uint8_t> noise_mask,
                                   std::span<const std::size_t> train_indices);

// Arg max of the mean probability vector over `members` (ties resolve to the
// lowest class index); accuracy against the clean labels.
double test_accuracy(std::span<const MlpParams> members, const LabeledDataset& ds,
                     std::span<const std::size_t> test_indices);
double test_accuracy(const MlpParams& model, const LabeledDataset& ds,
                     std::span<const std::size_t> test_indices);

std::size_t argmax(std::span<const double> values);

}  // namespace pass
