#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pass/classifier.hpp"
#include "pass/data.hpp"
#include "pass/metrics.hpp"
#include "pass/partition.hpp"

namespace pass {

enum class DegeneratePolicy { all_clean, halt };

struct SelectorConfig {
  std::size_t warmup_epochs = 10;
  std::size_t total_epochs = 50;
  PartitionMethod partition_method = PartitionMethod::otsu;
  DegeneratePolicy degenerate_policy = DegeneratePolicy::all_clean;
  std::size_t otsu_bins = kDefaultOtsuBins;
  // Train the three classifiers of an epoch on separate threads. Results
  // are identical to sequential mode.
  bool parallel = false;

  void validate() const;
};

constexpr std::size_t kEnsembleSize = 3;

struct EnsembleMember {
  MlpParams params;
  SgdState optimizer;
};

// Three independently initialised classifiers that take turns being the
// trained model and the two peers.
struct Ensemble {
  std::array<EnsembleMember, kEnsembleSize> members;
  TrainConfig config;
  std::size_t epoch = 0;

  std::vector<MlpParams> params() const;
};

// Member k is initialised from stream (init, k) of the master seed.
Ensemble make_ensemble(std::size_t input_dim, std::size_t class_count, const TrainConfig& cfg,
                       std::uint64_t master_seed);

// The two classifiers that score samples for classifier k.
std::array<std::size_t, 2> peers_of(std::size_t k);

struct Selection {
  Partition partition;  // positions refer to the scored index list
  std::array<std::size_t, 2> peers{0, 0};
  bool degenerate = false;
};

// Applies `method` to scores; on a degenerate distribution either selects
// everything (all_clean) or rethrows (halt).
Selection partition_scores(std::span<const double> scores, PartitionMethod method,
                           DegeneratePolicy policy, std::size_t otsu_bins = kDefaultOtsuBins);

// Selection for classifier k from a prediction snapshot of all members
// (predictions[j] = member j over the scored index list). Member k's own
// predictions are never read.
Selection select_from_predictions(std::span<const ProbMatrix> predictions, std::size_t k,
                                  PartitionMethod method, DegeneratePolicy policy,
                                  std::size_t otsu_bins = kDefaultOtsuBins);

// Scores train_indices by the agreement of k's peers and partitions them.
Selection pass_select(const Ensemble& ensemble, const LabeledDataset& ds,
                      std::span<const std::size_t> train_indices, std::size_t k,
                      PartitionMethod method, DegeneratePolicy policy = DegeneratePolicy::all_clean,
                      std::size_t otsu_bins = kDefaultOtsuBins);

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t classifier = 0;
  std::string method;  // warmup | otsu | kmeans | gmm | small_loss | none
  std::optional<double> threshold;
  std::size_t n_clean = 0;
  std::size_t n_noisy = 0;
  SelectionQuality quality;
  double train_loss = 0.0;
  std::optional<std::array<std::size_t, 2>> peers;
  bool degenerate = false;
};

struct PassRun {
  Ensemble ensemble;
  std::vector<EpochRecord> records;
  std::vector<double> test_accuracy;  // ensemble accuracy after each epoch
};

// Warmup: every member trains warmup_epochs on all training samples. Each
// later epoch snapshots all three members' predictions, selects a clean
// subset for every member from its peers' agreement, then trains each
// member on its own clean subset. Deterministic given master_seed.
PassRun pass_train(const LabeledDataset& ds, const SplitIndices& split,
                   const SelectorConfig& selector, const TrainConfig& train,
                   std::uint64_t master_seed);

// Small-loss trick: per-sample cross-entropy against the noisy labels,
// min-max normalised, two-component GMM; clean = posterior of the
// lower-mean component >= 0.5. Degenerate losses select everything.
Selection small_loss_select(const MlpParams& params, const LabeledDataset& ds,
                            std::span<const std::size_t> train_indices);

enum class BaselineSelector { none, small_loss };

struct BaselineRun {
  MlpParams params;
  std::vector<EpochRecord> records;
  std::vector<double> test_accuracy;
};

// One classifier with the streams of ensemble member 0. `none` trains on all
// noisy data for total_epochs; `small_loss` warms up like PASS and then
// trains on its own small-loss selection each epoch.
BaselineRun baseline_train(const LabeledDataset& ds, const SplitIndices& split,
                           const SelectorConfig& selector, const TrainConfig& train,
                           std::uint64_t master_seed, BaselineSelector kind);

// The final-epoch records of a run (one per classifier).
std::vector<EpochRecord> final_records(std::span<const EpochRecord> records);

}  // namespace pass
