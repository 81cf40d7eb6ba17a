#include "pass/selectors.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "pass/agreement.hpp"
#include "pass/error.hpp"

namespace pass {

void SelectorConfig::validate() const {
  if (warmup_epochs > total_epochs) throw InvalidArgument("warmup_epochs must not exceed total_epochs");
  if (otsu_bins < 2) throw InvalidArgument("otsu_bins must be >= 2");
}

std::vector<MlpParams> Ensemble::params() const {
  std::vector<MlpParams> out;
  for (const auto& m : members) out.push_back(m.params);
  return out;
}

Ensemble make_ensemble(std::size_t input_dim, std::size_t class_count, const TrainConfig& cfg,
                       std::uint64_t master_seed) {
  cfg.validate();
  Ensemble ensemble;
  ensemble.config = cfg;
  for (std::size_t k = 0; k < kEnsembleSize; ++k) {
    RandomStream rng = derive_stream(master_seed, stream_id(StreamPurpose::init, k));
    ensemble.members[k].params = init_mlp(input_dim, cfg.hidden_sizes, class_count, rng);
    ensemble.members[k].optimizer = SgdState::zeros_like(ensemble.members[k].params);
  }
  return ensemble;
}

std::array<std::size_t, 2> peers_of(std::size_t k) {
  if (k >= kEnsembleSize) throw InvalidArgument("classifier index must be 0, 1 or 2");
  std::array<std::size_t, 2> peers{};
  std::size_t n = 0;
  for (std::size_t j = 0; j < kEnsembleSize; ++j) {
    if (j != k) peers[n++] = j;
  }
  return peers;
}

namespace {

Partition everything_clean(std::size_t n, PartitionMethod method) {
  Partition p;
  p.method = method;
  p.clean.resize(n);
  std::iota(p.clean.begin(), p.clean.end(), std::size_t{0});
  return p;
}

IndexList to_dataset_indices(const IndexList& positions, std::span<const std::size_t> train_indices) {
  IndexList out;
  out.reserve(positions.size());
  for (std::size_t pos : positions) out.push_back(train_indices[pos]);
  return out;
}

EpochRecord make_record(std::size_t epoch, std::size_t classifier, std::string method,
                        const Selection& selection, const LabeledDataset& ds,
                        std::span<const std::size_t> train_indices, double loss) {
  EpochRecord r;
  r.epoch = epoch;
  r.classifier = classifier;
  r.method = std::move(method);
  r.threshold = selection.partition.threshold;
  r.n_clean = selection.partition.clean.size();
  r.n_noisy = selection.partition.noisy.size();
  r.quality = selection_quality(selection.partition, ds.noise_mask, train_indices);
  r.train_loss = loss;
  r.degenerate = selection.degenerate;
  return r;
}

void check_split(const LabeledDataset& ds, const SplitIndices& split) {
  if (split.train.empty()) throw InvalidArgument("empty training split");
  if (split.test.empty()) throw InvalidArgument("empty test split");
  for (std::size_t i : split.train) {
    if (i >= ds.size()) throw InvalidArgument("split index out of range");
  }
  for (std::size_t i : split.test) {
    if (i >= ds.size()) throw InvalidArgument("split index out of range");
  }
}

}  // namespace

Selection partition_scores(std::span<const double> scores, PartitionMethod method,
                           DegeneratePolicy policy, std::size_t otsu_bins) {
  Selection out;
  try {
    switch (method) {
      case PartitionMethod::otsu:
        out.partition = otsu_threshold(scores, otsu_bins);
        break;
      case PartitionMethod::kmeans:
        out.partition = kmeans2_partition(scores);
        break;
      case PartitionMethod::gmm:
        out.partition = gmm2_partition(scores);
        break;
      case PartitionMethod::fixed:
        throw InvalidArgument("a fixed threshold cannot be used as a selection method");
    }
  } catch (const DegenerateDistribution&) {
    if (policy == DegeneratePolicy::halt) throw;
    out.partition = everything_clean(scores.size(), method);
    out.degenerate = true;
  }
  return out;
}

Selection select_from_predictions(std::span<const ProbMatrix> predictions, std::size_t k,
                                  PartitionMethod method, DegeneratePolicy policy,
                                  std::size_t otsu_bins) {
  if (predictions.size() != kEnsembleSize) throw InvalidArgument("need predictions of all three classifiers");
  const auto peers = peers_of(k);
  const AgreementScores scores = agreement_scores(predictions[peers[0]], predictions[peers[1]], peers);
  Selection out = partition_scores(scores.scores, method, policy, otsu_bins);
  out.peers = scores.peer_ids;
  return out;
}

Selection pass_select(const Ensemble& ensemble, const LabeledDataset& ds,
                      std::span<const std::size_t> train_indices, std::size_t k,
                      PartitionMethod method, DegeneratePolicy policy, std::size_t otsu_bins) {
  const auto peers = peers_of(k);
  const ProbMatrix a = predict_all(ensemble.members[peers[0]].params, ds, train_indices);
  const ProbMatrix b = predict_all(ensemble.members[peers[1]].params, ds, train_indices);
  const AgreementScores scores = agreement_scores(a, b, peers);
  Selection out = partition_scores(scores.scores, method, policy, otsu_bins);
  out.peers = peers;
  return out;
}

PassRun pass_train(const LabeledDataset& ds, const SplitIndices& split,
                   const SelectorConfig& selector, const TrainConfig& train,
                   std::uint64_t master_seed) {
  selector.validate();
  ds.validate();
  check_split(ds, split);
  PassRun run;
  run.ensemble = make_ensemble(ds.dim(), ds.class_count, train, master_seed);
  const std::span<const std::size_t> train_indices = split.train;
  const Selection everything{everything_clean(train_indices.size(), PartitionMethod::fixed), {0, 0}, false};

  for (std::size_t epoch = 0; epoch < selector.total_epochs; ++epoch) {
    const bool warmup = epoch < selector.warmup_epochs;
    std::array<Selection, kEnsembleSize> selections;
    if (warmup) {
      selections.fill(everything);
    } else {
      std::vector<ProbMatrix> snapshot;
      for (const auto& member : run.ensemble.members) {
        snapshot.push_back(predict_all(member.params, ds, train_indices));
      }
      for (std::size_t k = 0; k < kEnsembleSize; ++k) {
        selections[k] = select_from_predictions(snapshot, k, selector.partition_method,
                                                selector.degenerate_policy, selector.otsu_bins);
      }
    }

    std::array<IndexList, kEnsembleSize> subsets;
    for (std::size_t k = 0; k < kEnsembleSize; ++k) {
      subsets[k] = to_dataset_indices(selections[k].partition.clean, train_indices);
      if (subsets[k].empty()) throw NumericalError("selection left classifier " + std::to_string(k) + " with no samples");
    }
    std::array<double, kEnsembleSize> losses{};
    auto train_member = [&](std::size_t k) {
      RandomStream rng = derive_stream(master_seed, stream_id(StreamPurpose::shuffle, epoch, k));
      EnsembleMember& m = run.ensemble.members[k];
      losses[k] = train_epoch(m.params, m.optimizer, ds, subsets[k], train, rng);
    };
    if (selector.parallel) {
      std::vector<std::jthread> workers;
      std::array<std::exception_ptr, kEnsembleSize> errors{};
      for (std::size_t k = 0; k < kEnsembleSize; ++k) {
        workers.emplace_back([&, k] {
          try {
            train_member(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
      workers.clear();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t k = 0; k < kEnsembleSize; ++k) train_member(k);
    }

    for (std::size_t k = 0; k < kEnsembleSize; ++k) {
      const std::string method = warmup ? "warmup" : std::string(method_name(selector.partition_method));
      EpochRecord r = make_record(epoch, k, method, selections[k], ds, train_indices, losses[k]);
      if (!warmup) r.peers = selections[k].peers;
      run.records.push_back(std::move(r));
    }
    run.ensemble.epoch = epoch + 1;
    const std::vector<MlpParams> members = run.ensemble.params();
    run.test_accuracy.push_back(test_accuracy(members, ds, split.test));
  }
  return run;
}

Selection small_loss_select(const MlpParams& params, const LabeledDataset& ds,
                            std::span<const std::size_t> train_indices) {
  const ProbMatrix probs = predict_all(params, ds, train_indices);
  std::vector<double> losses(train_indices.size());
  for (std::size_t r = 0; r < train_indices.size(); ++r) {
    losses[r] = cross_entropy(probs.row(r), ds.noisy_labels[train_indices[r]]);
  }
  Selection out;
  const auto [lo, hi] = std::minmax_element(losses.begin(), losses.end());
  if (losses.size() < 4 || !(*hi > *lo)) {
    out.partition = everything_clean(losses.size(), PartitionMethod::gmm);
    out.degenerate = true;
    return out;
  }
  const double lo_value = *lo;
  const double span = *hi - *lo;
  for (double& v : losses) v = (v - lo_value) / span;
  Gmm2Fit fit;
  try {
    fit = gmm2_fit(losses);
  } catch (const DegenerateDistribution&) {
    out.partition = everything_clean(losses.size(), PartitionMethod::gmm);
    out.degenerate = true;
    return out;
  }
  out.partition.method = PartitionMethod::gmm;
  for (std::size_t r = 0; r < losses.size(); ++r) {
    (1.0 - fit.posterior_high[r] >= 0.5 ? out.partition.clean : out.partition.noisy).push_back(r);
  }
  return out;
}

BaselineRun baseline_train(const LabeledDataset& ds, const SplitIndices& split,
                           const SelectorConfig& selector, const TrainConfig& train,
                           std::uint64_t master_seed, BaselineSelector kind) {
  selector.validate();
  train.validate();
  ds.validate();
  check_split(ds, split);
  BaselineRun run;
  RandomStream init_rng = derive_stream(master_seed, stream_id(StreamPurpose::init, 0));
  run.params = init_mlp(ds.dim(), train.hidden_sizes, ds.class_count, init_rng);
  SgdState state = SgdState::zeros_like(run.params);
  const std::span<const std::size_t> train_indices = split.train;

  for (std::size_t epoch = 0; epoch < selector.total_epochs; ++epoch) {
    const bool select = kind == BaselineSelector::small_loss && epoch >= selector.warmup_epochs;
    Selection selection;
    std::string method;
    if (select) {
      selection = small_loss_select(run.params, ds, train_indices);
      method = "small_loss";
    } else {
      selection.partition = everything_clean(train_indices.size(), PartitionMethod::fixed);
      method = kind == BaselineSelector::none ? "none" : "warmup";
    }
    const IndexList subset = to_dataset_indices(selection.partition.clean, train_indices);
    if (subset.empty()) throw NumericalError("small-loss selection left no samples");
    RandomStream rng = derive_stream(master_seed, stream_id(StreamPurpose::shuffle, epoch, 0));
    const double loss = train_epoch(run.params, state, ds, subset, train, rng);
    run.records.push_back(make_record(epoch, 0, method, selection, ds, train_indices, loss));
    run.test_accuracy.push_back(test_accuracy(run.params, ds, split.test));
  }
  return run;
}

std::vector<EpochRecord> final_records(std::span<const EpochRecord> records) {
  std::vector<EpochRecord> out;
  if (records.empty()) return out;
  const std::size_t last = records.back().epoch;
  for (const auto& r : records) {
    if (r.epoch == last) out.push_back(r);
  }
  return out;
}

}  // namespace pass
