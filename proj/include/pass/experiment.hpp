#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pass/classifier.hpp"
#include "pass/data.hpp"
#include "pass/selectors.hpp"
#include "pass/stats.hpp"

#include <json.hpp>

namespace pass {

inline constexpr const char* kToolVersion = "0.1.0";

enum class NoiseKind { idn, symmetric };

struct DatasetConfig {
  std::size_t n = 5000;
  std::size_t d = 10;
  std::size_t classes = 5;
  double separation = 3.0;
  NoiseKind noise_kind = NoiseKind::idn;
  double noise_rate = 0.4;  // 0 disables noise injection
  double test_fraction = 0.2;
};

enum class Arm { pass, small_loss, none };

std::string_view arm_name(Arm arm);
Arm parse_arm(std::string_view name);

struct ExperimentConfig {
  DatasetConfig dataset;
  TrainConfig train;
  SelectorConfig selector;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  std::vector<Arm> arms{Arm::pass, Arm::small_loss, Arm::none};

  // Throws InvalidArgument naming the offending field.
  void validate() const;
};

// JSON schema: see README. Unknown keys are rejected; missing keys keep
// their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Dataset, noise and split for one seed; every arm of that seed uses this.
struct SeedData {
  LabeledDataset dataset;
  SplitIndices split;
};
SeedData prepare_seed(const DatasetConfig& cfg, std::uint64_t seed);
LabeledDataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed);

struct ArmResult {
  Arm arm = Arm::none;
  std::vector<EpochRecord> records;
  std::vector<double> test_accuracy;
  // Mean over the arm's classifiers of the final-epoch selection quality.
  SelectionQuality final_quality;
  double final_test_accuracy = 0.0;
};

ArmResult run_arm(Arm arm, const SeedData& data, const ExperimentConfig& cfg, std::uint64_t seed);

struct SeedResult {
  std::uint64_t seed = 0;
  double realized_noise_rate = 0.0;
  std::vector<ArmResult> arms;
};

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs seeds on up to `threads` workers; results come back in seed order.
std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1);

SelectionQuality mean_quality(std::span<const EpochRecord> final_epoch);

// records.csv: epoch,classifier,method,threshold,n_clean,n_noisy,precision,
// recall,f1,clean_ratio,train_loss (threshold empty when undefined).
void write_records_csv(std::span<const EpochRecord> records, std::ostream& out);
std::vector<EpochRecord> read_records_csv(std::istream& in);

// accuracy.csv: epoch,test_acc
void write_accuracy_csv(std::span<const double> accuracy, std::ostream& out);

nlohmann::json summarize(const ExperimentConfig& cfg, std::span<const SeedResult> results);

// Writes <out>/seed_<s>/<arm>/{records.csv,accuracy.csv,summary.json} and
// <out>/summary.json. Output depends only on the config.
void write_run_outputs(const ExperimentConfig& cfg, std::span<const SeedResult> results,
                       const std::filesystem::path& out_dir);

struct AblationRow {
  std::uint64_t seed = 0;
  PartitionMethod method = PartitionMethod::otsu;
  double f1 = 0.0;
  double precision = 0.0;
  double clean_ratio = 0.0;
  double test_acc = 0.0;
};

// PASS with each of otsu, kmeans, gmm on the same seeds and data.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::size_t threads = 1);
// ablation.csv: seed,method,f1,precision,clean_ratio,test_acc
void write_ablation_csv(std::span<const AblationRow> rows, std::ostream& out);

struct StatsReport {
  RankTable ranks;
  FriedmanResult friedman;
  double alpha = 0.05;
  double cd = 0.0;
  std::vector<PairComparison> pairs;
  std::vector<std::string> warnings;
};

StatsReport compute_stats(const ScoresTable& table, double alpha);
nlohmann::json stats_to_json(const StatsReport& report);
// cd_diagram.csv: method,mean_rank,cd
void write_cd_diagram_csv(const StatsReport& report, std::ostream& out);

}  // namespace pass
