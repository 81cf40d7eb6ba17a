#include "pass/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pass/error.hpp"
#include "pass/text.hpp"

namespace pass {

using nlohmann::json;

std::string_view arm_name(Arm arm) {
  switch (arm) {
    case Arm::pass:
      return "pass";
    case Arm::small_loss:
      return "small_loss";
    case Arm::none:
      return "none";
  }
  return "unknown";
}

Arm parse_arm(std::string_view name) {
  if (name == "pass") return Arm::pass;
  if (name == "small_loss") return Arm::small_loss;
  if (name == "none") return Arm::none;
  throw InvalidArgument("unknown arm '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  const DatasetConfig& ds = dataset;
  if (ds.classes < 2) throw InvalidArgument("dataset.classes must be >= 2");
  if (ds.d < 2) throw InvalidArgument("dataset.d must be >= 2");
  if (ds.n < ds.classes) throw InvalidArgument("dataset.n must be >= dataset.classes");
  if (!(ds.separation > 0.0) || !std::isfinite(ds.separation)) {
    throw InvalidArgument("dataset.separation must be positive");
  }
  if (!(ds.noise_rate >= 0.0 && ds.noise_rate <= 0.95)) {
    throw InvalidArgument("noise_rate out of range [0, 0.95]");
  }
  if (!(ds.test_fraction > 0.0 && ds.test_fraction < 1.0)) {
    throw InvalidArgument("dataset.test_fraction must lie in (0, 1)");
  }
  train.validate();
  selector.validate();
  if (selector.partition_method == PartitionMethod::fixed) {
    throw InvalidArgument("selector.partition_method must be otsu, kmeans or gmm");
  }
  if (seeds.empty()) throw InvalidArgument("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InvalidArgument("seeds must be distinct");
  }
  if (arms.empty()) throw InvalidArgument("arms must not be empty");
}

namespace {

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config field " + where + "." + key + " has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument("config section " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument("unknown config key " + where + "." + key);
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  reject_unknown(j, {"dataset", "train", "selector", "seeds", "output_dir", "arms"}, "config");
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d, {"n", "d", "classes", "separation", "noise_kind", "noise_rate", "test_fraction"},
                   "dataset");
    read_field(d, "n", cfg.dataset.n, "dataset");
    read_field(d, "d", cfg.dataset.d, "dataset");
    read_field(d, "classes", cfg.dataset.classes, "dataset");
    read_field(d, "separation", cfg.dataset.separation, "dataset");
    read_field(d, "noise_rate", cfg.dataset.noise_rate, "dataset");
    read_field(d, "test_fraction", cfg.dataset.test_fraction, "dataset");
    std::string kind = "idn";
    read_field(d, "noise_kind", kind, "dataset");
    if (kind == "idn") {
      cfg.dataset.noise_kind = NoiseKind::idn;
    } else if (kind == "symmetric") {
      cfg.dataset.noise_kind = NoiseKind::symmetric;
    } else {
      throw InvalidArgument("dataset.noise_kind must be idn or symmetric");
    }
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"hidden_sizes", "learning_rate", "momentum", "batch_size", "weight_decay"}, "train");
    read_field(t, "hidden_sizes", cfg.train.hidden_sizes, "train");
    read_field(t, "learning_rate", cfg.train.learning_rate, "train");
    read_field(t, "momentum", cfg.train.momentum, "train");
    read_field(t, "batch_size", cfg.train.batch_size, "train");
    read_field(t, "weight_decay", cfg.train.weight_decay, "train");
  }
  if (j.contains("selector")) {
    const json& s = j.at("selector");
    reject_unknown(s, {"warmup_epochs", "total_epochs", "partition_method", "degenerate_policy", "otsu_bins"},
                   "selector");
    read_field(s, "warmup_epochs", cfg.selector.warmup_epochs, "selector");
    read_field(s, "total_epochs", cfg.selector.total_epochs, "selector");
    read_field(s, "otsu_bins", cfg.selector.otsu_bins, "selector");
    std::string method(method_name(cfg.selector.partition_method));
    read_field(s, "partition_method", method, "selector");
    cfg.selector.partition_method = parse_method(method);
    std::string policy = "all_clean";
    read_field(s, "degenerate_policy", policy, "selector");
    if (policy == "all_clean") {
      cfg.selector.degenerate_policy = DegeneratePolicy::all_clean;
    } else if (policy == "halt") {
      cfg.selector.degenerate_policy = DegeneratePolicy::halt;
    } else {
      throw InvalidArgument("selector.degenerate_policy must be all_clean or halt");
    }
  }
  read_field(j, "seeds", cfg.seeds, "config");
  read_field(j, "output_dir", cfg.output_dir, "config");
  if (j.contains("arms")) {
    std::vector<std::string> names;
    read_field(j, "arms", names, "config");
    cfg.arms.clear();
    for (const auto& name : names) cfg.arms.push_back(parse_arm(name));
  }
  cfg.train.epochs = cfg.selector.total_epochs;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json arms = json::array();
  for (Arm a : cfg.arms) arms.push_back(std::string(arm_name(a)));
  return json{
      {"dataset",
       {{"n", cfg.dataset.n},
        {"d", cfg.dataset.d},
        {"classes", cfg.dataset.classes},
        {"separation", cfg.dataset.separation},
        {"noise_kind", cfg.dataset.noise_kind == NoiseKind::idn ? "idn" : "symmetric"},
        {"noise_rate", cfg.dataset.noise_rate},
        {"test_fraction", cfg.dataset.test_fraction}}},
      {"train",
       {{"hidden_sizes", cfg.train.hidden_sizes},
        {"learning_rate", cfg.train.learning_rate},
        {"momentum", cfg.train.momentum},
        {"batch_size", cfg.train.batch_size},
        {"weight_decay", cfg.train.weight_decay}}},
      {"selector",
       {{"warmup_epochs", cfg.selector.warmup_epochs},
        {"total_epochs", cfg.selector.total_epochs},
        {"partition_method", std::string(method_name(cfg.selector.partition_method))},
        {"degenerate_policy",
         cfg.selector.degenerate_policy == DegeneratePolicy::all_clean ? "all_clean" : "halt"},
        {"otsu_bins", cfg.selector.otsu_bins}}},
      {"seeds", cfg.seeds},
      {"output_dir", cfg.output_dir},
      {"arms", arms},
  };
}

LabeledDataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  LabeledDataset clean = generate_gaussian_mixture(cfg.n, cfg.d, cfg.classes, cfg.separation, seed);
  if (cfg.noise_rate == 0.0) return clean;
  return cfg.noise_kind == NoiseKind::idn ? inject_idn_noise(clean, cfg.noise_rate, seed)
                                          : inject_symmetric_noise(clean, cfg.noise_rate, seed);
}

SeedData prepare_seed(const DatasetConfig& cfg, std::uint64_t seed) {
  SeedData data;
  data.dataset = make_dataset(cfg, seed);
  data.split = split(data.dataset, cfg.test_fraction, seed);
  return data;
}

SelectionQuality mean_quality(std::span<const EpochRecord> final_epoch) {
  SelectionQuality q;
  if (final_epoch.empty()) return q;
  for (const auto& r : final_epoch) {
    q.precision += r.quality.precision;
    q.recall += r.quality.recall;
    q.f1 += r.quality.f1;
    q.clean_ratio += r.quality.clean_ratio;
    q.empty_selection = q.empty_selection || r.quality.empty_selection;
  }
  const double n = static_cast<double>(final_epoch.size());
  q.precision /= n;
  q.recall /= n;
  q.f1 /= n;
  q.clean_ratio /= n;
  return q;
}

ArmResult run_arm(Arm arm, const SeedData& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  ArmResult out;
  out.arm = arm;
  if (arm == Arm::pass) {
    PassRun run = pass_train(data.dataset, data.split, cfg.selector, cfg.train, seed);
    out.records = std::move(run.records);
    out.test_accuracy = std::move(run.test_accuracy);
  } else {
    BaselineRun run = baseline_train(data.dataset, data.split, cfg.selector, cfg.train, seed,
                                     arm == Arm::none ? BaselineSelector::none : BaselineSelector::small_loss);
    out.records = std::move(run.records);
    out.test_accuracy = std::move(run.test_accuracy);
  }
  out.final_quality = mean_quality(final_records(out.records));
  out.final_test_accuracy = out.test_accuracy.empty() ? 0.0 : out.test_accuracy.back();
  return out;
}

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const SeedData data = prepare_seed(cfg.dataset, seed);
  SeedResult result;
  result.seed = seed;
  result.realized_noise_rate = data.dataset.noise_rate();
  for (Arm arm : cfg.arms) result.arms.push_back(run_arm(arm, data, cfg, seed));
  return result;
}

namespace {

// Runs job(i) for i in [0, count) on up to `threads` workers.
template <typename Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string optional_number(const std::optional<double>& v) {
  return v ? text::format_double(*v) : std::string();
}

}  // namespace

std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<SeedResult> results(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) { results[i] = run_seed(cfg, cfg.seeds[i]); });
  return results;
}

void write_records_csv(std::span<const EpochRecord> records, std::ostream& out) {
  out << "epoch,classifier,method,threshold,n_clean,n_noisy,precision,recall,f1,clean_ratio,train_loss\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << r.classifier << ',' << r.method << ',' << optional_number(r.threshold) << ','
        << r.n_clean << ',' << r.n_noisy << ',' << text::format_double(r.quality.precision) << ','
        << text::format_double(r.quality.recall) << ',' << text::format_double(r.quality.f1) << ','
        << text::format_double(r.quality.clean_ratio) << ',' << text::format_double(r.train_loss) << '\n';
  }
}

std::vector<EpochRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) ||
      line != "epoch,classifier,method,threshold,n_clean,n_noisy,precision,recall,f1,clean_ratio,train_loss") {
    throw ParseError("malformed records header", line_no);
  }
  std::vector<EpochRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split(line);
    if (f.size() != 11) throw ParseError("expected 11 columns", line_no);
    EpochRecord r;
    const auto epoch = text::parse_int(f[0]);
    const auto classifier = text::parse_int(f[1]);
    const auto n_clean = text::parse_int(f[4]);
    const auto n_noisy = text::parse_int(f[5]);
    const auto p = text::parse_double(f[6]);
    const auto rc = text::parse_double(f[7]);
    const auto f1 = text::parse_double(f[8]);
    const auto ratio = text::parse_double(f[9]);
    const auto loss = text::parse_double(f[10]);
    if (!epoch || !classifier || !n_clean || !n_noisy || !p || !rc || !f1 || !ratio || !loss) {
      throw ParseError("malformed record", line_no);
    }
    r.epoch = static_cast<std::size_t>(*epoch);
    r.classifier = static_cast<std::size_t>(*classifier);
    r.method = std::string(f[2]);
    if (!f[3].empty()) {
      const auto t = text::parse_double(f[3]);
      if (!t) throw ParseError("malformed threshold", line_no);
      r.threshold = *t;
    }
    r.n_clean = static_cast<std::size_t>(*n_clean);
    r.n_noisy = static_cast<std::size_t>(*n_noisy);
    r.quality.precision = *p;
    r.quality.recall = *rc;
    r.quality.f1 = *f1;
    r.quality.clean_ratio = *ratio;
    r.quality.selected = r.n_clean;
    r.train_loss = *loss;
    records.push_back(std::move(r));
  }
  return records;
}

void write_accuracy_csv(std::span<const double> accuracy, std::ostream& out) {
  out << "epoch,test_acc\n";
  for (std::size_t e = 0; e < accuracy.size(); ++e) out << e << ',' << text::format_double(accuracy[e]) << '\n';
}

namespace {

json quality_json(const SelectionQuality& q) {
  return json{{"precision", q.precision}, {"recall", q.recall}, {"f1", q.f1}, {"clean_ratio", q.clean_ratio}};
}

json mean_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  // Sample standard deviation; 0 for a single seed.
  const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  return json{{"mean", mean}, {"std", sd}};
}

json arm_summary(const ArmResult& arm) {
  return json{{"final_selection", quality_json(arm.final_quality)},
              {"final_test_accuracy", arm.final_test_accuracy},
              {"epochs", arm.test_accuracy.size()}};
}

}  // namespace

json summarize(const ExperimentConfig& cfg, std::span<const SeedResult> results) {
  json per_seed = json::array();
  for (const auto& seed : results) {
    json arms = json::object();
    for (const auto& arm : seed.arms) arms[std::string(arm_name(arm.arm))] = arm_summary(arm);
    per_seed.push_back(json{{"seed", seed.seed}, {"realized_noise_rate", seed.realized_noise_rate}, {"arms", arms}});
  }
  json aggregate = json::object();
  for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
    std::vector<double> f1, precision, recall, ratio, acc;
    for (const auto& seed : results) {
      const ArmResult& arm = seed.arms[a];
      f1.push_back(arm.final_quality.f1);
      precision.push_back(arm.final_quality.precision);
      recall.push_back(arm.final_quality.recall);
      ratio.push_back(arm.final_quality.clean_ratio);
      acc.push_back(arm.final_test_accuracy);
    }
    aggregate[std::string(arm_name(cfg.arms[a]))] =
        json{{"f1", mean_std(f1)},
             {"precision", mean_std(precision)},
             {"recall", mean_std(recall)},
             {"clean_ratio", mean_std(ratio)},
             {"test_accuracy", mean_std(acc)}};
  }
  return json{{"tool_version", kToolVersion},
              {"config", config_to_json(cfg)},
              {"per_seed", per_seed},
              {"aggregate", aggregate}};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_run_outputs(const ExperimentConfig& cfg, std::span<const SeedResult> results,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& seed : results) {
    for (const auto& arm : seed.arms) {
      const auto dir = out_dir / ("seed_" + std::to_string(seed.seed)) / std::string(arm_name(arm.arm));
      std::filesystem::create_directories(dir);
      std::ostringstream records;
      write_records_csv(arm.records, records);
      write_text(dir / "records.csv", records.str());
      std::ostringstream accuracy;
      write_accuracy_csv(arm.test_accuracy, accuracy);
      write_text(dir / "accuracy.csv", accuracy.str());
      json summary = arm_summary(arm);
      summary["seed"] = seed.seed;
      summary["arm"] = std::string(arm_name(arm.arm));
      write_text(dir / "summary.json", summary.dump(2) + "\n");
    }
  }
  write_text(out_dir / "summary.json", summarize(cfg, results).dump(2) + "\n");
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  constexpr std::array<PartitionMethod, 3> kMethods{PartitionMethod::otsu, PartitionMethod::kmeans,
                                                    PartitionMethod::gmm};
  std::vector<AblationRow> rows(cfg.seeds.size() * kMethods.size());
  parallel_for(cfg.seeds.size(), threads, [&](std::size_t s) {
    const std::uint64_t seed = cfg.seeds[s];
    const SeedData data = prepare_seed(cfg.dataset, seed);
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      ExperimentConfig variant = cfg;
      variant.selector.partition_method = kMethods[m];
      const ArmResult arm = run_arm(Arm::pass, data, variant, seed);
      rows[s * kMethods.size() + m] = AblationRow{seed,
                                                  kMethods[m],
                                                  arm.final_quality.f1,
                                                  arm.final_quality.precision,
                                                  arm.final_quality.clean_ratio,
                                                  arm.final_test_accuracy};
    }
  });
  return rows;
}

void write_ablation_csv(std::span<const AblationRow> rows, std::ostream& out) {
  out << "seed,method,f1,precision,clean_ratio,test_acc\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << method_name(r.method) << ',' << text::format_double(r.f1) << ','
        << text::format_double(r.precision) << ',' << text::format_double(r.clean_ratio) << ','
        << text::format_double(r.test_acc) << '\n';
  }
}

StatsReport compute_stats(const ScoresTable& table, double alpha) {
  StatsReport report;
  report.alpha = alpha;
  const std::size_t k = table.methods.size();
  // Validate the q-table lookup first so unsupported inputs fail fast.
  (void)nemenyi_q(k, alpha);
  report.ranks = rank_rows(table, true);
  report.friedman = friedman(report.ranks);
  report.cd = nemenyi_cd(k, report.ranks.dataset_count(), alpha);
  report.pairs = nemenyi_pairwise(report.ranks.mean_ranks(), report.cd);
  if (report.friedman.approximation_warning) {
    report.warnings.push_back(report.ranks.dataset_count() < 5 ? "χ² approximation unreliable for small N"
                                                               : "χ² approximation unreliable for k < 3");
  }
  return report;
}

json stats_to_json(const StatsReport& report) {
  json mean_ranks = json::object();
  const auto means = report.ranks.mean_ranks();
  for (std::size_t j = 0; j < means.size(); ++j) mean_ranks[report.ranks.methods[j]] = means[j];
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back(json{{"a", report.ranks.methods[p.a]},
                         {"b", report.ranks.methods[p.b]},
                         {"rank_gap", p.rank_gap},
                         {"cd", p.cd},
                         {"significant", p.significant}});
  }
  return json{{"statistic", report.friedman.statistic},
              {"degrees_of_freedom", report.friedman.degrees_of_freedom},
              {"p_value", report.friedman.p_value},
              {"alpha", report.alpha},
              {"datasets", report.ranks.dataset_count()},
              {"methods", report.ranks.methods},
              {"mean_ranks", mean_ranks},
              {"cd", report.cd},
              {"pairs", pairs},
              {"warnings", report.warnings}};
}

void write_cd_diagram_csv(const StatsReport& report, std::ostream& out) {
  out << "method,mean_rank,cd\n";
  const auto means = report.ranks.mean_ranks();
  for (std::size_t j = 0; j < means.size(); ++j) {
    out << report.ranks.methods[j] << ',' << text::format_double(means[j]) << ','
        << text::format_double(report.cd) << '\n';
  }
}

}  // namespace pass
