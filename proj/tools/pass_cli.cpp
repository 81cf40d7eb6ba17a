// Command-line front end: generate | run | ablate | stats.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pass/error.hpp"
#include "pass/experiment.hpp"
#include "pass/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string out;
  std::string seeds;
  std::string scores;
  double alpha = 0.05;
  std::size_t threads = 1;
};

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  for (auto field : pass::text::split(list)) {
    const auto v = pass::text::parse_int(pass::text::trim(field));
    if (!v || *v < 0) throw pass::InvalidArgument("--seeds expects a comma-separated list of non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(*v));
  }
  return seeds;
}

pass::ExperimentConfig resolve_config(const Options& opt) {
  if (opt.config.empty()) throw pass::InvalidArgument("--config is required");
  pass::ExperimentConfig cfg = pass::load_config(opt.config);
  if (!opt.seeds.empty()) cfg.seeds = parse_seeds(opt.seeds);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pass::Error("cannot open " + path.string() + " for writing");
  out << content;
}

void write_timing(const fs::path& dir, double seconds, std::size_t threads) {
  const json timing{{"wall_clock_seconds", seconds}, {"threads", threads}, {"tool_version", pass::kToolVersion}};
  write_file(dir / "timing.json", timing.dump(2) + "\n");
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_generate(const Options& opt) {
  pass::ExperimentConfig cfg = resolve_config(opt);
  fs::path target = opt.out.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out);
  if (target.extension() != ".csv") target /= "dataset.csv";
  for (std::uint64_t seed : cfg.seeds) {
    const pass::LabeledDataset ds = pass::make_dataset(cfg.dataset, seed);
    fs::path path = target;
    if (cfg.seeds.size() > 1) {
      path.replace_filename(target.stem().string() + "_seed_" + std::to_string(seed) + ".csv");
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    pass::write_dataset_csv(ds, path);
    if (cfg.seeds.size() > 1) std::cout << "seed=" << seed << ' ';
    std::cout << "realized_noise_rate=" << pass::text::format_short(ds.noise_rate()) << '\n';
  }
  return 0;
}

int cmd_run(const Options& opt) {
  const pass::ExperimentConfig cfg = resolve_config(opt);
  const auto start = std::chrono::steady_clock::now();
  const auto results = pass::run_experiment(cfg, opt.threads);
  pass::write_run_outputs(cfg, results, cfg.output_dir);
  write_timing(cfg.output_dir, elapsed_since(start), opt.threads);
  for (const auto& seed : results) {
    std::cout << "seed=" << seed.seed;
    for (const auto& arm : seed.arms) {
      std::cout << ' ' << pass::arm_name(arm.arm) << ".f1=" << pass::text::format_short(arm.final_quality.f1) << ' '
                << pass::arm_name(arm.arm) << ".acc=" << pass::text::format_short(arm.final_test_accuracy);
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_ablate(const Options& opt) {
  const pass::ExperimentConfig cfg = resolve_config(opt);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = pass::run_ablation(cfg, opt.threads);
  std::ostringstream csv;
  pass::write_ablation_csv(rows, csv);
  const fs::path dir = cfg.output_dir;
  write_file(dir / "ablation.csv", csv.str());
  write_timing(dir, elapsed_since(start), opt.threads);
  std::cout << csv.str();
  return 0;
}

int cmd_stats(const Options& opt) {
  if (opt.scores.empty()) throw pass::InvalidArgument("a scores CSV is required");
  const pass::ScoresTable table = pass::read_scores_csv(fs::path(opt.scores));
  const pass::StatsReport report = pass::compute_stats(table, opt.alpha);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const json j = pass::stats_to_json(report);
  if (opt.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  const fs::path dir = opt.out;
  write_file(dir / "stats.json", j.dump(2) + "\n");
  std::ostringstream cd;
  pass::write_cd_diagram_csv(report, cd);
  write_file(dir / "cd_diagram.csv", cd.str());
  std::cout << "statistic=" << pass::text::format_short(report.friedman.statistic)
            << " p_value=" << pass::text::format_short(report.friedman.p_value)
            << " cd=" << pass::text::format_short(report.cd) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PASS peer-agreement sample selection for noisy labels"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Experiment config (JSON)");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seeds", opt.seeds, "Comma-separated master seeds, overrides the config");
  };

  auto* generate = app.add_subcommand("generate", "Write a synthetic noisy dataset as CSV");
  add_common(generate);
  auto* run = app.add_subcommand("run", "Run the pass, small_loss and none arms for every seed");
  add_common(run);
  run->add_option("--threads", opt.threads, "Worker threads for seeds")->check(CLI::PositiveNumber);
  auto* ablate = app.add_subcommand("ablate", "Compare otsu, kmeans and gmm partitions");
  add_common(ablate);
  ablate->add_option("--threads", opt.threads, "Worker threads for seeds")->check(CLI::PositiveNumber);
  auto* stats = app.add_subcommand("stats", "Friedman test and Nemenyi post-hoc on a scores table");
  stats->add_option("scores,--scores", opt.scores, "Scores CSV: dataset,method1,...,methodk");
  stats->add_option("--alpha", opt.alpha, "Significance level")->check(CLI::IsMember({0.05, 0.10}));
  stats->add_option("--out", opt.out, "Output directory for stats.json and cd_diagram.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*generate) return cmd_generate(opt);
    if (*run) return cmd_run(opt);
    if (*ablate) return cmd_ablate(opt);
    return cmd_stats(opt);
  } catch (const pass::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
