#include <doctest.h>

#include <cmath>
#include <set>

#include "pass/agreement.hpp"
#include "pass/error.hpp"
#include "pass/selectors.hpp"

using namespace pass;

namespace {

struct Scenario {
  LabeledDataset ds;
  SplitIndices split;
};

Scenario small_scenario(double rate = 0.4) {
  Scenario s;
  s.ds = generate_gaussian_mixture(600, 4, 3, 3.0, 1);
  if (rate > 0) s.ds = inject_idn_noise(s.ds, rate, 1);
  s.split = split(s.ds, 0.2, 1);
  return s;
}

TrainConfig small_train() {
  TrainConfig t;
  t.hidden_sizes = {16, 16};
  t.batch_size = 32;
  return t;
}

SelectorConfig schedule(std::size_t warmup, std::size_t total) {
  SelectorConfig c;
  c.warmup_epochs = warmup;
  c.total_epochs = total;
  return c;
}

bool same_records(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].classifier != b[i].classifier || a[i].method != b[i].method ||
        a[i].threshold != b[i].threshold || a[i].n_clean != b[i].n_clean || a[i].train_loss != b[i].train_loss ||
        a[i].quality.f1 != b[i].quality.f1) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("peers rotate") {
  std::array<int, 3> peer_count{};
  for (std::size_t k = 0; k < kEnsembleSize; ++k) {
    const auto p = peers_of(k);
    CHECK(p[0] < p[1]);
    CHECK(p[0] != k);
    CHECK(p[1] != k);
    ++peer_count[p[0]];
    ++peer_count[p[1]];
  }
  CHECK(peer_count == std::array<int, 3>{2, 2, 2});
  CHECK(peers_of(0) == std::array<std::size_t, 2>{1, 2});
  CHECK_THROWS_AS(peers_of(3), InvalidArgument);
}

TEST_CASE("selector config validation") {
  CHECK_THROWS_AS(schedule(5, 4).validate(), InvalidArgument);
  CHECK_NOTHROW(schedule(4, 4).validate());
}

TEST_CASE("identical peers give a degenerate distribution") {
  const auto s = small_scenario();
  Ensemble e = make_ensemble(4, 3, small_train(), 1);
  e.members[2].params = e.members[1].params;
  const auto sel = pass_select(e, s.ds, s.split.train, 0, PartitionMethod::otsu);
  CHECK(sel.degenerate);
  CHECK(sel.partition.clean.size() == s.split.train.size());
  CHECK(sel.peers == std::array<std::size_t, 2>{1, 2});
  CHECK_THROWS_AS(pass_select(e, s.ds, s.split.train, 0, PartitionMethod::otsu, DegeneratePolicy::halt),
                  DegenerateDistribution);
}

TEST_CASE("peer order does not change the partition") {
  const auto s = small_scenario();
  const auto run = pass_train(s.ds, s.split, schedule(2, 2), small_train(), 3);
  const auto a = predict_all(run.ensemble.members[1].params, s.ds, s.split.train);
  const auto b = predict_all(run.ensemble.members[2].params, s.ds, s.split.train);
  for (auto method : {PartitionMethod::otsu, PartitionMethod::kmeans, PartitionMethod::gmm}) {
    const auto ab = partition_scores(agreement_scores(a, b).scores, method, DegeneratePolicy::all_clean);
    const auto ba = partition_scores(agreement_scores(b, a).scores, method, DegeneratePolicy::all_clean);
    CHECK(ab.partition.clean == ba.partition.clean);
  }
}

TEST_CASE("warmup-only schedule trains three independent baselines") {
  const auto s = small_scenario();
  const auto run = pass_train(s.ds, s.split, schedule(3, 3), small_train(), 5);
  for (const auto& r : run.records) {
    CHECK(r.method == "warmup");
    CHECK(r.n_noisy == 0);
    CHECK(!r.peers);
  }
  const auto none = baseline_train(s.ds, s.split, schedule(3, 3), small_train(), 5, BaselineSelector::none);
  CHECK(run.ensemble.members[0].params == none.params);
  CHECK(run.ensemble.members[1].params != none.params);
}

TEST_CASE("pass training records") {
  const auto s = small_scenario();
  const auto cfg = schedule(2, 5);
  const auto run = pass_train(s.ds, s.split, cfg, small_train(), 7);
  REQUIRE(run.records.size() == 15);
  CHECK(run.test_accuracy.size() == 5);
  for (const auto& r : run.records) {
    CHECK(r.n_clean + r.n_noisy == s.split.train.size());
    if (r.epoch >= 2) {
      REQUIRE(r.peers);
      CHECK(r.method == "otsu");
      // A classifier never scores its own training set.
      CHECK((*r.peers)[0] != r.classifier);
      CHECK((*r.peers)[1] != r.classifier);
    }
  }
  std::array<int, 3> trained{};
  for (const auto& r : run.records) {
    if (r.epoch == 4) ++trained[r.classifier];
  }
  CHECK(trained == std::array<int, 3>{1, 1, 1});
  CHECK(final_records(run.records).size() == 3);
  CHECK(final_records(run.records)[0].epoch == 4);
}

TEST_CASE("pass training is deterministic and parallel mode matches") {
  const auto s = small_scenario();
  auto cfg = schedule(2, 4);
  const auto a = pass_train(s.ds, s.split, cfg, small_train(), 9);
  const auto b = pass_train(s.ds, s.split, cfg, small_train(), 9);
  cfg.parallel = true;
  const auto c = pass_train(s.ds, s.split, cfg, small_train(), 9);
  CHECK(same_records(a.records, b.records));
  CHECK(same_records(a.records, c.records));
  CHECK(a.ensemble.params() == c.ensemble.params());
  CHECK(a.test_accuracy == c.test_accuracy);
}

TEST_CASE("small-loss selection on separated losses") {
  // A constant network predicting (0.99, 0.01): label 0 costs 0.01, label 1 about 4.6.
  LabeledDataset ds;
  std::vector<double> x(1000 * 2, 0.5);
  ds.features = Matrix(1000, 2, x);
  for (std::size_t i = 0; i < 1000; ++i) {
    ds.clean_labels.push_back(0);
    ds.noisy_labels.push_back(i < 500 ? 0 : 1);
    ds.noise_mask.push_back(i < 500 ? 0 : 1);
  }
  ds.class_count = 2;
  MlpParams p;
  p.layers.push_back(DenseLayer{2, 2, {0, 0, 0, 0}, {0, 0}});
  p.layers.push_back(DenseLayer{2, 2, {0, 0, 0, 0}, {std::log(99.0), 0}});
  IndexList train(1000);
  for (std::size_t i = 0; i < 1000; ++i) train[i] = i;
  const auto sel = small_loss_select(p, ds, train);
  CHECK(!sel.degenerate);
  CHECK(sel.partition.clean.size() == 500);
  for (auto i : sel.partition.clean) CHECK(i < 500);

  const auto uniform = small_loss_select(zero_mlp(2, std::vector<std::size_t>{3}, 2), ds, train);
  CHECK(uniform.degenerate);
  CHECK(uniform.partition.clean.size() == 1000);
}

TEST_CASE("none baseline on clean data is plain supervised training") {
  const auto s = small_scenario(0.0);
  const auto cfg = schedule(2, 4);
  const auto none = baseline_train(s.ds, s.split, cfg, small_train(), 3, BaselineSelector::none);
  RandomStream init(3, stream_id(StreamPurpose::init, 0));
  auto p = init_mlp(4, small_train().hidden_sizes, 3, init);
  auto state = SgdState::zeros_like(p);
  for (std::size_t e = 0; e < 4; ++e) {
    RandomStream shuffle(3, stream_id(StreamPurpose::shuffle, e, 0));
    train_epoch(p, state, s.ds, s.split.train, small_train(), shuffle);
  }
  CHECK(none.params == p);
  for (const auto& r : none.records) CHECK(r.quality.precision == 1.0);
}

TEST_CASE("small-loss baseline records") {
  const auto s = small_scenario();
  const auto run = baseline_train(s.ds, s.split, schedule(2, 4), small_train(), 3, BaselineSelector::small_loss);
  REQUIRE(run.records.size() == 4);
  CHECK(run.records[0].method == "warmup");
  CHECK(run.records[3].method == "small_loss");
  CHECK(run.records[3].n_clean < s.split.train.size());
}
