#include <doctest.h>

#include "pass/classifier.hpp"
#include "pass/metrics.hpp"

using namespace pass;

TEST_CASE("selection quality examples") {
  const std::vector<std::uint8_t> mask{1, 0, 0, 1};  // clean = {1, 2}
  const IndexList train{0, 1, 2, 3};
  const auto q = selection_quality(IndexList{0, 1}, mask, train);
  CHECK(q.precision == 0.5);
  CHECK(q.recall == 0.5);
  CHECK(q.f1 == 0.5);
  CHECK(q.clean_ratio == 0.5);

  const auto perfect = selection_quality(IndexList{1, 2}, mask, train);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK(perfect.clean_ratio == 0.5);

  const auto all = selection_quality(train, mask, train);
  CHECK(all.precision == 0.5);
  CHECK(all.recall == 1.0);
  CHECK(all.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(all.clean_ratio == 1.0);

  const auto none = selection_quality(IndexList{}, mask, train);
  CHECK(none.empty_selection);
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("partition positions map through the training indices") {
  const std::vector<std::uint8_t> mask{0, 1, 0, 0, 1};
  const IndexList train{1, 2, 4};
  Partition p;
  p.clean = {1};  // dataset index 2, clean
  p.noisy = {0, 2};
  const auto q = selection_quality(p, mask, train);
  CHECK(q.precision == 1.0);
  CHECK(q.recall == 1.0);
  CHECK(q.clean_ratio == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("selection quality invariants on random selections") {
  RandomStream rng(5, 5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 5 + rng.below(100);
    std::vector<std::uint8_t> mask(n);
    IndexList train(n), selected;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = rng.below(2);
      train[i] = i;
      if (rng.below(2)) selected.push_back(i);
    }
    const auto q = selection_quality(selected, mask, train);
    const double p = q.precision, r = q.recall;
    CHECK(q.f1 == doctest::Approx(p + r > 0 ? 2 * p * r / (p + r) : 0.0));
    CHECK(p * q.selected == doctest::Approx(static_cast<double>(q.selected_clean)));
    CHECK(r * q.truly_clean == doctest::Approx(static_cast<double>(q.selected_clean)));
    CHECK((q.clean_ratio >= 0.0 && q.clean_ratio <= 1.0));
  }
}

TEST_CASE("clean ratio is monotone in the threshold") {
  RandomStream rng(6, 6);
  std::vector<double> s(300);
  for (auto& v : s) v = rng.uniform();
  std::vector<std::uint8_t> mask(300, 0);
  IndexList train(300);
  for (std::size_t i = 0; i < 300; ++i) train[i] = i;
  double previous = 2.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const double ratio = selection_quality(partition_from_threshold(s, t), mask, train).clean_ratio;
    CHECK(ratio <= previous);
    previous = ratio;
  }
}

TEST_CASE("test accuracy") {
  const auto ds = generate_gaussian_mixture(40, 2, 2, 3.0, 1);
  IndexList test;
  for (std::size_t i = 0; i < 40; ++i) test.push_back(i);
  // Uniform outputs: ties go to class 0, which is half of a balanced set.
  const auto zero = zero_mlp(2, std::vector<std::size_t>{3}, 2);
  CHECK(test_accuracy(zero, ds, test) == 0.5);

  // A hand-built oracle: logits are the projections onto the class means.
  RandomStream init(1, 1);
  const auto m = init_mlp(2, std::vector<std::size_t>{8}, 2, init);
  const std::vector<MlpParams> three{m, m, m};
  CHECK(test_accuracy(three, ds, test) == test_accuracy(m, ds, test));
  CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
}

TEST_CASE("oracle classifier scores one") {
  // Two classes separated along x0; a one-layer net thresholding x0 at the
  // midpoint of the class means is exact on this data.
  LabeledDataset ds;
  ds.features = Matrix(4, 2, {-2, 0, -1, 1, 1, 0, 2, -1});
  ds.clean_labels = {0, 0, 1, 1};
  ds.noisy_labels = ds.clean_labels;
  ds.noise_mask = {0, 0, 0, 0};
  ds.class_count = 2;
  MlpParams p;
  p.layers.push_back(DenseLayer{2, 2, {1, 0, -1, 0}, {0, 0}});
  p.layers.push_back(DenseLayer{2, 2, {-1, 1, 1, -1}, {0, 0}});
  CHECK(test_accuracy(p, ds, IndexList{0, 1, 2, 3}) == 1.0);
}
