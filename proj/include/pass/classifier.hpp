#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pass/agreement.hpp"
#include "pass/data.hpp"
#include "pass/numerics.hpp"

namespace pass {

// Fully connected layer; weights are outputs x inputs, row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

// ReLU hidden layers, softmax output.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().inputs; }
  std::size_t class_count() const { return layers.empty() ? 0 : layers.back().outputs; }
  std::size_t parameter_count() const;
  // Throws InvalidArgument when shapes do not chain or values are non-finite.
  void validate() const;

  bool operator==(const MlpParams&) const = default;
};

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes{64, 64};
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double weight_decay = 5e-4;

  void validate() const;
};

// Momentum buffers, same shapes as the parameters they drive.
struct SgdState {
  MlpParams velocity;

  static SgdState zeros_like(const MlpParams& params);
};

constexpr double kProbabilityFloor = 1e-12;

// He initialisation: weights ~ N(0, 2 / fan_in), zero biases.
MlpParams init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                   std::size_t class_count, RandomStream& stream);
MlpParams zero_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                   std::size_t class_count);

// Probability vector on the simplex. Throws InvalidArgument on a size mismatch.
std::vector<double> forward(const MlpParams& params, std::span<const double> x);

// -log(max(p[label], 1e-12)).
double cross_entropy(std::span<const double> probs, Label label);

// Cross-entropy loss of one sample; adds scale * dLoss/dParams into grad,
// which must have the shape of params.
double accumulate_gradient(const MlpParams& params, std::span<const double> x, Label label,
                           double scale, MlpParams& grad);

// One pass of mini-batch SGD (momentum, L2 weight decay) over a permutation of
// `indices` drawn from `stream`, against the noisy labels. Returns the mean
// per-sample loss seen during the pass.
double train_epoch(MlpParams& params, SgdState& state, const LabeledDataset& ds,
                   std::span<const std::size_t> indices, const TrainConfig& cfg,
                   RandomStream& stream);

ProbMatrix predict_all(const MlpParams& params, const LabeledDataset& ds,
                       std::span<const std::size_t> indices);

// Flattened parameter views used by the gradient checker.
std::vector<double> flatten(const MlpParams& params);
void unflatten(std::span<const double> flat, MlpParams& params);

std::vector<double> analytic_gradient(const MlpParams& params, std::span<const double> x,
                                      Label label);
// Central differences with step h on each parameter.
std::vector<double> numeric_gradient(const MlpParams& params, std::span<const double> x,
                                     Label label, double h = 1e-5);
// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor = 1e-8);
// Analytic vs central-difference gradient of cross_entropy(forward(x), label).
double gradient_check(const MlpParams& params, std::span<const double> x, Label label);

// Checkpoint CSV: header `layer,tensor,row,col,value`; tensor is `w` or `b`
// (bias rows use col 0); values in shortest round-trip form.
void save_checkpoint(const MlpParams& params, std::ostream& out);
void save_checkpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_checkpoint(std::istream& in);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace pass
