#include "pass/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "pass/error.hpp"
#include "pass/kernels.hpp"
#include "pass/text.hpp"

namespace pass {

std::size_t MlpParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.weights.size() + layer.bias.size();
  return total;
}

void MlpParams::validate() const {
  if (layers.empty()) throw InvalidArgument("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.inputs == 0 || layer.outputs == 0) throw InvalidArgument("empty layer");
    if (layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw InvalidArgument("layer " + std::to_string(l) + " has inconsistent tensor sizes");
    }
    if (l > 0 && layers[l - 1].outputs != layer.inputs) {
      throw InvalidArgument("layer " + std::to_string(l) + " does not chain with its predecessor");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      throw NumericalError("non-finite parameter in layer " + std::to_string(l));
    }
  }
  if (class_count() < 2) throw InvalidArgument("network must output at least 2 classes");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw InvalidArgument("weight_decay must be finite and non-negative");
  }
  if (std::find(hidden_sizes.begin(), hidden_sizes.end(), std::size_t{0}) != hidden_sizes.end()) {
    throw InvalidArgument("hidden layer sizes must be positive");
  }
}

SgdState SgdState::zeros_like(const MlpParams& params) {
  SgdState state{params};
  for (auto& layer : state.velocity.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return state;
}

MlpParams zero_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                   std::size_t class_count) {
  if (input_dim == 0 || class_count < 2) throw InvalidArgument("invalid network sizes");
  MlpParams params;
  std::size_t fan_in = input_dim;
  auto add = [&](std::size_t outputs) {
    if (outputs == 0) throw InvalidArgument("hidden layer sizes must be positive");
    params.layers.push_back(DenseLayer{fan_in, outputs, std::vector<double>(fan_in * outputs, 0.0),
                                       std::vector<double>(outputs, 0.0)});
    fan_in = outputs;
  };
  for (std::size_t h : hidden_sizes) add(h);
  add(class_count);
  return params;
}

MlpParams init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                   std::size_t class_count, RandomStream& stream) {
  MlpParams params = zero_mlp(input_dim, hidden_sizes, class_count);
  for (auto& layer : params.layers) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = stddev * stream.normal();
  }
  return params;
}

namespace {

// Per-layer pre-activations and activations of one forward pass. acts[0] is
// the input; acts.back() holds the softmax output.
struct Trace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> deltas;

  explicit Trace(const MlpParams& params) {
    acts.emplace_back(params.input_dim());
    for (const auto& layer : params.layers) {
      pre.emplace_back(layer.outputs);
      acts.emplace_back(layer.outputs);
      deltas.emplace_back(layer.outputs);
    }
  }
};

void run_forward(const MlpParams& params, std::span<const double> x, Trace& trace) {
  std::copy(x.begin(), x.end(), trace.acts[0].begin());
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    const std::span<const double> input = trace.acts[l];
    std::vector<double>& z = trace.pre[l];
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      z[j] = layer.bias[j] +
             kernels::dot(std::span<const double>(layer.weights).subspan(j * layer.inputs, layer.inputs),
                          input);
    }
    std::vector<double>& a = trace.acts[l + 1];
    if (l == last) {
      std::copy(z.begin(), z.end(), a.begin());
      softmax_inplace(a);
    } else {
      for (std::size_t j = 0; j < layer.outputs; ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
    }
  }
}

// Backpropagates the loss of the sample currently held in `trace`.
void run_backward(const MlpParams& params, Label label, double scale, Trace& trace,
                  MlpParams& grad) {
  const std::size_t last = params.layers.size() - 1;
  const std::vector<double>& probs = trace.acts.back();
  std::vector<double>& top = trace.deltas[last];
  if (probs[label] < kProbabilityFloor) {
    // Loss is clamped here, so it is locally flat.
    std::fill(top.begin(), top.end(), 0.0);
  } else {
    for (std::size_t j = 0; j < probs.size(); ++j) top[j] = probs[j];
    top[label] -= 1.0;
  }
  for (std::size_t l = last + 1; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    DenseLayer& g = grad.layers[l];
    const std::vector<double>& delta = trace.deltas[l];
    const std::span<const double> input = trace.acts[l];
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      const double dj = scale * delta[j];
      if (dj == 0.0) continue;
      g.bias[j] += dj;
      kernels::axpy(dj, input, std::span<double>(g.weights).subspan(j * layer.inputs, layer.inputs));
    }
    if (l == 0) break;
    std::vector<double>& below = trace.deltas[l - 1];
    std::fill(below.begin(), below.end(), 0.0);
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      if (delta[j] == 0.0) continue;
      kernels::axpy(delta[j],
                    std::span<const double>(layer.weights).subspan(j * layer.inputs, layer.inputs),
                    below);
    }
    const std::vector<double>& z = trace.pre[l - 1];
    for (std::size_t k = 0; k < below.size(); ++k) {
      if (!(z[k] > 0.0)) below[k] = 0.0;
    }
  }
}

void check_input(const MlpParams& params, std::span<const double> x) {
  if (params.layers.empty()) throw InvalidArgument("network has no layers");
  if (x.size() != params.input_dim()) {
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, network expects " +
                          std::to_string(params.input_dim()));
  }
}

void zero(MlpParams& params) {
  for (auto& layer : params.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

}  // namespace

std::vector<double> forward(const MlpParams& params, std::span<const double> x) {
  check_input(params, x);
  Trace trace(params);
  run_forward(params, x, trace);
  return trace.acts.back();
}

double cross_entropy(std::span<const double> probs, Label label) {
  if (label >= probs.size()) throw InvalidArgument("label out of range");
  return -std::log(std::max(probs[label], kProbabilityFloor));
}

double accumulate_gradient(const MlpParams& params, std::span<const double> x, Label label,
                           double scale, MlpParams& grad) {
  check_input(params, x);
  if (label >= params.class_count()) throw InvalidArgument("label out of range");
  Trace trace(params);
  run_forward(params, x, trace);
  run_backward(params, label, scale, trace, grad);
  return cross_entropy(trace.acts.back(), label);
}

double train_epoch(MlpParams& params, SgdState& state, const LabeledDataset& ds,
                   std::span<const std::size_t> indices, const TrainConfig& cfg,
                   RandomStream& stream) {
  if (indices.empty()) throw InvalidArgument("empty training subset");
  cfg.validate();
  if (ds.dim() != params.input_dim() || ds.class_count != params.class_count()) {
    throw InvalidArgument("dataset shape does not match the network");
  }
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InvalidArgument("training index out of range");
  }

  IndexList order(indices.begin(), indices.end());
  stream.shuffle(std::span<std::size_t>(order));

  MlpParams grad = params;
  Trace trace(params);
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
    const double scale = 1.0 / static_cast<double>(stop - start);
    zero(grad);
    for (std::size_t k = start; k < stop; ++k) {
      const std::size_t i = order[k];
      run_forward(params, ds.features.row(i), trace);
      loss_sum += cross_entropy(trace.acts.back(), ds.noisy_labels[i]);
      run_backward(params, ds.noisy_labels[i], scale, trace, grad);
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      DenseLayer& layer = params.layers[l];
      DenseLayer& vel = state.velocity.layers[l];
      kernels::sgd_momentum(layer.weights, vel.weights, grad.layers[l].weights, cfg.learning_rate,
                            cfg.momentum, cfg.weight_decay);
      kernels::sgd_momentum(layer.bias, vel.bias, grad.layers[l].bias, cfg.learning_rate,
                            cfg.momentum, cfg.weight_decay);
    }
  }
  const double mean_loss = loss_sum / static_cast<double>(order.size());
  if (!std::isfinite(mean_loss)) throw NumericalError("training diverged (non-finite loss)");
  return mean_loss;
}

ProbMatrix predict_all(const MlpParams& params, const LabeledDataset& ds,
                       std::span<const std::size_t> indices) {
  if (ds.dim() != params.input_dim()) throw InvalidArgument("dataset shape does not match the network");
  const std::size_t classes = params.class_count();
  std::vector<double> out(indices.size() * classes);
  Trace trace(params);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= ds.size()) throw InvalidArgument("prediction index out of range");
    run_forward(params, ds.features.row(indices[r]), trace);
    std::copy(trace.acts.back().begin(), trace.acts.back().end(), out.begin() + static_cast<std::ptrdiff_t>(r * classes));
  }
  return ProbMatrix(Matrix(indices.size(), classes, std::move(out)));
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(params.parameter_count());
  for (const auto& layer : params.layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void unflatten(std::span<const double> flat, MlpParams& params) {
  if (flat.size() != params.parameter_count()) throw InvalidArgument("flat parameter size mismatch");
  std::size_t pos = 0;
  for (auto& layer : params.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(), layer.weights.begin());
    pos += layer.weights.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.bias.size(), layer.bias.begin());
    pos += layer.bias.size();
  }
}

std::vector<double> analytic_gradient(const MlpParams& params, std::span<const double> x,
                                      Label label) {
  MlpParams grad = params;
  zero(grad);
  accumulate_gradient(params, x, label, 1.0, grad);
  return flatten(grad);
}

std::vector<double> numeric_gradient(const MlpParams& params, std::span<const double> x,
                                     Label label, double h) {
  std::vector<double> flat = flatten(params);
  std::vector<double> grad(flat.size());
  MlpParams probe = params;
  for (std::size_t p = 0; p < flat.size(); ++p) {
    const double saved = flat[p];
    flat[p] = saved + h;
    unflatten(flat, probe);
    const double up = cross_entropy(forward(probe, x), label);
    flat[p] = saved - h;
    unflatten(flat, probe);
    const double down = cross_entropy(forward(probe, x), label);
    flat[p] = saved;
    grad[p] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor) {
  if (analytic.size() != numeric.size()) throw InvalidArgument("gradient size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

double gradient_check(const MlpParams& params, std::span<const double> x, Label label) {
  return max_relative_error(analytic_gradient(params, x, label), numeric_gradient(params, x, label));
}

void save_checkpoint(const MlpParams& params, std::ostream& out) {
  params.validate();
  out << "layer,tensor,row,col,value\n";
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      for (std::size_t c = 0; c < layer.inputs; ++c) {
        out << l << ",w," << r << ',' << c << ','
            << text::format_double(layer.weights[r * layer.inputs + c]) << '\n';
      }
    }
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      out << l << ",b," << r << ",0," << text::format_double(layer.bias[r]) << '\n';
    }
  }
}

void save_checkpoint(const MlpParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_checkpoint(params, out);
}

MlpParams load_checkpoint(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || text::trim(line) != "layer,tensor,row,col,value") {
    throw ParseError("malformed checkpoint header", line_no);
  }
  struct Entry {
    char tensor;
    std::size_t row, col;
    double value;
  };
  std::map<std::size_t, std::vector<Entry>> by_layer;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line));
    if (f.size() != 5) throw ParseError("expected 5 columns", line_no);
    const auto layer = text::parse_int(f[0]);
    const auto row = text::parse_int(f[2]);
    const auto col = text::parse_int(f[3]);
    const auto value = text::parse_double(f[4]);
    if (!layer || !row || !col || !value || *layer < 0 || *row < 0 || *col < 0 ||
        (f[1] != "w" && f[1] != "b")) {
      throw ParseError("malformed checkpoint row", line_no);
    }
    by_layer[static_cast<std::size_t>(*layer)].push_back(
        Entry{f[1][0], static_cast<std::size_t>(*row), static_cast<std::size_t>(*col), *value});
  }
  MlpParams params;
  for (const auto& [index, entries] : by_layer) {
    if (index != params.layers.size()) throw InvalidArgument("checkpoint skips layer " + std::to_string(params.layers.size()));
    DenseLayer layer;
    for (const Entry& e : entries) {
      layer.outputs = std::max(layer.outputs, e.row + 1);
      if (e.tensor == 'w') layer.inputs = std::max(layer.inputs, e.col + 1);
    }
    layer.weights.assign(layer.inputs * layer.outputs, std::numeric_limits<double>::quiet_NaN());
    layer.bias.assign(layer.outputs, std::numeric_limits<double>::quiet_NaN());
    for (const Entry& e : entries) {
      if (e.tensor == 'w') {
        layer.weights[e.row * layer.inputs + e.col] = e.value;
      } else {
        layer.bias[e.row] = e.value;
      }
    }
    params.layers.push_back(std::move(layer));
  }
  try {
    params.validate();
  } catch (const NumericalError&) {
    throw InvalidArgument("checkpoint is missing parameter values");
  }
  return params;
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace pass
