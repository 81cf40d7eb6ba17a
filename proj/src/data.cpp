#include "pass/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "pass/error.hpp"
#include "pass/kernels.hpp"
#include "pass/text.hpp"

namespace pass {

double LabeledDataset::noise_rate() const {
  if (noise_mask.empty()) return 0.0;
  const auto flipped = std::count(noise_mask.begin(), noise_mask.end(), std::uint8_t{1});
  return static_cast<double>(flipped) / static_cast<double>(noise_mask.size());
}

bool LabeledDataset::noise_free() const {
  return std::none_of(noise_mask.begin(), noise_mask.end(), [](std::uint8_t m) { return m != 0; });
}

void LabeledDataset::validate() const {
  const std::size_t n = size();
  if (n == 0) throw InvalidArgument("dataset is empty");
  if (class_count < 2) throw InvalidArgument("dataset needs at least 2 classes");
  if (clean_labels.size() != n || noisy_labels.size() != n || noise_mask.size() != n) {
    throw InvalidArgument("dataset label arrays do not match the number of samples");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (clean_labels[i] >= class_count || noisy_labels[i] >= class_count) {
      throw InvalidArgument("label out of range for sample " + std::to_string(i));
    }
    if ((noise_mask[i] != 0) != (clean_labels[i] != noisy_labels[i])) {
      throw InvalidArgument("noise mask inconsistent with labels for sample " + std::to_string(i));
    }
  }
}

namespace {

void require_noise_free(const LabeledDataset& ds) {
  ds.validate();
  if (!ds.noise_free()) throw InvalidArgument("dataset already carries label noise");
}

void check_rate(double rate) {
  if (!(rate > 0.0 && rate <= 0.95)) throw InvalidArgument("noise_rate out of range (0, 0.95]");
}

std::vector<double> random_direction(RandomStream& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    norm = std::sqrt(kernels::dot(v, v));
  } while (norm < 1e-12);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

LabeledDataset generate_gaussian_mixture(std::size_t n, std::size_t d, std::size_t class_count,
                                         double class_separation, std::uint64_t seed) {
  if (class_count < 2) throw InvalidArgument("class count must be >= 2");
  if (n < class_count) throw InvalidArgument("need at least one sample per class (n >= C)");
  if (d < 2) throw InvalidArgument("feature dimension must be >= 2");
  if (!(class_separation > 0.0) || !std::isfinite(class_separation)) {
    throw InvalidArgument("class_separation must be positive");
  }

  RandomStream mean_rng = derive_stream(seed, stream_id(StreamPurpose::cluster_means));
  std::vector<std::vector<double>> means;
  means.reserve(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    std::vector<double> dir = random_direction(mean_rng, d);
    if (class_count <= d) {
      // Gram-Schmidt against the previous means, retried on near-collinear draws.
      while (true) {
        for (const auto& prev : means) {
          const double proj = kernels::dot(dir, prev) / (class_separation * class_separation);
          kernels::axpy(-proj, prev, dir);
        }
        const double norm = std::sqrt(kernels::dot(dir, dir));
        if (norm > 1e-6) {
          for (double& x : dir) x /= norm;
          break;
        }
        dir = random_direction(mean_rng, d);
      }
    }
    for (double& x : dir) x *= class_separation;
    means.push_back(std::move(dir));
  }

  RandomStream sample_rng = derive_stream(seed, stream_id(StreamPurpose::samples));
  LabeledDataset ds;
  ds.class_count = class_count;
  std::vector<double> features(n * d);
  ds.clean_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<Label>(i % class_count);
    ds.clean_labels[i] = label;
    for (std::size_t j = 0; j < d; ++j) {
      features[i * d + j] = means[label][j] + sample_rng.normal();
    }
  }
  ds.features = Matrix(n, d, std::move(features));
  ds.noisy_labels = ds.clean_labels;
  ds.noise_mask.assign(n, 0);
  return ds;
}

std::vector<double> idn_flip_probabilities(const LabeledDataset& ds, double rate,
                                           std::uint64_t seed) {
  check_rate(rate);
  ds.validate();
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();

  RandomStream rng = derive_stream(seed, stream_id(StreamPurpose::noise_model, 0));
  std::vector<double> w(d);
  for (double& x : w) x = rng.normal();
  const double bias = rng.normal();

  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = kernels::dot(w, ds.features.row(i));
  const double mean = std::accumulate(proj.begin(), proj.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double p : proj) var += (p - mean) * (p - mean);
  var /= static_cast<double>(n);
  const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;

  std::vector<double> g(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (proj[i] - mean) * scale + bias;
    g[i] = 1.0 / (1.0 + std::exp(-z));
    total += g[i];
  }
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = std::clamp(rate * static_cast<double>(n) * g[i] / total, 0.0, 0.95);
  }
  return q;
}

LabeledDataset inject_idn_noise(const LabeledDataset& ds, double rate, std::uint64_t seed) {
  check_rate(rate);
  require_noise_free(ds);
  const std::vector<double> q = idn_flip_probabilities(ds, rate, seed);
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();
  const std::size_t classes = ds.class_count;

  RandomStream proj_rng = derive_stream(seed, stream_id(StreamPurpose::noise_model, 1));
  Matrix class_projection(classes, d);
  for (std::size_t c = 0; c < classes; ++c) {
    for (double& x : class_projection.row(c)) x = proj_rng.normal();
  }

  RandomStream draw_rng = derive_stream(seed, stream_id(StreamPurpose::noise_draws));
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < n; ++i) {
    if (draw_rng.uniform() >= q[i]) continue;
    const Label truth = ds.clean_labels[i];
    Label best = truth;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) {
      if (c == truth) continue;
      const double score = kernels::dot(class_projection.row(c), ds.features.row(i));
      if (score > best_score) {
        best_score = score;
        best = static_cast<Label>(c);
      }
    }
    out.noisy_labels[i] = best;
    out.noise_mask[i] = 1;
  }
  return out;
}

LabeledDataset inject_symmetric_noise(const LabeledDataset& ds, double rate, std::uint64_t seed) {
  check_rate(rate);
  require_noise_free(ds);
  const std::size_t n = ds.size();
  const auto flips = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));

  RandomStream rng = derive_stream(seed, stream_id(StreamPurpose::noise_draws, 1));
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `flips` slots are a uniform sample.
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  LabeledDataset out = ds;
  const auto classes = static_cast<std::uint64_t>(ds.class_count);
  for (std::size_t k = 0; k < flips; ++k) {
    const std::size_t i = order[k];
    const Label offset = static_cast<Label>(1 + rng.below(classes - 1));
    out.noisy_labels[i] = static_cast<Label>((ds.clean_labels[i] + offset) % classes);
    out.noise_mask[i] = 1;
  }
  return out;
}

SplitIndices split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  ds.validate();
  const std::size_t n = ds.size();
  std::vector<IndexList> by_class(ds.class_count);
  for (std::size_t i = 0; i < n; ++i) by_class[ds.clean_labels[i]].push_back(i);

  // Largest-remainder allocation of the test budget across classes.
  const auto target = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5));
  std::vector<std::size_t> take(ds.class_count);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < ds.class_count; ++c) {
    const double exact = test_fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r) {
    const std::size_t c = remainders[r].second;
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }

  SplitIndices out;
  for (std::size_t c = 0; c < ds.class_count; ++c) {
    RandomStream rng = derive_stream(seed, stream_id(StreamPurpose::split, c));
    IndexList& members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take[c]));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(take[c]), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void write_dataset_csv(const LabeledDataset& ds, std::ostream& out) {
  ds.validate();
  const std::size_t d = ds.dim();
  out << "id";
  for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
  out << ",clean_label,noisy_label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << i;
    for (double v : ds.features.row(i)) out << ',' << text::format_double(v);
    out << ',' << ds.clean_labels[i] << ',' << ds.noisy_labels[i] << '\n';
  }
}

void write_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_dataset_csv(ds, out);
  if (!out) throw Error("failed writing " + path.string());
}

LabeledDataset read_dataset_csv(std::istream& in, std::optional<std::size_t> class_count) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = text::split(line);
  if (header.size() < 5 || header.front() != "id" || header[header.size() - 2] != "clean_label" ||
      header.back() != "noisy_label") {
    throw ParseError("malformed header, expected id,f0,...,f{d-1},clean_label,noisy_label",
                     line_no);
  }
  const std::size_t d = header.size() - 3;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 1] != "f" + std::to_string(j)) {
      throw ParseError("malformed header column '" + std::string(header[j + 1]) + "'", line_no);
    }
  }

  std::vector<double> features;
  std::vector<long long> clean;
  std::vector<long long> noisy;
  std::vector<std::size_t> label_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = text::split(line);
    if (fields.size() != d + 3) {
      throw ParseError("expected d+3 = " + std::to_string(d + 3) + " columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const auto id = text::parse_int(fields[0]);
    if (!id || *id != static_cast<long long>(clean.size())) {
      throw ParseError("id must equal the row index " + std::to_string(clean.size()), line_no);
    }
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = text::parse_double(fields[j + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("non-numeric feature f" + std::to_string(j), line_no);
      }
      features.push_back(*v);
    }
    const auto c = text::parse_int(fields[d + 1]);
    const auto y = text::parse_int(fields[d + 2]);
    if (!c || !y) throw ParseError("non-integer label", line_no);
    if (*c < 0 || *y < 0) throw ParseError("label out of range", line_no);
    clean.push_back(*c);
    noisy.push_back(*y);
    label_lines.push_back(line_no);
  }
  if (clean.empty()) throw ParseError("no data rows", line_no);

  long long max_label = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) max_label = std::max({max_label, clean[i], noisy[i]});
  const std::size_t classes =
      class_count.value_or(std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1));

  LabeledDataset ds;
  ds.class_count = classes;
  const std::size_t n = clean.size();
  ds.clean_labels.resize(n);
  ds.noisy_labels.resize(n);
  ds.noise_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (clean[i] >= static_cast<long long>(classes) || noisy[i] >= static_cast<long long>(classes)) {
      throw ParseError("label out of range", label_lines[i]);
    }
    ds.clean_labels[i] = static_cast<Label>(clean[i]);
    ds.noisy_labels[i] = static_cast<Label>(noisy[i]);
    ds.noise_mask[i] = clean[i] != noisy[i] ? 1 : 0;
  }
  ds.features = Matrix(n, d, std::move(features));
  ds.validate();
  return ds;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path,
                                std::optional<std::size_t> class_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_dataset_csv(in, class_count);
}

}  // namespace pass
