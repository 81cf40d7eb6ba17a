#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pass {

// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  // Throws InvalidArgument on size mismatch or a non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Numerically stable softmax (max subtraction). Throws NumericalError
// "non-finite logits".
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits);

// u.v / (|u||v|). Throws InvalidArgument on length mismatch or length < 2,
// NumericalError "degenerate prediction vector" on a zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

// Splittable deterministic generator: xoshiro256** whose state is derived
// from (master_seed, stream_id) through SplitMix64. Streams do not share
// state, so the order in which different streams are consumed is irrelevant.
// Single consumer; concurrent users derive their own streams.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64();
  // [0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
};

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RandomStream(master_seed, stream_id);
}

// Well-known stream purposes. Ids pack (purpose, a, b) so that every
// (classifier, epoch) pair gets its own stream.
enum class StreamPurpose : std::uint64_t {
  cluster_means = 1,
  samples = 2,
  noise_model = 3,
  noise_draws = 4,
  split = 5,
  init = 6,
  shuffle = 7,
  cluster = 8,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t a = 0,
                                  std::uint64_t b = 0) {
  return (static_cast<std::uint64_t>(purpose) << 56) | ((a & 0xFFFFFFull) << 28) |
         (b & 0xFFFFFFFull);
}

}  // namespace pass
