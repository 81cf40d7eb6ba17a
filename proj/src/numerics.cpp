#include "pass/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pass/error.hpp"
#include "pass/kernels.hpp"

namespace pass {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("matrix data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(rows_) + "x" +
                          std::to_string(cols_));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("matrix contains non-finite values");
  }
}

void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax of an empty vector");
  double top = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericalError("non-finite logits");
    top = std::max(top, z);
  }
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    total += z;
  }
  for (double& z : logits) z /= total;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  softmax_inplace(out);
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InvalidArgument("cosine of vectors with different lengths");
  if (u.size() < 2) throw InvalidArgument("cosine needs vectors of length >= 2");
  const kernels::CosineTerms t = kernels::cosine_terms(u, v);
  if (!(t.uu > 0.0) || !(t.vv > 0.0)) throw NumericalError("degenerate prediction vector");
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for u == v this is
  // exactly uv, so self-agreement is exactly 1. Rounding can still push
  // parallel but unequal vectors a hair above 1.
  return std::min(1.0, t.uv / std::sqrt(t.uu * t.vv));
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t a = master_seed;
  std::uint64_t b = stream_id ^ 0x6A09E667F3BCC909ull;
  std::uint64_t key = splitmix64(a) ^ rotl(splitmix64(b), 17);
  for (auto& word : state_) word = splitmix64(key);
  // xoshiro must not start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

// Box-Muller, one variate per call; std::normal_distribution is not
// portable across standard libraries.
double RandomStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("RandomStream::below(0)");
  // Lemire's nearly-divisionless method.
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace pass
