#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pass/data.hpp"
#include "pass/numerics.hpp"

namespace pass {

// n x C class probabilities; every row lies on the probability simplex
// (entries >= 0, row sum 1 within 1e-9).
class ProbMatrix {
 public:
  ProbMatrix() = default;
  // Throws InvalidArgument when a row is off the simplex.
  explicit ProbMatrix(Matrix probabilities);

  std::size_t rows() const noexcept { return probs_.rows(); }
  std::size_t cols() const noexcept { return probs_.cols(); }
  std::span<const double> row(std::size_t i) const { return probs_.row(i); }
  const Matrix& matrix() const noexcept { return probs_; }

  bool operator==(const ProbMatrix&) const = default;

 private:
  Matrix probs_;
};

// Per-sample cosine agreement between two peer classifiers.
struct AgreementScores {
  std::vector<double> scores;
  std::array<std::size_t, 2> peer_ids{0, 0};
};

// scores[i] = cosine(a.row(i), b.row(i)). Symmetric in (a, b); every score
// lies in [0, 1]. Throws InvalidArgument on a shape mismatch.
AgreementScores agreement_scores(const ProbMatrix& a, const ProbMatrix& b,
                                 std::array<std::size_t, 2> peer_ids = {0, 1});

// `id,score` rows; ids are the dataset indices the rows were computed on.
void write_scores_csv(const AgreementScores& scores, const IndexList& ids, std::ostream& out);
void write_scores_csv(const AgreementScores& scores, const IndexList& ids,
                      const std::filesystem::path& path);

}  // namespace pass
