#include "pass/agreement.hpp"

#include <cmath>
#include <fstream>

#include "pass/error.hpp"
#include "pass/text.hpp"

namespace pass {

ProbMatrix::ProbMatrix(Matrix probabilities) : probs_(std::move(probabilities)) {
  for (std::size_t i = 0; i < probs_.rows(); ++i) {
    double total = 0.0;
    for (double p : probs_.row(i)) {
      if (p < 0.0) throw InvalidArgument("negative probability in row " + std::to_string(i));
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidArgument("probability row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

AgreementScores agreement_scores(const ProbMatrix& a, const ProbMatrix& b,
                                 std::array<std::size_t, 2> peer_ids) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("agreement of probability matrices with different shapes");
  }
  AgreementScores out;
  out.peer_ids = peer_ids;
  out.scores.resize(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out.scores[i] = cosine(a.row(i), b.row(i));
  return out;
}

void write_scores_csv(const AgreementScores& scores, const IndexList& ids, std::ostream& out) {
  if (ids.size() != scores.scores.size()) {
    throw InvalidArgument("score and id lists differ in length");
  }
  out << "id,score\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i] << ',' << text::format_double(scores.scores[i]) << '\n';
  }
}

void write_scores_csv(const AgreementScores& scores, const IndexList& ids,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_scores_csv(scores, ids, out);
}

}  // namespace pass
