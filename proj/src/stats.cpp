#include "pass/stats.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "pass/error.hpp"
#include "pass/text.hpp"

namespace pass {

ScoresTable read_scores_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  const auto header = text::split(text::trim(line));
  if (header.size() < 3 || text::trim(header[0]) != "dataset") {
    throw ParseError("header must be dataset,method1,...,methodk with k >= 2", line_no);
  }
  ScoresTable table;
  for (std::size_t j = 1; j < header.size(); ++j) table.methods.emplace_back(text::trim(header[j]));
  const std::size_t k = table.methods.size();
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line));
    if (fields.size() != k + 1) {
      throw ParseError("expected " + std::to_string(k + 1) + " columns, got " + std::to_string(fields.size()),
                       line_no);
    }
    table.datasets.emplace_back(text::trim(fields[0]));
    for (std::size_t j = 1; j <= k; ++j) {
      const auto v = text::parse_double(fields[j]);
      if (!v || !std::isfinite(*v)) throw ParseError("non-numeric score", line_no);
      values.push_back(*v);
    }
  }
  table.scores = Matrix(table.datasets.size(), k, std::move(values));
  return table;
}

ScoresTable read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_scores_csv(in);
}

std::vector<double> RankTable::rank_sums() const {
  std::vector<double> sums(method_count(), 0.0);
  for (std::size_t i = 0; i < dataset_count(); ++i) {
    for (std::size_t j = 0; j < method_count(); ++j) sums[j] += ranks(i, j);
  }
  return sums;
}

std::vector<double> RankTable::mean_ranks() const {
  std::vector<double> means = rank_sums();
  for (double& m : means) m /= static_cast<double>(dataset_count());
  return means;
}

RankTable rank_rows(const Matrix& scores, bool higher_is_better, std::vector<std::string> methods,
                    std::vector<std::string> datasets) {
  const std::size_t n = scores.rows();
  const std::size_t k = scores.cols();
  if (n < 2) throw InvalidArgument("need at least 2 datasets");
  if (k < 2) throw InvalidArgument("need at least 2 methods");
  for (double v : scores.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite score");
  }
  if (methods.empty()) {
    for (std::size_t j = 0; j < k; ++j) methods.push_back("m" + std::to_string(j + 1));
  }
  if (datasets.empty()) {
    for (std::size_t i = 0; i < n; ++i) datasets.push_back("d" + std::to_string(i + 1));
  }
  if (methods.size() != k || datasets.size() != n) throw InvalidArgument("name lists do not match the table");

  Matrix ranks(n, k);
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    for (std::size_t start = 0; start < k;) {
      std::size_t stop = start + 1;
      while (stop < k && row[order[stop]] == row[order[start]]) ++stop;
      // Positions start..stop-1 share ranks start+1..stop.
      const double shared = 0.5 * static_cast<double>(start + 1 + stop);
      for (std::size_t p = start; p < stop; ++p) ranks(i, order[p]) = shared;
      start = stop;
    }
  }
  return RankTable{std::move(methods), std::move(datasets), std::move(ranks)};
}

RankTable rank_rows(const ScoresTable& table, bool higher_is_better) {
  return rank_rows(table.scores, higher_is_better, table.methods, table.datasets);
}

double chi_square_sf(double x, double df) {
  if (!(df >= 1.0)) throw InvalidArgument("degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw InvalidArgument("chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

FriedmanResult friedman_from_rank_sums(std::span<const double> rank_sums, std::size_t datasets) {
  const std::size_t k = rank_sums.size();
  if (k < 2 || datasets < 2) throw InvalidArgument("Friedman test needs k >= 2 methods and N >= 2 datasets");
  const double n = static_cast<double>(datasets);
  const double kk = static_cast<double>(k);
  double squares = 0.0;
  for (double r : rank_sums) squares += r * r;
  FriedmanResult out;
  // Clamp the rounding residue of the all-tied case.
  out.statistic = std::max(0.0, 12.0 / (n * kk * (kk + 1.0)) * squares - 3.0 * n * (kk + 1.0));
  out.degrees_of_freedom = k - 1;
  out.p_value = chi_square_sf(out.statistic, static_cast<double>(k - 1));
  out.approximation_warning = datasets < 5 || k < 3;
  return out;
}

FriedmanResult friedman(const RankTable& ranks) {
  return friedman_from_rank_sums(ranks.rank_sums(), ranks.dataset_count());
}

namespace {

// Two-tailed Nemenyi critical values (Demsar 2006, Table 5), k = 2..10.
constexpr std::array<double, 9> kQ005{1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
constexpr std::array<double, 9> kQ010{1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};

}  // namespace

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 10) throw InvalidArgument("q-table supports k <= 10 (and k >= 2)");
  if (std::abs(alpha - 0.05) < 1e-12) return kQ005[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ010[k - 2];
  throw InvalidArgument("q-table supports alpha 0.05 or 0.10");
}

double nemenyi_cd(std::size_t k, std::size_t datasets, double alpha) {
  if (datasets < 1) throw InvalidArgument("need at least one dataset");
  const double kk = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(datasets)));
}

std::vector<PairComparison> nemenyi_pairwise(std::span<const double> mean_ranks, double cd) {
  std::vector<PairComparison> pairs;
  for (std::size_t a = 0; a < mean_ranks.size(); ++a) {
    for (std::size_t b = a + 1; b < mean_ranks.size(); ++b) {
      const double gap = std::abs(mean_ranks[a] - mean_ranks[b]);
      pairs.push_back(PairComparison{a, b, gap, cd, gap >= cd});
    }
  }
  return pairs;
}

std::vector<PairComparison> nemenyi_pairwise(const RankTable& ranks, double alpha) {
  const double cd = nemenyi_cd(ranks.method_count(), ranks.dataset_count(), alpha);
  return nemenyi_pairwise(ranks.mean_ranks(), cd);
}

}  // namespace pass
