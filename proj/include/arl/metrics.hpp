#pragma once

#include <cstdint>
#include <vector>

namespace arl {

// counts(i, j): documents with true topic i and predicted cluster j. Labels
// are remapped to dense ids (ascending value order) before counting.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;  // T x P
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;

  int topics() const { return static_cast<int>(row_sums.size()); }
  int clusters() const { return static_cast<int>(col_sums.size()); }
};

ContingencyTable contingency(const std::vector<int>& true_labels, const std::vector<int>& pred_labels);

// Normalised mutual information with the geometric-mean normaliser, natural
// log. If either partition has zero entropy: 1 when the partitions are
// identical, 0 otherwise.
double nmi(const ContingencyTable& table);

// Adjusted Rand index. Throws arl::Error when total < 2; a zero denominator
// yields 1.
double ari(const ContingencyTable& table);

// Best one-to-one mapping accuracy (predicted cluster -> true topic), found
// with the Hungarian algorithm on the zero-padded square count matrix.
double acc(const std::vector<int>& true_labels, const std::vector<int>& pred_labels);

// Minimum-cost perfect matching on a square matrix; result[row] = column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

struct Scores {
  double nmi = 0.0;
  double ari = 0.0;
  double acc = 0.0;
};

Scores score(const std::vector<int>& true_labels, const std::vector<int>& pred_labels);

}  // namespace arl
