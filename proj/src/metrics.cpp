#include "arl/metrics.hpp"

#include "arl/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace arl {
namespace {

std::vector<int> dense(const std::vector<int>& labels, int& count) {
  std::map<int, int> ids;
  for (int v : labels) ids.emplace(v, 0);
  count = 0;
  for (auto& [v, id] : ids) id = count++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int v : labels) out.push_back(ids.at(v));
  return out;
}

double choose2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

bool identical_partitions(const ContingencyTable& t) {
  for (const auto& row : t.counts) {
    if (std::count_if(row.begin(), row.end(), [](auto c) { return c > 0; }) != 1) return false;
  }
  for (int j = 0; j < t.clusters(); ++j) {
    int nonzero = 0;
    for (const auto& row : t.counts) nonzero += row[static_cast<std::size_t>(j)] > 0;
    if (nonzero != 1) return false;
  }
  return true;
}

}  // namespace

ContingencyTable contingency(const std::vector<int>& true_labels, const std::vector<int>& pred_labels) {
  if (true_labels.size() != pred_labels.size()) {
    throw Error("label length mismatch: " + std::to_string(true_labels.size()) + " true vs " +
                std::to_string(pred_labels.size()) + " predicted");
  }
  if (true_labels.empty()) throw Error("cannot score an empty labelling");
  int T = 0, P = 0;
  const auto t = dense(true_labels, T);
  const auto p = dense(pred_labels, P);
  ContingencyTable table;
  table.counts.assign(static_cast<std::size_t>(T), std::vector<std::int64_t>(static_cast<std::size_t>(P), 0));
  table.row_sums.assign(static_cast<std::size_t>(T), 0);
  table.col_sums.assign(static_cast<std::size_t>(P), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++table.counts[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])];
    ++table.row_sums[static_cast<std::size_t>(t[i])];
    ++table.col_sums[static_cast<std::size_t>(p[i])];
  }
  table.total = static_cast<std::int64_t>(t.size());
  return table;
}

double nmi(const ContingencyTable& table) {
  const double n = static_cast<double>(table.total);
  double h_true = 0.0, h_pred = 0.0;
  for (auto r : table.row_sums) {
    if (r > 0) h_true += static_cast<double>(r) * std::log(static_cast<double>(r) / n);
  }
  for (auto c : table.col_sums) {
    if (c > 0) h_pred += static_cast<double>(c) * std::log(static_cast<double>(c) / n);
  }
  // Exact 1 for identical partitions; the ratio below can round to 1 - ulp.
  if (identical_partitions(table)) return 1.0;
  if (h_true == 0.0 || h_pred == 0.0) return 0.0;

  double mi = 0.0;
  for (int i = 0; i < table.topics(); ++i) {
    for (int j = 0; j < table.clusters(); ++j) {
      const auto v = table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v == 0) continue;
      mi += static_cast<double>(v) *
            std::log(n * static_cast<double>(v) /
                     (static_cast<double>(table.row_sums[static_cast<std::size_t>(i)]) *
                      static_cast<double>(table.col_sums[static_cast<std::size_t>(j)])));
    }
  }
  return std::clamp(mi / std::sqrt(h_true * h_pred), 0.0, 1.0);
}

double ari(const ContingencyTable& table) {
  if (table.total < 2) throw Error("ARI needs at least two documents");
  double sum_ij = 0.0, sum_i = 0.0, sum_j = 0.0;
  for (const auto& row : table.counts) {
    for (auto v : row) sum_ij += choose2(v);
  }
  for (auto r : table.row_sums) sum_i += choose2(r);
  for (auto c : table.col_sums) sum_j += choose2(c);
  const double expected = sum_i * sum_j / choose2(table.total);
  const double denom = 0.5 * (sum_i + sum_j) - expected;
  if (denom == 0.0) return 1.0;
  return (sum_ij - expected) / denom;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != n) throw Error("hungarian: cost matrix must be square");
  }
  if (n == 0) return {};
  // Shortest augmenting paths with row/column potentials, 1-based with a
  // virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

double acc(const std::vector<int>& true_labels, const std::vector<int>& pred_labels) {
  const auto table = contingency(true_labels, pred_labels);
  const int n = std::max(table.topics(), table.clusters());
  std::int64_t max_count = 0;
  for (const auto& row : table.counts) {
    for (auto v : row) max_count = std::max(max_count, v);
  }
  // Rows are predicted clusters, columns true topics; padding counts are 0.
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), static_cast<double>(max_count)));
  for (int i = 0; i < table.topics(); ++i) {
    for (int j = 0; j < table.clusters(); ++j) {
      cost[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
          static_cast<double>(max_count - table.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  const auto match = hungarian(cost);
  std::int64_t hit = 0;
  for (int j = 0; j < table.clusters(); ++j) {
    const int topic = match[static_cast<std::size_t>(j)];
    if (topic < table.topics()) hit += table.counts[static_cast<std::size_t>(topic)][static_cast<std::size_t>(j)];
  }
  return static_cast<double>(hit) / static_cast<double>(table.total);
}

Scores score(const std::vector<int>& true_labels, const std::vector<int>& pred_labels) {
  const auto table = contingency(true_labels, pred_labels);
  return {nmi(table), ari(table), acc(true_labels, pred_labels)};
}

}  // namespace arl
