#pragma once

#include "arl/types.hpp"

#include <cstdint>
#include <vector>

namespace arl {

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-6;  // stop once no centroid moves farther than this
  int restarts = 1;   // best WCSS kept; ties go to the earlier restart
};

struct KMeansResult {
  Matrix centroids;  // K x k
  std::vector<int> assignments;
  double wcss = 0.0;
  std::vector<double> wcss_history;  // after each assignment step
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding over the columns of `points`.
// Empty clusters are re-seeded with the point farthest from its centroid.
// Throws arl::Error if k <= 0 or k exceeds the number of distinct points.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

int count_distinct_columns(const Matrix& points);

double within_cluster_ss(const Matrix& points, const Matrix& centroids, const std::vector<int>& assignments);

}  // namespace arl
