#include "arl/kmeans.hpp"

#include "arl/kernels.hpp"
#include "arl/random.hpp"

#include <algorithm>
#include <numeric>

namespace arl {

int count_distinct_columns(const Matrix& points) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.cols()));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
      if (points(r, a) != points(r, b)) return points(r, a) < points(r, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  int distinct = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

double within_cluster_ss(const Matrix& points, const Matrix& centroids, const std::vector<int>& assignments) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    s += (points.col(i) - centroids.col(assignments[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return s;
}

namespace {

Matrix seed_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.cols();
  Matrix centroids(points.rows(), k);
  centroids.col(0) = points.col(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2 = (points.colwise() - centroids.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Round-off can land the cumulative sum on a zero-distance tail.
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    }
    centroids.col(c) = points.col(pick);
    d2 = d2.cwiseMin((points.colwise() - centroids.col(c)).colwise().squaredNorm().transpose());
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  Rng rng(seed);
  KMeansResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  const Eigen::Index n = points.cols();

  for (int iter = 0;; ++iter) {
    res.assignments = assign_nearest_parallel(points, res.centroids);
    res.wcss = within_cluster_ss(points, res.centroids, res.assignments);
    res.wcss_history.push_back(res.wcss);
    res.iterations = iter;
    if (iter == options.max_iter) break;

    Matrix sums = Matrix::Zero(points.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = res.assignments[static_cast<std::size_t>(i)];
      sums.col(a) += points.col(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    Matrix next = res.centroids;
    std::vector<int> empty;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        empty.push_back(c);
      }
    }
    if (!empty.empty()) {
      Vector dist(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        dist[i] = (points.col(i) - next.col(res.assignments[static_cast<std::size_t>(i)])).squaredNorm();
      }
      for (int c : empty) {
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        next.col(c) = points.col(far);
        dist[far] = 0.0;
      }
    }
    const double shift = (next - res.centroids).colwise().norm().maxCoeff();
    res.centroids = std::move(next);
    if (shift < options.tol && empty.empty()) {
      res.assignments = assign_nearest_parallel(points, res.centroids);
      res.wcss = within_cluster_ss(points, res.centroids, res.assignments);
      res.wcss_history.push_back(res.wcss);
      res.iterations = iter + 1;
      break;
    }
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k <= 0) throw Error("k-means needs k >= 1, got " + std::to_string(k));
  if (options.restarts < 1) throw Error("k-means needs at least one restart");
  const int distinct = count_distinct_columns(points);
  if (k > distinct) {
    throw Error("k-means with k = " + std::to_string(k) + " but only " + std::to_string(distinct) +
                " distinct points");
  }
  std::vector<KMeansResult> runs(static_cast<std::size_t>(options.restarts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < options.restarts; ++r) {
    runs[static_cast<std::size_t>(r)] = lloyd(points, k, splitmix64(seed + static_cast<std::uint64_t>(r)), options);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].wcss < runs[best].wcss) best = r;
  }
  return std::move(runs[best]);
}

}  // namespace arl
