#pragma once

// Batch objective/gradient kernels. evaluate_batch_parallel is the production
// path (OpenMP over documents, then over cluster columns); its reductions run
// in a fixed order, so results are bit-identical for any thread count.
// evaluate_batch_reference is a plain serial implementation kept as a test
// oracle and benchmark baseline.

#include "arl/model.hpp"

namespace arl {

struct BatchInput {
  const Matrix& E;
  const WordPerturbation* word_delta;  // may be null
  const Matrix& c_eff;
  std::span<const EncodedDocument> batch;
  const NegativeSets& negs;
  double gamma = 1.0;
  LossSwitches switches;
};

struct BatchResult {
  double value = 0.0;
  SparseColumns dE;  // gradient w.r.t. the (possibly perturbed) word columns
  Matrix dC;         // gradient w.r.t. c_eff
};

struct GradRequest {
  bool words = true;
  bool clusters = true;
};

BatchResult evaluate_batch_parallel(const BatchInput& in, GradRequest want);
BatchResult evaluate_batch_reference(const BatchInput& in, GradRequest want);

inline BatchResult evaluate_batch(const BatchInput& in, GradRequest want, Execution exec) {
  return exec == Execution::parallel ? evaluate_batch_parallel(in, want) : evaluate_batch_reference(in, want);
}

// Throws arl::Error on malformed negative sets.
void validate_batch(const BatchInput& in);

// Nearest-centroid assignment (squared Euclidean, ties to the lower index).
// Points and centroids are columns.
std::vector<int> assign_nearest_parallel(const Matrix& points, const Matrix& centroids);
std::vector<int> assign_nearest_reference(const Matrix& points, const Matrix& centroids);

}  // namespace arl
