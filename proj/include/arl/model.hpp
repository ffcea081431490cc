#pragma once

#include "arl/corpus.hpp"
#include "arl/random.hpp"
#include "arl/types.hpp"

#include <span>
#include <vector>

namespace arl {

// E: K x |V| word embeddings. C: K x M cluster embeddings.
struct ModelParams {
  Matrix E;
  Matrix C;

  int dim() const { return static_cast<int>(E.rows()); }
  int vocab_size() const { return static_cast<int>(E.cols()); }
  int clusters() const { return static_cast<int>(C.cols()); }
};

// Additive perturbation of the cluster matrix; every column has norm <= epsilon.
struct Perturbation {
  Matrix delta;
  double epsilon = 0.0;

  static Perturbation zero(int dim, int clusters) { return {Matrix::Zero(dim, clusters), 0.0}; }
};

// Additive perturbation of a subset of word columns (the word-level variant).
// delta.col(k) applies to word words[k].
struct WordPerturbation {
  std::vector<int> words;
  Matrix delta;
  double epsilon = 0.0;
};

struct DocEmbedding {
  Vector vector;
  int doc_id = 0;
};

struct AttentionDistribution {
  Vector probs;
  int doc_id = 0;
};

// Columns of a K x n matrix keyed by (sorted) column ids of a wider matrix.
struct SparseColumns {
  std::vector<int> index;
  Matrix values;

  Matrix to_dense(int cols) const;
};

struct Gradients {
  SparseColumns dE;  // only words occurring in the batch
  Matrix dC;
  double objective = 0.0;
};

struct LossSwitches {
  bool use_l1 = true;
  bool use_l2 = true;
};

enum class Execution { parallel, serial_reference };

struct ObjectiveConfig {
  double gamma = 1.0;
  double alpha = 1.0;    // weight of the perturbed objective
  double epsilon = 0.0;  // perturbation column norm
  LossSwitches switches;
  bool train_w = true;
  bool train_c = true;
  Execution execution = Execution::parallel;
};

// negs[b] lists positions (not document ids) of negatives for batch entry b.
using NegativeSets = std::vector<std::vector<int>>;

constexpr double kNormFloor = 1e-12;

Vector mean_pool(const Matrix& E, std::span<const int> token_ids);
DocEmbedding doc_embed(const ModelParams& params, const EncodedDocument& doc);

// Softmax over the dot products of d with the columns of c_eff.
AttentionDistribution attention(const Matrix& c_eff, const DocEmbedding& d);

// Attention-weighted sum of the columns of c_eff.
DocEmbedding reconstruct(const Matrix& c_eff, const AttentionDistribution& attn);

// Cosine similarity; 0 when either norm is below kNormFloor.
double relevance(const Vector& a, const Vector& b);
inline double relevance(const DocEmbedding& a, const DocEmbedding& b) { return relevance(a.vector, b.vector); }

double loss_pairwise(double i_rel, std::span<const double> neg_rels, double gamma);
inline double loss_pointwise(double i_rel) { return -i_rel; }

double objective_j1(const ModelParams& params, std::span<const EncodedDocument> batch, const NegativeSets& negs,
                    double gamma, LossSwitches switches);
double objective_j2(const ModelParams& params, const Perturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, double gamma, LossSwitches switches);
double objective_j2(const ModelParams& params, const WordPerturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, double gamma, LossSwitches switches);

// J = J1(E, C) + alpha * J2(E, C + delta), and its gradients with the
// perturbation held fixed. alpha == 0 skips the second term entirely.
Gradients gradients(const ModelParams& params, const Perturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, const ObjectiveConfig& config);
Gradients gradients(const ModelParams& params, const WordPerturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, const ObjectiveConfig& config);

// Column-wise epsilon * g / |g|; columns with |g| < kNormFloor become zero.
Perturbation perturbation_from_gradient(const Matrix& g, double epsilon);

// Fast-gradient perturbation of C, linearised at delta = 0.
Perturbation adversarial_step(const ModelParams& params, std::span<const EncodedDocument> batch,
                              const NegativeSets& negs, const ObjectiveConfig& config);

// Same rule applied to the word columns active in the batch; C untouched.
WordPerturbation adversarial_word_step(const ModelParams& params, std::span<const EncodedDocument> batch,
                                       const NegativeSets& negs, const ObjectiveConfig& config);

// Each column drawn uniformly from the sphere of radius epsilon.
Perturbation random_perturbation(int dim, int clusters, double epsilon, Rng& rng);

}  // namespace arl
