#include "arl/model.hpp"

#include "arl/kernels.hpp"

#include <cmath>

namespace arl {

Matrix SparseColumns::to_dense(int cols) const {
  Matrix out = Matrix::Zero(values.rows(), cols);
  for (std::size_t k = 0; k < index.size(); ++k) out.col(index[k]) = values.col(static_cast<Eigen::Index>(k));
  return out;
}

Vector mean_pool(const Matrix& E, std::span<const int> token_ids) {
  if (token_ids.empty()) throw std::invalid_argument("mean_pool: empty document");
  Vector d = Vector::Zero(E.rows());
  for (int t : token_ids) {
    if (t < 0 || t >= E.cols()) throw std::out_of_range("mean_pool: token id " + std::to_string(t) + " out of range");
    d += E.col(t);
  }
  return d / static_cast<double>(token_ids.size());
}

DocEmbedding doc_embed(const ModelParams& params, const EncodedDocument& doc) {
  return {mean_pool(params.E, doc.token_ids), doc.id};
}

AttentionDistribution attention(const Matrix& c_eff, const DocEmbedding& d) {
  Vector s = c_eff.transpose() * d.vector;
  s.array() -= s.maxCoeff();
  s = s.array().exp();
  s /= s.sum();
  return {std::move(s), d.doc_id};
}

DocEmbedding reconstruct(const Matrix& c_eff, const AttentionDistribution& attn) {
  return {c_eff * attn.probs, attn.doc_id};
}

double relevance(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kNormFloor || nb < kNormFloor) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double loss_pairwise(double i_rel, std::span<const double> neg_rels, double gamma) {
  if (neg_rels.empty()) throw Error("pairwise loss needs at least one negative");
  double sum = 0.0;
  for (double r : neg_rels) sum += std::max(0.0, gamma - i_rel + r);
  return sum / static_cast<double>(neg_rels.size());
}

namespace {

double value_only(const Matrix& E, const WordPerturbation* wp, const Matrix& c_eff,
                  std::span<const EncodedDocument> batch, const NegativeSets& negs, double gamma,
                  LossSwitches switches) {
  BatchInput in{E, wp, c_eff, batch, negs, gamma, switches};
  return evaluate_batch_parallel(in, {false, false}).value;
}

// dE of the two terms share the same active word set, so values add column-wise.
void add_scaled(SparseColumns& acc, const SparseColumns& other, double scale) {
  if (acc.index != other.index) throw std::logic_error("sparse gradient index mismatch");
  acc.values += scale * other.values;
}

Gradients combine(BatchResult first, const BatchResult* second, const ObjectiveConfig& config, int dim,
                  int clusters) {
  Gradients g;
  g.objective = first.value;
  g.dE = std::move(first.dE);
  g.dC = std::move(first.dC);
  if (second != nullptr) {
    g.objective += config.alpha * second->value;
    if (config.train_w) add_scaled(g.dE, second->dE, config.alpha);
    if (config.train_c) g.dC += config.alpha * second->dC;
  }
  if (!config.train_w) g.dE = SparseColumns{{}, Matrix(dim, 0)};
  if (!config.train_c) g.dC = Matrix::Zero(dim, clusters);
  return g;
}

void check_finite(const Gradients& g) {
  if (!std::isfinite(g.objective)) throw NumericError("non-finite objective");
  if (!g.dE.values.allFinite() || !g.dC.allFinite()) throw NumericError("non-finite gradient");
}

}  // namespace

double objective_j1(const ModelParams& params, std::span<const EncodedDocument> batch, const NegativeSets& negs,
                    double gamma, LossSwitches switches) {
  return value_only(params.E, nullptr, params.C, batch, negs, gamma, switches);
}

double objective_j2(const ModelParams& params, const Perturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, double gamma, LossSwitches switches) {
  const Matrix c_eff = params.C + pert.delta;
  return value_only(params.E, nullptr, c_eff, batch, negs, gamma, switches);
}

double objective_j2(const ModelParams& params, const WordPerturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, double gamma, LossSwitches switches) {
  return value_only(params.E, &pert, params.C, batch, negs, gamma, switches);
}

Gradients gradients(const ModelParams& params, const Perturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, const ObjectiveConfig& config) {
  const GradRequest want{config.train_w, config.train_c};
  BatchInput clean{params.E, nullptr, params.C, batch, negs, config.gamma, config.switches};
  BatchResult first = evaluate_batch(clean, want, config.execution);
  Gradients g;
  if (config.alpha != 0.0) {
    const Matrix c_eff = params.C + pert.delta;
    BatchInput adv{params.E, nullptr, c_eff, batch, negs, config.gamma, config.switches};
    const BatchResult second = evaluate_batch(adv, want, config.execution);
    g = combine(std::move(first), &second, config, params.dim(), params.clusters());
  } else {
    g = combine(std::move(first), nullptr, config, params.dim(), params.clusters());
  }
  check_finite(g);
  return g;
}

Gradients gradients(const ModelParams& params, const WordPerturbation& pert, std::span<const EncodedDocument> batch,
                    const NegativeSets& negs, const ObjectiveConfig& config) {
  const GradRequest want{config.train_w, config.train_c};
  BatchInput clean{params.E, nullptr, params.C, batch, negs, config.gamma, config.switches};
  BatchResult first = evaluate_batch(clean, want, config.execution);
  Gradients g;
  if (config.alpha != 0.0) {
    BatchInput adv{params.E, &pert, params.C, batch, negs, config.gamma, config.switches};
    const BatchResult second = evaluate_batch(adv, want, config.execution);
    g = combine(std::move(first), &second, config, params.dim(), params.clusters());
  } else {
    g = combine(std::move(first), nullptr, config, params.dim(), params.clusters());
  }
  check_finite(g);
  return g;
}

Perturbation perturbation_from_gradient(const Matrix& g, double epsilon) {
  Perturbation p{Matrix::Zero(g.rows(), g.cols()), epsilon};
  for (Eigen::Index m = 0; m < g.cols(); ++m) {
    const double n = g.col(m).norm();
    if (n >= kNormFloor) p.delta.col(m) = g.col(m) * (epsilon / n);
  }
  return p;
}

Perturbation adversarial_step(const ModelParams& params, std::span<const EncodedDocument> batch,
                              const NegativeSets& negs, const ObjectiveConfig& config) {
  // At delta = 0 the perturbed objective coincides with the clean one.
  BatchInput in{params.E, nullptr, params.C, batch, negs, config.gamma, config.switches};
  const BatchResult r = evaluate_batch(in, {false, true}, config.execution);
  return perturbation_from_gradient(config.alpha * r.dC, config.epsilon);
}

WordPerturbation adversarial_word_step(const ModelParams& params, std::span<const EncodedDocument> batch,
                                       const NegativeSets& negs, const ObjectiveConfig& config) {
  BatchInput in{params.E, nullptr, params.C, batch, negs, config.gamma, config.switches};
  const BatchResult r = evaluate_batch(in, {true, false}, config.execution);
  const Perturbation cols = perturbation_from_gradient(config.alpha * r.dE.values, config.epsilon);
  return {r.dE.index, cols.delta, config.epsilon};
}

Perturbation random_perturbation(int dim, int clusters, double epsilon, Rng& rng) {
  Perturbation p{Matrix::Zero(dim, clusters), epsilon};
  for (int m = 0; m < clusters; ++m) {
    Vector v(dim);
    double n = 0.0;
    do {
      for (int k = 0; k < dim; ++k) v[k] = rng.normal();
      n = v.norm();
    } while (n < kNormFloor);
    p.delta.col(m) = v * (epsilon / n);
  }
  return p;
}

}  // namespace arl
