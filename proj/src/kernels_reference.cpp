#include "kernel_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arl {

// Straight-line serial version: recompute every embedding where it is
// needed, use the explicit softmax Jacobian, scatter into dense buffers.
BatchResult evaluate_batch_reference(const BatchInput& in, GradRequest want) {
  validate_batch(in);
  const auto B = in.batch.size();
  const Eigen::Index K = in.E.rows();
  const Eigen::Index M = in.c_eff.cols();
  const detail::WordDeltaLookup lookup(in.word_delta, static_cast<int>(in.E.cols()));

  Matrix dE = Matrix::Zero(K, in.E.cols());
  Matrix dC = Matrix::Zero(K, M);
  BatchResult out;

  auto scatter = [&](const EncodedDocument& doc, const Vector& g_doc) {
    for (int t : doc.token_ids) dE.col(t) += g_doc / static_cast<double>(doc.length());
  };

  for (std::size_t b = 0; b < B; ++b) {
    const auto& doc = in.batch[b];
    const DocEmbedding d{lookup.mean(in.E, doc.token_ids), doc.id};
    const AttentionDistribution attn = attention(in.c_eff, d);
    const DocEmbedding recon = reconstruct(in.c_eff, attn);
    const double i_rel = relevance(d, recon);

    double loss = 0.0;
    double d_irel = 0.0;  // dloss / d i_rel
    Vector g_d = Vector::Zero(K);

    if (in.switches.use_l1) {
      std::vector<double> neg_rels;
      for (int j : in.negs[b]) {
        const auto& other = in.batch[static_cast<std::size_t>(j)];
        const Vector dj = lookup.mean(in.E, other.token_ids);
        neg_rels.push_back(relevance(d.vector, dj));
      }
      loss += loss_pairwise(i_rel, neg_rels, in.gamma);
      const double w = 1.0 / static_cast<double>(neg_rels.size());
      for (std::size_t k = 0; k < neg_rels.size(); ++k) {
        if (in.gamma - i_rel + neg_rels[k] <= 0.0) continue;
        d_irel -= w;
        const auto& other = in.batch[static_cast<std::size_t>(in.negs[b][k])];
        const Vector dj = lookup.mean(in.E, other.token_ids);
        const auto cg = detail::cosine_with_grad(d.vector, dj);
        g_d += w * cg.grad_a;
        if (want.words) scatter(other, w * cg.grad_b);
      }
    }
    if (in.switches.use_l2) {
      loss += loss_pointwise(i_rel);
      d_irel -= 1.0;
    }
    out.value += loss;

    const auto cg = detail::cosine_with_grad(d.vector, recon.vector);
    g_d += d_irel * cg.grad_a;
    const Vector g_r = d_irel * cg.grad_b;

    // recon = C p, p = softmax(C^T d)
    const Vector& p = attn.probs;
    const Matrix jac = Matrix(p.asDiagonal()) - p * p.transpose();
    const Vector g_p = in.c_eff.transpose() * g_r;
    const Vector g_logits = jac * g_p;
    g_d += in.c_eff * g_logits;
    dC += g_r * p.transpose() + d.vector * g_logits.transpose();

    if (!std::isfinite(loss) || !g_d.allFinite()) {
      throw NumericError("non-finite loss or gradient for " + detail::doc_label(doc));
    }
    if (want.words) scatter(doc, g_d);
  }

  if (want.clusters) out.dC = std::move(dC);
  if (want.words) {
    std::vector<int> words;
    for (const auto& doc : in.batch) words.insert(words.end(), doc.token_ids.begin(), doc.token_ids.end());
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    out.dE.values.resize(K, static_cast<Eigen::Index>(words.size()));
    for (std::size_t k = 0; k < words.size(); ++k) out.dE.values.col(static_cast<Eigen::Index>(k)) = dE.col(words[k]);
    out.dE.index = std::move(words);
  }
  return out;
}

std::vector<int> assign_nearest_reference(const Matrix& points, const Matrix& centroids) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    Eigen::Index arg = 0;
    (centroids.colwise() - points.col(i)).colwise().squaredNorm().minCoeff(&arg);
    out.push_back(static_cast<int>(arg));
  }
  return out;
}

}  // namespace arl
