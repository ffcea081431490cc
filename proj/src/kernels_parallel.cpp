#include "kernel_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arl {

void validate_batch(const BatchInput& in) {
  const auto B = in.batch.size();
  if (in.negs.size() != B) throw Error("negative sets must have one entry per batch document");
  if (!in.switches.use_l1 && !in.switches.use_l2) throw Error("at least one of L1/L2 must be enabled");
  if (in.c_eff.rows() != in.E.rows()) throw Error("word and cluster embeddings differ in dimension");
  for (std::size_t b = 0; b < B; ++b) {
    if (in.batch[b].token_ids.empty()) throw Error("empty " + detail::doc_label(in.batch[b]) + " in batch");
    if (in.switches.use_l1 && in.negs[b].empty()) {
      throw Error("no negatives for " + detail::doc_label(in.batch[b]) + " while the pairwise loss is enabled");
    }
    for (int j : in.negs[b]) {
      if (j < 0 || static_cast<std::size_t>(j) >= B || static_cast<std::size_t>(j) == b) {
        throw Error("invalid negative position " + std::to_string(j) + " for batch entry " + std::to_string(b));
      }
    }
  }
}

BatchResult evaluate_batch_parallel(const BatchInput& in, GradRequest want) {
  validate_batch(in);
  const int B = static_cast<int>(in.batch.size());
  const Eigen::Index K = in.E.rows();
  const Eigen::Index M = in.c_eff.cols();
  const Matrix& C = in.c_eff;
  const detail::WordDeltaLookup lookup(in.word_delta, static_cast<int>(in.E.cols()));
  const double u1 = in.switches.use_l1 ? 1.0 : 0.0;
  const double u2 = in.switches.use_l2 ? 1.0 : 0.0;

  Matrix D(K, B);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) D.col(b) = lookup.mean(in.E, in.batch[static_cast<std::size_t>(b)].token_ids);

  // Per-document forward and local backward. Everything written here is
  // indexed by b, so the loop has no shared accumulators.
  Matrix P(M, B), Gr(K, B), Gs(M, B), Gself(K, B);
  std::vector<Matrix> Gneg(static_cast<std::size_t>(B));
  std::vector<double> loss(static_cast<std::size_t>(B));
  std::vector<char> bad(static_cast<std::size_t>(B), 0);

#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const Vector d = D.col(b);
    Vector p(M);
    for (Eigen::Index m = 0; m < M; ++m) p[m] = C.col(m).dot(d);
    detail::softmax_inplace(p);
    Vector r = Vector::Zero(K);
    for (Eigen::Index m = 0; m < M; ++m) r.noalias() += p[m] * C.col(m);

    const auto pos = detail::cosine_with_grad(d, r);
    const auto& neg = in.negs[ub];
    const double n_neg = static_cast<double>(neg.size());

    double l1 = 0.0;
    double active = 0.0;
    Vector g_d = Vector::Zero(K);
    Matrix gneg(K, static_cast<Eigen::Index>(in.switches.use_l1 ? neg.size() : 0));
    if (in.switches.use_l1) {
      for (std::size_t k = 0; k < neg.size(); ++k) {
        const auto cj = detail::cosine_with_grad(d, D.col(neg[k]));
        const double margin = in.gamma - pos.value + cj.value;
        const double h = margin > 0.0 ? 1.0 : 0.0;
        l1 += std::max(0.0, margin);
        active += h;
        g_d.noalias() += (h / n_neg) * cj.grad_a;
        gneg.col(static_cast<Eigen::Index>(k)) = (h / n_neg) * cj.grad_b;
      }
      l1 /= n_neg;
    }
    loss[ub] = u1 * l1 - u2 * pos.value;

    const double coef_pos = -u1 * active / (in.switches.use_l1 ? n_neg : 1.0) - u2;
    const Vector g_r = coef_pos * pos.grad_b;
    g_d.noalias() += coef_pos * pos.grad_a;

    Vector g_p(M);
    for (Eigen::Index m = 0; m < M; ++m) g_p[m] = C.col(m).dot(g_r);
    const double pg = p.dot(g_p);
    const Vector g_s = p.cwiseProduct((g_p.array() - pg).matrix());
    for (Eigen::Index m = 0; m < M; ++m) g_d.noalias() += g_s[m] * C.col(m);

    P.col(b) = p;
    Gr.col(b) = g_r;
    Gs.col(b) = g_s;
    Gself.col(b) = g_d;
    if (!std::isfinite(loss[ub]) || !g_d.allFinite() || !g_r.allFinite() || !gneg.allFinite()) bad[ub] = 1;
    Gneg[ub] = std::move(gneg);
  }

  for (int b = 0; b < B; ++b) {
    if (bad[static_cast<std::size_t>(b)]) {
      throw NumericError("non-finite loss or gradient for " + detail::doc_label(in.batch[static_cast<std::size_t>(b)]));
    }
  }

  BatchResult out;
  for (double l : loss) out.value += l;

  if (want.clusters) {
    out.dC = Matrix::Zero(K, M);
    // Column m only depends on row m of P and Gs; batch order is fixed.
#pragma omp parallel for schedule(static)
    for (Eigen::Index m = 0; m < M; ++m) {
      auto col = out.dC.col(m);
      for (int b = 0; b < B; ++b) {
        col.noalias() += P(m, b) * Gr.col(b);
        col.noalias() += Gs(m, b) * D.col(b);
      }
    }
  }

  if (want.words) {
    Matrix Gdoc = Gself;
    for (int b = 0; b < B; ++b) {
      const auto& neg = in.negs[static_cast<std::size_t>(b)];
      const Matrix& gneg = Gneg[static_cast<std::size_t>(b)];
      for (Eigen::Index k = 0; k < gneg.cols(); ++k) Gdoc.col(neg[static_cast<std::size_t>(k)]) += gneg.col(k);
    }

    std::vector<int> words;
    for (const auto& doc : in.batch) words.insert(words.end(), doc.token_ids.begin(), doc.token_ids.end());
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    std::vector<int> slot(static_cast<std::size_t>(in.E.cols()), -1);
    for (std::size_t k = 0; k < words.size(); ++k) slot[static_cast<std::size_t>(words[k])] = static_cast<int>(k);

    out.dE.values = Matrix::Zero(K, static_cast<Eigen::Index>(words.size()));
    for (int b = 0; b < B; ++b) {
      const auto& doc = in.batch[static_cast<std::size_t>(b)];
      const Vector g = Gdoc.col(b) / static_cast<double>(doc.length());
      for (int t : doc.token_ids) out.dE.values.col(slot[static_cast<std::size_t>(t)]) += g;
    }
    out.dE.index = std::move(words);
  }
  return out;
}

std::vector<int> assign_nearest_parallel(const Matrix& points, const Matrix& centroids) {
  const Eigen::Index n = points.cols();
  std::vector<int> out(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
      const double dist = (points.col(i) - centroids.col(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = static_cast<int>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

}  // namespace arl
