#include "arl/trainer.hpp"

#include "arl/embedding_io.hpp"
#include "arl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arl {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::arl: return "arl";
    case Mode::arl_adv: return "arl-adv";
    case Mode::arl_random: return "arl-random";
    case Mode::arl_adv_word: return "arl-adv-word";
  }
  return "unknown";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::arl, Mode::arl_adv, Mode::arl_random, Mode::arl_adv_word}) {
    if (mode_name(m) == s) return m;
  }
  throw Error("unknown mode '" + s + "'");
}

void TrainConfig::validate() const {
  if (clusters < 2) throw Error("cluster count M must be >= 2");
  if (dim < 1) throw Error("embedding dimension K must be >= 1");
  if (batch_size < 2) throw Error("batch size must be >= 2");
  if (!(epsilon >= 0.0)) throw Error("epsilon must be >= 0");
  if (!std::isfinite(alpha)) throw Error("alpha must be finite");
  if (!use_l1 && !use_l2) throw Error("at least one of the pairwise (L1) and pointwise (L2) losses is required");
  if (use_l1 && neg_count < 1) throw Error("negative count must be >= 1 when the pairwise loss is enabled");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw Error("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw Error("Adam eps must be > 0");
  if (kmeans_restarts < 1) throw Error("k-means restarts must be >= 1");
  if (!(init_norm > 0.0 && std::isfinite(init_norm))) throw Error("init norm must be > 0");
}

ObjectiveConfig TrainConfig::objective() const {
  ObjectiveConfig c;
  c.gamma = gamma;
  c.alpha = mode == Mode::arl ? 0.0 : alpha;
  c.epsilon = epsilon;
  c.switches = {use_l1, use_l2};
  c.train_w = train_w;
  c.train_c = train_c;
  c.execution = execution;
  return c;
}

std::int64_t TrainConfig::trained_parameters(int vocab_size) const {
  std::int64_t n = 0;
  if (train_w) n += static_cast<std::int64_t>(dim) * vocab_size;
  if (train_c) n += static_cast<std::int64_t>(dim) * clusters;
  return n;
}

Matrix document_embeddings(const Matrix& E, const Corpus& corpus) {
  Matrix D(E.rows(), corpus.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < corpus.size(); ++i) D.col(i) = mean_pool(E, corpus.documents[static_cast<std::size_t>(i)].token_ids);
  return D;
}

ModelParams init_params(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  const int K = config.dim;
  const int V = corpus.vocabulary.size();
  const double half = config.init_norm * std::sqrt(3.0 / K);
  ModelParams p;

  Rng word_rng(derive_seed(config.seed, Stream::word_init));
  p.E.resize(K, V);
  for (int w = 0; w < V; ++w) {
    for (int k = 0; k < K; ++k) p.E(k, w) = word_rng.uniform(-half, half);
  }
  if (config.pretrained) apply_pretrained(read_word2vec_text(*config.pretrained), corpus.vocabulary, p.E);

  if (config.kmeans_init) {
    const Matrix D = document_embeddings(p.E, corpus);
    const int distinct = count_distinct_columns(D);
    if (config.clusters > distinct) {
      throw Error("cluster count " + std::to_string(config.clusters) + " exceeds the " + std::to_string(distinct) +
                  " distinct document embeddings");
    }
    KMeansOptions opts;
    opts.restarts = config.kmeans_restarts;
    p.C = kmeans(D, config.clusters, derive_seed(config.seed, Stream::kmeans), opts).centroids;
  } else {
    Rng cluster_rng(derive_seed(config.seed, Stream::cluster_init));
    p.C.resize(K, config.clusters);
    for (int m = 0; m < config.clusters; ++m) {
      for (int k = 0; k < K; ++k) p.C(k, m) = cluster_rng.uniform(-half, half);
    }
  }
  return p;
}

ClusterResult assignments_from_attention(Matrix attn, bool keep_attn) {
  ClusterResult r;
  const auto n = static_cast<std::size_t>(attn.rows());
  r.assignments.resize(n);
  r.max_probs.resize(n);
  for (Eigen::Index i = 0; i < attn.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < attn.cols(); ++m) {
      if (attn(i, m) > attn(i, best)) best = m;
    }
    r.assignments[static_cast<std::size_t>(i)] = static_cast<int>(best);
    r.max_probs[static_cast<std::size_t>(i)] = attn(i, best);
  }
  if (keep_attn) r.attn = std::move(attn);
  return r;
}

ClusterResult extract_assignments(const ModelParams& params, const Corpus& corpus, bool keep_attn) {
  Matrix attn(corpus.size(), params.clusters());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < corpus.size(); ++i) {
    const auto& doc = corpus.documents[static_cast<std::size_t>(i)];
    attn.row(i) = attention(params.C, doc_embed(params, doc)).probs.transpose();
  }
  return assignments_from_attention(std::move(attn), keep_attn);
}

NegativeSets sample_negatives(int batch, int count, Rng& rng) {
  NegativeSets negs(static_cast<std::size_t>(batch));
  const int take = std::min(count, batch - 1);
  std::vector<int> pool;
  for (int b = 0; b < batch; ++b) {
    pool.clear();
    for (int j = 0; j < batch; ++j) {
      if (j != b) pool.push_back(j);
    }
    auto& out = negs[static_cast<std::size_t>(b)];
    for (int k = 0; k < take; ++k) {
      const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size() - k)));
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
      out.push_back(pool[static_cast<std::size_t>(k)]);
    }
  }
  return negs;
}

std::vector<std::vector<int>> make_batches(int n, int batch_size, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

namespace {

double churn(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) changed += a[i] != b[i];
  return a.empty() ? 0.0 : static_cast<double>(changed) / static_cast<double>(a.size());
}

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (corpus.size() < 2) throw Error("training needs at least two documents");

  TrainResult out;
  out.params = init_params(corpus, config);
  ModelParams& params = out.params;
  AdamState adam = AdamState::for_params(params);
  const AdamSettings adam_settings = config.adam();
  const ObjectiveConfig objective = config.objective();

  Rng shuffle_rng(derive_seed(config.seed, Stream::shuffle));
  Rng neg_rng(derive_seed(config.seed, Stream::negatives));
  Rng noise_rng(derive_seed(config.seed, Stream::noise));

  std::vector<double> history;
  std::vector<int> previous = extract_assignments(params, corpus, false).assignments;
  int calm_epochs = 0;
  int epochs_run = 0;
  std::vector<EncodedDocument> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = make_batches(corpus.size(), config.batch_size, shuffle_rng);
    double total = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      batch.clear();
      for (int i : batches[bi]) batch.push_back(corpus.documents[static_cast<std::size_t>(i)]);
      const int B = static_cast<int>(batch.size());
      const NegativeSets negs =
          config.use_l1 ? sample_negatives(B, config.neg_count, neg_rng) : NegativeSets(static_cast<std::size_t>(B));

      Gradients g;
      try {
        switch (config.mode) {
          case Mode::arl:
            g = gradients(params, Perturbation::zero(params.dim(), params.clusters()), batch, negs, objective);
            break;
          case Mode::arl_adv:
            g = gradients(params, adversarial_step(params, batch, negs, objective), batch, negs, objective);
            break;
          case Mode::arl_random:
            g = gradients(params, random_perturbation(params.dim(), params.clusters(), config.epsilon, noise_rng),
                          batch, negs, objective);
            break;
          case Mode::arl_adv_word:
            g = gradients(params, adversarial_word_step(params, batch, negs, objective), batch, negs, objective);
            break;
        }
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi + 1) + ": " + e.what());
      }
      if (!std::isfinite(g.objective)) {
        throw NumericError("non-finite objective at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(bi + 1));
      }
      total += g.objective;

      ++adam.t;
      if (config.train_w) adam_update(params.E, g.dE, adam.mE, adam.vE, adam.t, adam_settings);
      if (config.train_c) adam_update(params.C, g.dC, adam.mC, adam.vC, adam.t, adam_settings);
    }

    const double mean = total / corpus.size();
    history.push_back(mean);
    epochs_run = epoch;
    std::vector<int> current = extract_assignments(params, corpus, false).assignments;
    const double c = churn(previous, current);
    previous = std::move(current);
    if (on_epoch) on_epoch({epoch, mean, c});

    if (config.early_stop) {
      calm_epochs = c < 0.001 ? calm_epochs + 1 : 0;
      if (calm_epochs >= 3) break;
    }
  }

  out.result = extract_assignments(params, corpus, true);
  out.result.history = std::move(history);
  out.result.epochs_run = epochs_run;
  return out;
}

Matrix tfidf(const Corpus& corpus) {
  const int V = corpus.vocabulary.size();
  const int N = corpus.size();
  Matrix X = Matrix::Zero(V, N);
  std::vector<int> df(static_cast<std::size_t>(V), 0);
  for (int i = 0; i < N; ++i) {
    for (int t : corpus.documents[static_cast<std::size_t>(i)].token_ids) {
      if (X(t, i) == 0.0) ++df[static_cast<std::size_t>(t)];
      X(t, i) += 1.0;
    }
  }
  for (int t = 0; t < V; ++t) {
    const int f = df[static_cast<std::size_t>(t)];
    const double idf = f > 0 ? std::log(static_cast<double>(N) / f) : 0.0;
    X.row(t) *= idf;
  }
  for (int i = 0; i < N; ++i) {
    const double n = X.col(i).norm();
    if (n > 0.0) X.col(i) /= n;
  }
  return X;
}

ClusterResult baseline_kmeans_tfidf(const Corpus& corpus, const TrainConfig& config) {
  if (config.clusters < 1) throw Error("cluster count must be >= 1");
  KMeansOptions opts;
  opts.restarts = config.kmeans_restarts;
  const auto km = kmeans(tfidf(corpus), config.clusters, derive_seed(config.seed, Stream::kmeans), opts);
  ClusterResult r;
  r.assignments = km.assignments;
  r.max_probs.assign(km.assignments.size(), 1.0);
  r.epochs_run = 0;
  return r;
}

const std::vector<Variant>& ablation_variants() {
  // Every variant fixes all switches, so the base configuration only
  // contributes hyperparameters.
  static const auto full = [](TrainConfig& c, Mode mode) {
    c.mode = mode;
    c.train_w = c.train_c = c.use_l1 = c.use_l2 = true;
  };
  static const std::vector<Variant> variants = {
      {"ARL", [](TrainConfig& c) { full(c, Mode::arl); }},
      {"ARL-Adv", [](TrainConfig& c) { full(c, Mode::arl_adv); }},
      {"ARL-Random", [](TrainConfig& c) { full(c, Mode::arl_random); }},
      {"ARL-Adv(word)", [](TrainConfig& c) { full(c, Mode::arl_adv_word); }},
      {"ARL-Adv(no train w)", [](TrainConfig& c) { full(c, Mode::arl_adv); c.train_w = false; }},
      {"ARL-Adv(no train c)", [](TrainConfig& c) { full(c, Mode::arl_adv); c.train_c = false; }},
      {"ARL-Adv w/o L1", [](TrainConfig& c) { full(c, Mode::arl_adv); c.use_l1 = false; }},
      {"ARL-Adv w/o L2", [](TrainConfig& c) { full(c, Mode::arl_adv); c.use_l2 = false; }},
  };
  return variants;
}

}  // namespace arl
