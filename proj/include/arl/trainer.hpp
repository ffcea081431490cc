#pragma once

#include "arl/adam.hpp"
#include "arl/corpus.hpp"
#include "arl/kmeans.hpp"
#include "arl/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace arl {

enum class Mode { arl, arl_adv, arl_random, arl_adv_word };

std::string mode_name(Mode mode);     // "arl", "arl-adv", ...
Mode parse_mode(const std::string& s);  // throws arl::Error

struct TrainConfig {
  int clusters = 0;  // M
  int dim = 300;     // K
  int batch_size = 64;
  double alpha = 1.0;
  double epsilon = 50.0;
  double gamma = 1.0;
  int neg_count = 5;
  int epochs = 50;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  Mode mode = Mode::arl_adv;
  bool train_w = true;
  bool train_c = true;
  bool use_l1 = true;
  bool use_l2 = true;
  std::optional<std::filesystem::path> pretrained;
  bool kmeans_init = true;
  int kmeans_restarts = 10;
  // Random vectors are uniform per coordinate with expected norm init_norm.
  double init_norm = 5.0;
  // Stop once fewer than 0.1% of documents change cluster for 3 epochs in a row.
  bool early_stop = false;
  Execution execution = Execution::parallel;

  void validate() const;  // throws arl::Error
  ObjectiveConfig objective() const;
  AdamSettings adam() const { return {learning_rate, beta1, beta2, adam_eps}; }
  std::int64_t trained_parameters(int vocab_size) const;
};

struct ClusterResult {
  std::vector<int> assignments;
  std::vector<double> max_probs;
  std::optional<Matrix> attn;  // N x M
  std::vector<double> history;  // per-epoch mean objective per document
  int epochs_run = 0;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_objective = 0.0;
  double churn = 0.0;  // fraction of documents whose cluster changed
};

using EpochCallback = std::function<void(const EpochStats&)>;

struct TrainResult {
  ModelParams params;
  ClusterResult result;
};

// Mean-pooled embeddings of every document, one column each.
Matrix document_embeddings(const Matrix& E, const Corpus& corpus);

ModelParams init_params(const Corpus& corpus, const TrainConfig& config);

// Row-wise argmax with ties going to the lowest index. attn is N x M.
ClusterResult assignments_from_attention(Matrix attn, bool keep_attn = true);

// Attention against the unperturbed C for every document.
ClusterResult extract_assignments(const ModelParams& params, const Corpus& corpus, bool keep_attn = true);

// min(count, batch - 1) distinct positions per entry, uniform, excluding self.
NegativeSets sample_negatives(int batch, int count, Rng& rng);

// Shuffled positions split into chunks of batch_size; a trailing chunk of one
// document is folded into the previous chunk so every batch has a negative.
std::vector<std::vector<int>> make_batches(int n, int batch_size, Rng& rng);

TrainResult train(const Corpus& corpus, const TrainConfig& config, const EpochCallback& on_epoch = {});

// TF-IDF columns (|V| x N), tf = raw count, idf = ln(N / df), L2-normalised.
Matrix tfidf(const Corpus& corpus);

// K-means with k = M on TF-IDF rows; max_probs are all 1.
ClusterResult baseline_kmeans_tfidf(const Corpus& corpus, const TrainConfig& config);

// Named model variants used by the ablation run.
struct Variant {
  std::string name;
  std::function<void(TrainConfig&)> apply;
};
const std::vector<Variant>& ablation_variants();

}  // namespace arl
