#pragma once

#include "arl/corpus.hpp"
#include "arl/model.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>

namespace arl {

struct PretrainedEmbeddings {
  int dim = 0;
  std::unordered_map<std::string, Vector> vectors;
};

// word2vec text format: "<count> <dim>" header, then "<token> v1 ... vdim".
PretrainedEmbeddings read_word2vec_text(const std::filesystem::path& path);

// Copies vectors for vocabulary tokens found in `emb` into the columns of E.
// Returns the number of hits. Throws arl::Error if emb.dim != E.rows().
int apply_pretrained(const PretrainedEmbeddings& emb, const Vocabulary& vocab, Matrix& E);

// Checkpoint text format, version 1 (see README):
//   arl-checkpoint 1
//   vocab-hash <16 hex digits>
//   config <single-line JSON>
//   E <rows> <cols>
//   <rows lines of cols values, %.17g>
//   C <rows> <cols>
//   <rows lines>
struct Checkpoint {
  ModelParams params;
  std::uint64_t vocab_hash = 0;
  std::string config_json = "{}";
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace arl
