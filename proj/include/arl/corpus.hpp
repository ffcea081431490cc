#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace arl {

struct RawDocument {
  int id = 0;
  std::string text;
};

class Vocabulary {
 public:
  // Appends a new token or returns the id it already has.
  int add(const std::string& token, std::int64_t frequency);

  std::optional<int> index_of(const std::string& token) const;
  const std::string& lookup(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::int64_t frequency(int id) const { return frequencies_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the newline-joined token list; identifies the id assignment.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> frequencies_;
  std::unordered_map<std::string, int> index_;
};

struct EncodedDocument {
  int id = 0;
  std::vector<int> token_ids;

  int length() const { return static_cast<int>(token_ids.size()); }
};

struct Corpus {
  std::vector<EncodedDocument> documents;
  Vocabulary vocabulary;
  std::optional<std::vector<int>> labels;  // aligned to documents, dense 0..T-1
  std::vector<int> dropped_ids;
  int original_count = 0;

  int size() const { return static_cast<int>(documents.size()); }
};

struct PreprocessOptions {
  int min_freq = 5;
  bool lowercase = true;
  bool remove_stopwords = true;
  // nullopt selects the bundled English list.
  std::optional<std::unordered_set<std::string>> stopwords;
  bool drop_irregular = true;  // irregular: anything outside [a-z] after lowercasing
  bool stem = true;
};

// Splits on ASCII and Unicode whitespace (UTF-8 input).
std::vector<std::string> tokenize(const std::string& text);

bool is_irregular(const std::string& token);

// Lowercase, stopword removal, irregular-token removal, Porter stemming,
// then a frequency cutoff on the stems. Documents left empty are dropped and
// listed in dropped_ids. Throws arl::Error if nothing survives.
Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessOptions& options);

// One document per line, ids in line order.
std::vector<RawDocument> read_corpus_file(const std::filesystem::path& path);

// One integer per line.
std::vector<std::int64_t> read_label_file(const std::filesystem::path& path);

// Labels are aligned to the original document order; entries for dropped
// documents are discarded and the rest remapped to dense 0..T-1 in
// ascending order of the original values.
Corpus attach_labels(Corpus corpus, const std::vector<std::int64_t>& original_labels);
Corpus load_labels(const std::filesystem::path& path, Corpus corpus);

// Dense 0..T-1 remap by ascending value.
std::vector<int> remap_dense(const std::vector<std::int64_t>& labels);

}  // namespace arl
