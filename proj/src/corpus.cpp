#include "arl/corpus.hpp"

#include "arl/porter.hpp"
#include "arl/stopwords.hpp"
#include "arl/types.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>

namespace arl {

int Vocabulary::add(const std::string& token, std::int64_t frequency) {
  auto [it, inserted] = index_.try_emplace(token, size());
  if (inserted) {
    tokens_.push_back(token);
    frequencies_.push_back(frequency);
  }
  return it->second;
}

std::optional<int> Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 sequence starting at i; malformed bytes decode as
// themselves so they never split a token.
char32_t decode_at(const std::string& s, std::size_t i, std::size_t& len) {
  const auto c0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto bits = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if (c0 < 0x80) {
    len = 1;
    return c0;
  }
  if ((c0 & 0xE0) == 0xC0 && cont(1)) {
    len = 2;
    return (static_cast<char32_t>(c0 & 0x1F) << 6) | bits(1);
  }
  if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    len = 3;
    return (static_cast<char32_t>(c0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
  }
  if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    len = 4;
    return (static_cast<char32_t>(c0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
  }
  len = 1;
  return 0xFFFD;
}

void lowercase_ascii(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_at(text, i, len);
    if (is_unicode_space(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.append(text, i, len);
    }
    i += len;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_irregular(const std::string& token) {
  return std::any_of(token.begin(), token.end(), [](char c) { return c < 'a' || c > 'z'; });
}

Corpus preprocess(const std::vector<RawDocument>& raw, const PreprocessOptions& options) {
  if (options.min_freq < 1) throw Error("min_freq must be >= 1");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].id != static_cast<int>(i)) throw Error("raw document ids must be dense and in input order");
  }

  const auto stopwords = options.remove_stopwords
                             ? (options.stopwords ? *options.stopwords : default_stopwords())
                             : std::unordered_set<std::string>{};
  const int n = static_cast<int>(raw.size());

  // Per-document token pipeline; step_alive[s][i] records whether document i
  // still has tokens after step s.
  enum Step { kTokenize, kStopwords, kIrregular, kStem, kNumSteps };
  std::vector<std::vector<std::string>> tokens(static_cast<std::size_t>(n));
  std::vector<std::array<bool, kNumSteps>> alive(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    auto toks = tokenize(raw[static_cast<std::size_t>(i)].text);
    auto& flags = alive[static_cast<std::size_t>(i)];
    flags[kTokenize] = !toks.empty();
    if (options.lowercase) {
      for (auto& t : toks) lowercase_ascii(t);
    }
    if (options.remove_stopwords) {
      std::erase_if(toks, [&](const std::string& t) { return stopwords.contains(t); });
    }
    flags[kStopwords] = !toks.empty();
    if (options.drop_irregular) {
      std::erase_if(toks, [](const std::string& t) { return is_irregular(t); });
    }
    flags[kIrregular] = !toks.empty();
    if (options.stem) {
      for (auto& t : toks) t = porter_stem(t);
    }
    flags[kStem] = !toks.empty();
    tokens[static_cast<std::size_t>(i)] = std::move(toks);
  }

  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& doc : tokens) {
    for (const auto& t : doc) ++freq[t];
  }

  Corpus corpus;
  corpus.original_count = n;
  for (int i = 0; i < n; ++i) {
    EncodedDocument enc;
    enc.id = i;
    for (const auto& t : tokens[static_cast<std::size_t>(i)]) {
      const auto f = freq.at(t);
      if (f < options.min_freq) continue;
      enc.token_ids.push_back(corpus.vocabulary.add(t, f));
    }
    if (enc.token_ids.empty()) {
      corpus.dropped_ids.push_back(i);
    } else {
      corpus.documents.push_back(std::move(enc));
    }
  }

  if (corpus.documents.empty()) {
    static constexpr const char* kNames[] = {"tokenization", "stopword removal", "irregular-token removal",
                                             "stemming"};
    std::string step = "frequency cutoff";
    for (int s = 0; s < kNumSteps; ++s) {
      const bool any = std::any_of(alive.begin(), alive.end(), [s](const auto& f) { return f[s]; });
      if (!any) {
        step = kNames[s];
        break;
      }
    }
    if (n == 0) step = "tokenization";
    throw Error("corpus is empty after preprocessing (last document removed by " + step + ")");
  }
  return corpus;
}

std::vector<RawDocument> read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::vector<RawDocument> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back({static_cast<int>(out.size()), std::move(line)});
  }
  return out;
}

std::vector<std::int64_t> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();

  std::vector<std::int64_t> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto b = l.find_first_not_of(" \t");
    const auto e = l.find_last_not_of(" \t\r");
    std::int64_t v = 0;
    const char* first = l.data() + (b == std::string::npos ? l.size() : b);
    const char* last = l.data() + (e == std::string::npos ? l.size() : e + 1);
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
      throw Error(path.string() + ":" + std::to_string(i + 1) + ": expected an integer label, got '" + l + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> remap_dense(const std::vector<std::int64_t>& labels) {
  std::map<std::int64_t, int> ids;
  for (auto v : labels) ids.emplace(v, 0);
  int next = 0;
  for (auto& [v, id] : ids) id = next++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (auto v : labels) out.push_back(ids.at(v));
  return out;
}

Corpus attach_labels(Corpus corpus, const std::vector<std::int64_t>& original_labels) {
  if (static_cast<int>(original_labels.size()) != corpus.original_count) {
    throw Error("label count " + std::to_string(original_labels.size()) + " does not match document count " +
                std::to_string(corpus.original_count));
  }
  std::vector<std::int64_t> kept;
  kept.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) kept.push_back(original_labels[static_cast<std::size_t>(d.id)]);
  corpus.labels = remap_dense(kept);
  return corpus;
}

Corpus load_labels(const std::filesystem::path& path, Corpus corpus) {
  return attach_labels(std::move(corpus), read_label_file(path));
}

}  // namespace arl
