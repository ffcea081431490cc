#include "arl/embedding_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace arl {

PretrainedEmbeddings read_word2vec_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  long long count = 0;
  PretrainedEmbeddings out;
  std::string header;
  if (!std::getline(in, header)) throw Error(path.string() + ": missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> count >> out.dim) || count < 0 || out.dim <= 0) {
      throw Error(path.string() + ": header must be '<count> <dim>'");
    }
  }
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    Vector v(out.dim);
    for (int k = 0; k < out.dim; ++k) {
      if (!(ls >> v[k])) {
        throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(out.dim) +
                    " values for '" + token + "'");
      }
    }
    double extra;
    if (ls >> extra) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": more than " + std::to_string(out.dim) +
                  " values for '" + token + "'");
    }
    out.vectors.insert_or_assign(token, std::move(v));
  }
  if (static_cast<long long>(out.vectors.size()) > count) {
    throw Error(path.string() + ": header announces " + std::to_string(count) + " vectors, file has more");
  }
  return out;
}

int apply_pretrained(const PretrainedEmbeddings& emb, const Vocabulary& vocab, Matrix& E) {
  if (emb.dim != E.rows()) {
    throw Error("pretrained embedding dimension " + std::to_string(emb.dim) + " does not match K = " +
                std::to_string(E.rows()));
  }
  int hits = 0;
  for (int w = 0; w < vocab.size(); ++w) {
    auto it = emb.vectors.find(vocab.lookup(w));
    if (it == emb.vectors.end()) continue;
    E.col(w) = it->second;
    ++hits;
  }
  return hits;
}

namespace {

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& name) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name || rows < 0 || cols < 0) {
    throw Error("checkpoint: expected matrix header '" + name + " <rows> <cols>'");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> m(r, c))) throw Error("checkpoint: truncated matrix " + name);
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ckpt.vocab_hash));
  out << "arl-checkpoint 1\n";
  out << "vocab-hash " << hash << '\n';
  out << "config " << ckpt.config_json << '\n';
  write_matrix(out, "E", ckpt.params.E);
  write_matrix(out, "C", ckpt.params.C);
  if (!out) throw Error("error writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "arl-checkpoint") throw Error(path.string() + ": not a checkpoint");
  if (version != 1) throw Error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  std::string tag, hash;
  if (!(in >> tag >> hash) || tag != "vocab-hash") throw Error(path.string() + ": missing vocab-hash");
  ckpt.vocab_hash = std::stoull(hash, nullptr, 16);
  if (!(in >> tag) || tag != "config") throw Error(path.string() + ": missing config line");
  std::getline(in, ckpt.config_json);
  if (!ckpt.config_json.empty() && ckpt.config_json.front() == ' ') ckpt.config_json.erase(0, 1);
  ckpt.params.E = read_matrix(in, "E");
  ckpt.params.C = read_matrix(in, "C");
  if (ckpt.params.E.rows() != ckpt.params.C.rows()) throw Error(path.string() + ": E and C row counts differ");
  return ckpt;
}

}  // namespace arl
