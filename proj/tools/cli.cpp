#include "cli.hpp"

#include "arl/corpus.hpp"
#include "arl/embedding_io.hpp"
#include "arl/metrics.hpp"
#include "arl/stopwords.hpp"
#include "arl/trainer.hpp"
#include "arl/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace arl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct ClusterArgs {
  std::string corpus;
  std::string labels;
  std::string mode = "arl-adv";
  std::string seeds;
  std::string out = "arl_out";
  std::string stopwords;
  std::string execution = "parallel";
  std::string embeddings;
  bool ablate = false;
  bool record_timing = false;
  bool save_checkpoint = false;
  bool quiet = false;
  int threads = 0;
  TrainConfig train;
  PreprocessOptions prep;
};

struct ScoreArgs {
  std::string truth;
  std::string pred;
};

// "1,2,5" or "1..10" or a mix of both.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error("invalid seed list '" + text + "'");
    return static_cast<std::uint64_t>(v);
  };
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(number(part));
      continue;
    }
    const auto lo = number(part.substr(0, dots));
    const auto hi = number(part.substr(dots + 2));
    if (hi < lo || hi - lo > 100000) throw Error("invalid seed range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw Error("empty seed list");
  return seeds;
}

json config_snapshot(const ClusterArgs& a, const std::string& mode, const TrainConfig& t, int vocab_size,
                     const std::vector<std::uint64_t>& seeds) {
  json prep = {{"min_freq", a.prep.min_freq},
               {"lowercase", a.prep.lowercase},
               {"remove_stopwords", a.prep.remove_stopwords},
               {"stopwords", a.stopwords.empty() ? json("builtin") : json(a.stopwords)},
               {"drop_irregular", a.prep.drop_irregular},
               {"stem", a.prep.stem}};
  json c = {{"corpus", a.corpus},
            {"labels", a.labels.empty() ? json(nullptr) : json(a.labels)},
            {"mode", mode},
            {"seeds", seeds},
            {"preprocess", prep}};
  c["clusters"] = t.clusters;
  if (mode == "kmeans-tfidf") {
    c["kmeans_restarts"] = t.kmeans_restarts;
    return c;
  }
  c["dim"] = t.dim;
  c["batch_size"] = t.batch_size;
  c["alpha"] = t.alpha;
  c["epsilon"] = t.epsilon;
  c["gamma"] = t.gamma;
  c["neg_count"] = t.neg_count;
  c["epochs"] = t.epochs;
  c["learning_rate"] = t.learning_rate;
  c["beta1"] = t.beta1;
  c["beta2"] = t.beta2;
  c["adam_eps"] = t.adam_eps;
  c["train_w"] = t.train_w;
  c["train_c"] = t.train_c;
  c["use_l1"] = t.use_l1;
  c["use_l2"] = t.use_l2;
  c["embeddings"] = a.embeddings.empty() ? json(nullptr) : json(a.embeddings);
  c["kmeans_init"] = t.kmeans_init;
  c["kmeans_restarts"] = t.kmeans_restarts;
  c["init_norm"] = t.init_norm;
  c["early_stop"] = t.early_stop;
  c["execution"] = a.execution;
  c["trained_parameters"] = t.trained_parameters(vocab_size);
  return c;
}

json metrics_json(const Scores& s) { return {{"nmi", s.nmi}, {"ari", s.ari}, {"acc", s.acc}}; }

// Mean and population standard deviation of each metric across seeds.
std::pair<json, json> summarize(const std::vector<Scores>& all) {
  auto stat = [&](double Scores::*field) {
    double mean = 0.0;
    for (const auto& s : all) mean += s.*field;
    mean /= static_cast<double>(all.size());
    double var = 0.0;
    for (const auto& s : all) var += (s.*field - mean) * (s.*field - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(all.size()))};
  };
  const auto n = stat(&Scores::nmi), r = stat(&Scores::ari), c = stat(&Scores::acc);
  return {{{"nmi", n.first}, {"ari", r.first}, {"acc", c.first}},
          {{"nmi", n.second}, {"ari", r.second}, {"acc", c.second}}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_assignments(const fs::path& path, const Corpus& corpus, const ClusterResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "doc_id\tcluster\tmax_prob\n";
  for (int i = 0; i < corpus.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    out << corpus.documents[u].id << '\t' << r.assignments[u] << '\t' << format_double(r.max_probs[u]) << '\n';
  }
  if (!out) throw Error("error writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("error writing " + path.string());
}

class Session {
 public:
  Session(const ClusterArgs& args, std::ostream& err) : a_(args), err_(err) {}

  int run() {
    const auto t0 = std::chrono::steady_clock::now();
    if (a_.threads > 0) omp_set_num_threads(a_.threads);
    if (a_.mode != "kmeans-tfidf") parse_mode(a_.mode);
    if (a_.execution != "parallel" && a_.execution != "reference") {
      throw Error("--execution must be 'parallel' or 'reference'");
    }
    if (a_.train.clusters < 1) throw Error("--clusters must be >= 1");

    PreprocessOptions prep = a_.prep;
    if (!a_.stopwords.empty()) prep.stopwords = read_stopwords(a_.stopwords);
    corpus_ = preprocess(read_corpus_file(a_.corpus), prep);
    if (!a_.labels.empty()) corpus_ = load_labels(a_.labels, std::move(corpus_));
    seeds_ = a_.seeds.empty() ? (a_.labels.empty() ? std::vector<std::uint64_t>{1} : parse_seeds("1..10"))
                              : parse_seeds(a_.seeds);

    fs::create_directories(a_.out);
    log_ << "corpus " << a_.corpus << ": " << corpus_.original_count << " documents, " << corpus_.size()
         << " retained, vocabulary " << corpus_.vocabulary.size() << '\n';
    log_ << "dropped " << corpus_.dropped_ids.size() << ":";
    for (int id : corpus_.dropped_ids) log_ << ' ' << id;
    log_ << '\n';

    if (a_.ablate) {
      json all = json::object();
      for (const auto& v : ablation_variants()) {
        TrainConfig t = base_config();
        v.apply(t);
        log_ << "variant " << v.name << '\n';
        all[v.name] = run_record(mode_name(t.mode), t, false);
      }
      write_text(fs::path(a_.out) / "ablation.json", all.dump(2) + "\n");
    } else {
      const json record = run_record(a_.mode, base_config(), true);
      json out = record;
      const double secs = elapsed(t0);
      if (a_.record_timing) out["wall_clock_seconds"] = secs;
      write_text(fs::path(a_.out) / "metrics.json", out.dump(2) + "\n");
    }
    log_ << "wall-clock seconds " << format_double(elapsed(t0)) << '\n';
    write_text(fs::path(a_.out) / "run.log", log_.str());
    return 0;
  }

 private:
  static double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  TrainConfig base_config() const {
    TrainConfig t = a_.train;
    if (a_.mode != "kmeans-tfidf") t.mode = parse_mode(a_.mode);
    if (!a_.embeddings.empty()) t.pretrained = fs::path(a_.embeddings);
    t.execution = a_.execution == "reference" ? Execution::serial_reference : Execution::parallel;
    return t;
  }

  json run_record(const std::string& mode, const TrainConfig& base, bool write_outputs) {
    const bool baseline = mode == "kmeans-tfidf";
    if (!baseline) base.validate();
    json record;
    record["config"] = config_snapshot(a_, mode, base, corpus_.vocabulary.size(), seeds_);
    record["documents"] = corpus_.original_count;
    record["retained_documents"] = corpus_.size();
    record["dropped_documents"] = corpus_.dropped_ids.size();
    record["vocabulary_size"] = corpus_.vocabulary.size();

    std::vector<Scores> scores;
    json runs = json::array();
    for (std::size_t si = 0; si < seeds_.size(); ++si) {
      TrainConfig t = base;
      t.seed = seeds_[si];
      const auto t0 = std::chrono::steady_clock::now();
      ClusterResult result;
      std::optional<ModelParams> params;
      if (baseline) {
        result = baseline_kmeans_tfidf(corpus_, t);
      } else {
        auto progress = [&](const EpochStats& s) {
          std::ostringstream line;
          line << "seed " << t.seed << " epoch " << s.epoch << " J " << format_double(s.mean_objective) << " churn "
               << format_double(s.churn);
          log_ << line.str() << '\n';
          if (!a_.quiet) err_ << line.str() << std::endl;
        };
        auto trained = train(corpus_, t, progress);
        result = std::move(trained.result);
        params = std::move(trained.params);
      }
      log_ << "seed " << t.seed << " finished in " << format_double(elapsed(t0)) << " s\n";

      json run = {{"seed", t.seed}};
      if (corpus_.labels) {
        scores.push_back(score(*corpus_.labels, result.assignments));
        run["metrics"] = metrics_json(scores.back());
      }
      double mean_max = 0.0;
      for (double p : result.max_probs) mean_max += p;
      run["mean_max_prob"] = mean_max / static_cast<double>(result.max_probs.size());
      run["epochs_run"] = result.epochs_run;
      run["history"] = result.history;
      runs.push_back(std::move(run));

      if (write_outputs) {
        const std::string suffix = si == 0 ? "" : ".seed-" + std::to_string(t.seed);
        write_assignments(fs::path(a_.out) / ("assignments" + suffix + ".tsv"), corpus_, result);
        if (a_.save_checkpoint && params) {
          Checkpoint ck{*params, corpus_.vocabulary.hash(), record["config"].dump()};
          save_checkpoint(fs::path(a_.out) / ("model.seed-" + std::to_string(t.seed) + ".ckpt"), ck);
        }
      }
    }
    record["seeds"] = runs;
    if (!scores.empty()) {
      auto [mean, stdev] = summarize(scores);
      record["mean"] = mean;
      record["std"] = stdev;
    }
    return record;
  }

  const ClusterArgs& a_;
  std::ostream& err_;
  Corpus corpus_;
  std::vector<std::uint64_t> seeds_;
  std::ostringstream log_;
};

void add_cluster_options(CLI::App& cmd, ClusterArgs& a) {
  TrainConfig& t = a.train;
  cmd.add_option("--config", "key=value file (keys are flag names); command-line flags take precedence")
      ->check(CLI::ExistingFile);
  cmd.add_option("--corpus", a.corpus, "Corpus file, one document per line")->required()->check(CLI::ExistingFile);
  cmd.add_option("--clusters", t.clusters, "Number of clusters M")->required();
  cmd.add_option("--labels", a.labels, "Gold label file aligned to corpus lines")->check(CLI::ExistingFile);
  cmd.add_option("--mode", a.mode, "arl, arl-adv, arl-random, arl-adv-word or kmeans-tfidf")
      ->capture_default_str()
      ->check(CLI::IsMember({"arl", "arl-adv", "arl-random", "arl-adv-word", "kmeans-tfidf"}));
  cmd.add_option("--seeds", a.seeds, "Seed list such as 1,2,3 or 1..10 (default 1..10 with labels, else 1)");
  cmd.add_option("--embeddings", a.embeddings, "Pretrained word2vec text file")->check(CLI::ExistingFile);
  cmd.add_option("--out", a.out, "Output directory")->capture_default_str();
  cmd.add_flag("--ablate", a.ablate, "Run every ablation variant and write ablation.json");
  cmd.add_flag("--record-timing", a.record_timing, "Include wall-clock seconds in metrics.json");
  cmd.add_flag("--save-checkpoint", a.save_checkpoint, "Write model.seed-<s>.ckpt for each seed");
  cmd.add_flag("--quiet", a.quiet, "No per-epoch progress on stderr");
  cmd.add_option("--threads", a.threads, "OpenMP thread count (0 = runtime default)")->check(CLI::NonNegativeNumber);

  cmd.add_option("--min-freq", a.prep.min_freq, "Drop stems occurring fewer times")->capture_default_str();
  cmd.add_flag("--lowercase,!--no-lowercase", a.prep.lowercase, "Lowercase tokens");
  cmd.add_flag("--remove-stopwords,!--keep-stopwords", a.prep.remove_stopwords, "Remove stopwords");
  cmd.add_option("--stopwords", a.stopwords, "Stopword file replacing the built-in list")->check(CLI::ExistingFile);
  cmd.add_flag("--drop-irregular,!--keep-irregular", a.prep.drop_irregular, "Drop tokens with characters outside a-z");
  cmd.add_flag("--stem,!--no-stem", a.prep.stem, "Porter-stem tokens");

  cmd.add_option("--dim", t.dim, "Embedding dimension K")->capture_default_str();
  cmd.add_option("--batch-size", t.batch_size)->capture_default_str();
  cmd.add_option("--alpha", t.alpha, "Weight of the perturbed objective")->capture_default_str();
  cmd.add_option("--epsilon", t.epsilon, "Perturbation norm")->capture_default_str();
  cmd.add_option("--gamma", t.gamma, "Hinge margin")->capture_default_str();
  cmd.add_option("--neg-count", t.neg_count, "Negatives per document")->capture_default_str();
  cmd.add_option("--epochs", t.epochs)->capture_default_str();
  cmd.add_option("--learning-rate", t.learning_rate)->capture_default_str();
  cmd.add_option("--beta1", t.beta1)->capture_default_str();
  cmd.add_option("--beta2", t.beta2)->capture_default_str();
  cmd.add_option("--adam-eps", t.adam_eps)->capture_default_str();
  cmd.add_flag("--train-w,!--no-train-w", t.train_w, "Update word embeddings");
  cmd.add_flag("--train-c,!--no-train-c", t.train_c, "Update cluster embeddings");
  cmd.add_flag("--use-l1,!--no-l1", t.use_l1, "Pairwise hinge loss");
  cmd.add_flag("--use-l2,!--no-l2", t.use_l2, "Pointwise loss");
  cmd.add_flag("--kmeans-init,!--random-init", t.kmeans_init, "Initialise clusters with k-means");
  cmd.add_option("--kmeans-restarts", t.kmeans_restarts)->capture_default_str();
  cmd.add_option("--init-norm", t.init_norm, "Expected norm of randomly initialised vectors")->capture_default_str();
  cmd.add_flag("--early-stop,!--no-early-stop", t.early_stop, "Stop after 3 epochs of <0.1% churn");
  cmd.add_option("--execution", a.execution, "parallel or reference")->capture_default_str();
}

int run_score(const ScoreArgs& a, std::ostream& out) {
  const auto truth = read_label_file(a.truth);
  const auto pred = read_label_file(a.pred);
  if (truth.size() != pred.size()) {
    throw Error("label count mismatch: --true has " + std::to_string(truth.size()) + ", --pred has " +
                std::to_string(pred.size()));
  }
  const Scores s = score(remap_dense(truth), remap_dense(pred));
  out << metrics_json(s).dump() << '\n';
  return 0;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Turns "key = value" lines into "--key=value" arguments. Blank lines,
// "#"/";" comments and [section] headers are skipped.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw Error(path + ":" + std::to_string(lineno) + ": nested config files are not supported");
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

// Config-file values are spliced in right after the subcommand name, so any
// flag given on the command line comes later and wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || args[0] != "cluster") return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> out{args[0]};
  for (auto& a : config_file_args(path)) out.push_back(std::move(a));
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Short-text clustering with attentive representation learning"};
  app.name("arlclust");
  app.require_subcommand(1);
  app.set_version_flag("--version", "arlclust 1.0");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ClusterArgs cluster;
  auto* cmd = app.add_subcommand("cluster", "Train and assign clusters");
  add_cluster_options(*cmd, cluster);

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Score a predicted labelling against gold labels");
  score_cmd->add_option("--true", sc.truth, "Gold label file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--pred", sc.pred, "Predicted label file")->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed;
  try {
    const auto expanded = expand_config(args);
    reversed.assign(expanded.rbegin(), expanded.rend());
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "arlclust 1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    if (*score_cmd) return run_score(sc, out);
    return Session(cluster, err).run();
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace arl::cli
