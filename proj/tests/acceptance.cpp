// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "arl/corpus.hpp"
#include "arl/metrics.hpp"
#include "arl/model.hpp"
#include "arl/porter.hpp"
#include "arl/trainer.hpp"
#include "cli.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace arl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Draws instances until none of the hinges, clean or perturbed, sits within
// 1e-3 of its kink.
testing::Instance smooth_instance(Rng& rng, const ObjectiveConfig& cfg, Perturbation& pert) {
  for (;;) {
    auto inst = testing::random_instance(rng, 8, 4, 30, 6, 3);
    pert = adversarial_step(inst.params, inst.batch, inst.negs, cfg);
    const Matrix moved = inst.params.C + pert.delta;
    if (testing::min_hinge_margin(inst.params.E, inst.params.C, inst.batch, inst.negs, cfg.gamma) > 1e-3 &&
        testing::min_hinge_margin(inst.params.E, moved, inst.batch, inst.negs, cfg.gamma) > 1e-3) {
      return inst;
    }
  }
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  ObjectiveConfig cfg;
  cfg.alpha = 1.0;
  cfg.epsilon = 0.5;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Perturbation pert;
    const auto inst = smooth_instance(rng, cfg, pert);
    const auto rep = testing::finite_difference_check(inst, pert, cfg, 1e-5);
    worst = std::max({worst, rep.max_rel_E, rep.max_rel_C});
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 5.0,
          "max relative error " + fmt("%.3g", worst) + " over 20 instances (denominator floor 1e-6), " +
              fmt("%.2f", secs) + " s"};
}

Outcome perturbation_contract() {
  Rng rng(1002);
  double worst_norm = 0.0;
  double worst_gap = 0.0;
  int nonzero = 0;
  for (int i = 0; i < 50; ++i) {
    const auto inst = testing::random_instance(rng);
    ObjectiveConfig cfg;
    cfg.epsilon = 0.1 + i;
    const auto p = adversarial_step(inst.params, inst.batch, inst.negs, cfg);
    for (Eigen::Index m = 0; m < p.delta.cols(); ++m) {
      const double n = p.delta.col(m).norm();
      if (n == 0.0) continue;
      ++nonzero;
      worst_norm = std::max(worst_norm, std::abs(n - cfg.epsilon));
    }
    cfg.epsilon = 0.0;
    const auto z = adversarial_step(inst.params, inst.batch, inst.negs, cfg);
    const double j1 = objective_j1(inst.params, inst.batch, inst.negs, cfg.gamma, cfg.switches);
    const double j2 = objective_j2(inst.params, z, inst.batch, inst.negs, cfg.gamma, cfg.switches);
    worst_gap = std::max(worst_gap, std::abs(j2 - j1));
  }
  return {nonzero > 0 && worst_norm <= 1e-9 && worst_gap <= 1e-12,
          "max | |delta_m| - eps | " + fmt("%.3g", worst_norm) + " over " + std::to_string(nonzero) +
              " columns; max |J2 - J1| at eps=0 " + fmt("%.3g", worst_gap)};
}

Outcome adversarial_ascent() {
  Rng rng(1003);
  Rng noise(1004);
  int wins = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    const auto inst = testing::random_instance(rng);
    ObjectiveConfig cfg;
    cfg.epsilon = 0.5;
    const auto adv = adversarial_step(inst.params, inst.batch, inst.negs, cfg);
    const auto rnd = random_perturbation(inst.params.dim(), inst.params.clusters(), cfg.epsilon, noise);
    const double ja = objective_j2(inst.params, adv, inst.batch, inst.negs, cfg.gamma, cfg.switches);
    const double jr = objective_j2(inst.params, rnd, inst.batch, inst.negs, cfg.gamma, cfg.switches);
    wins += ja >= jr;
  }
  const double rate = static_cast<double>(wins) / trials;
  return {rate >= 0.8, std::to_string(wins) + "/" + std::to_string(trials) + " trials (" + fmt("%.1f", 100 * rate) +
                           "%) with J2(adv) >= J2(random, same norm)"};
}

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  Rng rng(1005);
  int acc_bad = 0;
  double nmi_err = 0.0, ari_err = 0.0;
  int perfect_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(39));
    const int kt = 1 + static_cast<int>(rng.below(6));
    const int kp = 1 + static_cast<int>(rng.below(6));
    std::vector<int> t, p;
    for (int i = 0; i < n; ++i) {
      t.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(kt))));
      p.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(kp))));
    }
    acc_bad += acc(t, p) != testing::acc_bruteforce(t, p);
    const auto table = contingency(t, p);
    const double no = testing::nmi_oracle(t, p);
    // The straight-line formula is undefined when a partition has zero
    // entropy; the convention there is 1 for identical partitions, else 0.
    const bool both_trivial = std::set<int>(t.begin(), t.end()).size() == 1 && std::set<int>(p.begin(), p.end()).size() == 1;
    const double nmi_expect = std::isnan(no) ? (both_trivial ? 1.0 : 0.0) : no;
    nmi_err = std::max(nmi_err, std::abs(nmi(table) - nmi_expect));
    const double ao = testing::ari_oracle(t, p);
    if (std::isfinite(ao)) ari_err = std::max(ari_err, std::abs(ari(table) - ao));

    // Perfect match under a relabelling.
    std::vector<int> relabelled;
    for (int v : t) relabelled.push_back(10 + 3 * v);
    const auto s = score(t, relabelled);
    perfect_bad += !(s.nmi == 1.0 && s.ari == 1.0 && s.acc == 1.0);
  }
  const double secs = seconds_since(t0);
  const bool pass = acc_bad == 0 && nmi_err <= 1e-10 && ari_err <= 1e-10 && perfect_bad == 0 && secs < 10.0;
  return {pass, "ACC mismatches " + std::to_string(acc_bad) + ", max NMI error " + fmt("%.3g", nmi_err) +
                    ", max ARI error " + fmt("%.3g", ari_err) + ", imperfect perfect-matches " +
                    std::to_string(perfect_bad) + ", " + fmt("%.2f", secs) + " s"};
}

TrainConfig planted_config(std::uint64_t seed) {
  TrainConfig c;
  c.clusters = 5;
  c.dim = 32;
  c.batch_size = 64;
  c.seed = seed;
  return c;
}

struct QualityRun {
  std::vector<double> nmi;
  std::vector<double> mean_max_prob;
  double seconds = 0.0;
};

QualityRun planted_quality() {
  const auto corpus = testing::planted_preprocessed({});
  QualityRun q;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = train(corpus, planted_config(seed));
    q.nmi.push_back(score(*corpus.labels, r.result.assignments).nmi);
    double m = 0.0;
    for (double p : r.result.max_probs) m += p;
    q.mean_max_prob.push_back(m / static_cast<double>(r.result.max_probs.size()));
  }
  q.seconds = seconds_since(t0);
  return q;
}

std::string join(const std::vector<double>& v, const char* f) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(f, x);
  return s;
}

Outcome clustering_quality(const QualityRun& q) {
  const double med = testing::median(q.nmi);
  return {med >= 0.85 && q.seconds < 60.0, "median NMI " + fmt("%.4f", med) + " (seeds: " + join(q.nmi, "%.4f") +
                                               "), " + fmt("%.1f", q.seconds) + " s for 5 seeds"};
}

Outcome attention_concentration(const QualityRun& q) {
  const double lo = *std::min_element(q.mean_max_prob.begin(), q.mean_max_prob.end());
  return {lo >= 0.9, "mean max attention per seed: " + join(q.mean_max_prob, "%.4f") + " (min " + fmt("%.4f", lo) + ")"};
}

Outcome ablation_ordering() {
  testing::PlantedSpec spec;
  spec.injected_noise = 0.2;
  const auto corpus = testing::planted_preprocessed(spec);
  std::map<std::string, std::vector<double>> nmi;
  const std::vector<std::string> wanted = {"ARL-Adv", "ARL-Random", "ARL-Adv(no train w)", "ARL"};
  for (const auto& v : ablation_variants()) {
    if (std::find(wanted.begin(), wanted.end(), v.name) == wanted.end()) continue;
    for (std::uint64_t seed = 1; seed <= 7; ++seed) {
      TrainConfig c = planted_config(seed);
      v.apply(c);
      const auto r = train(corpus, c);
      nmi[v.name].push_back(score(*corpus.labels, r.result.assignments).nmi);
    }
  }
  const double adv = testing::median(nmi["ARL-Adv"]);
  const double rnd = testing::median(nmi["ARL-Random"]);
  const double frozen = testing::median(nmi["ARL-Adv(no train w)"]);
  const double plain = testing::median(nmi["ARL"]);
  return {adv >= rnd && adv >= frozen, "median NMI over 7 seeds: ARL-Adv " + fmt("%.4f", adv) + ", ARL-Random " +
                                           fmt("%.4f", rnd) + ", ARL-Adv(no train w) " + fmt("%.4f", frozen) +
                                           "; reported only: ARL " + fmt("%.4f", plain) + " (ARL-Adv - ARL = " +
                                           fmt("%+.4f", adv - plain) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "arl_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto pc = testing::planted_corpus({});
  {
    std::ofstream c(dir / "corpus.txt"), l(dir / "labels.txt");
    for (std::size_t i = 0; i < pc.raw.size(); ++i) {
      c << pc.raw[i].text << '\n';
      l << pc.labels[i] << '\n';
    }
  }
  auto run = [&](const std::string& out) {
    std::ostringstream o, e;
    const std::vector<std::string> args = {"cluster", "--corpus", (dir / "corpus.txt").string(), "--labels",
                                           (dir / "labels.txt").string(), "--clusters", "5", "--dim", "32",
                                           "--min-freq", "1", "--seeds", "3", "--out", (dir / out).string(),
                                           "--quiet"};
    return arl::cli::run(args, o, e);
  };
  const int a = run("a");
  const int b = run("b");
  const bool same_tsv = a == 0 && b == 0 && slurp(dir / "a/assignments.tsv") == slurp(dir / "b/assignments.tsv");
  const bool same_json = a == 0 && b == 0 && slurp(dir / "a/metrics.json") == slurp(dir / "b/metrics.json");
  const bool nonempty = !slurp(dir / "a/assignments.tsv").empty();
  fs::remove_all(dir);
  return {same_tsv && same_json && nonempty, std::string("exit codes ") + std::to_string(a) + "/" + std::to_string(b) +
                                                 ", assignments.tsv " + (same_tsv ? "identical" : "differs") +
                                                 ", metrics.json " + (same_json ? "identical" : "differs")};
}

Outcome preprocessing_conformance() {
  std::ifstream voc(ARL_TEST_DATA_DIR "/porter_voc.txt");
  std::ifstream expected(ARL_TEST_DATA_DIR "/porter_output.txt");
  std::string w, s;
  int total = 0, agree = 0;
  std::vector<std::string> divergences;
  while (std::getline(voc, w) && std::getline(expected, s)) {
    ++total;
    const auto got = porter_stem(w);
    if (got == s) {
      ++agree;
    } else if (divergences.size() < 5) {
      divergences.push_back(w + "->" + got + " (expected " + s + ")");
    }
  }
  const double rate = total ? static_cast<double>(agree) / total : 0.0;

  // Constructed corpus: surface forms sharing a stem pool their counts, and
  // each stem's total is fixed in advance on both sides of the cutoff.
  const std::vector<std::pair<std::vector<std::string>, int>> families = {
      {{"connect", "connected", "connecting", "connection"}, 7},
      {{"run", "running", "runs"}, 5},
      {{"cat", "cats"}, 4},
      {{"happy", "happiness"}, 1},
      {{"generalize", "generalization"}, 6},
      {{"plaster", "plastered"}, 3},
      {{"hop", "hopping"}, 12},
      {{"relate", "related", "relating"}, 2}};
  Rng rng(1009);
  std::vector<std::string> pool;
  std::map<std::string, std::int64_t> stem_count;
  for (const auto& [forms, n] : families) {
    for (int k = 0; k < n; ++k) {
      pool.push_back(forms[static_cast<std::size_t>(k) % forms.size()]);
      ++stem_count[porter_stem(pool.back())];
    }
  }
  rng.shuffle(pool);
  std::vector<RawDocument> raw;
  for (std::size_t i = 0; i < pool.size();) {
    const std::size_t len = 1 + rng.below(3);
    std::string text;
    for (std::size_t k = 0; k < len && i < pool.size(); ++k, ++i) text += (text.empty() ? "" : " ") + pool[i];
    raw.push_back({static_cast<int>(raw.size()), text});
  }
  PreprocessOptions opts;
  const Corpus c = preprocess(raw, opts);
  std::set<std::string> expect_vocab, got_vocab(c.vocabulary.tokens().begin(), c.vocabulary.tokens().end());
  int below = 0;
  for (const auto& [stem, n] : stem_count) {
    if (n >= 5) {
      expect_vocab.insert(stem);
    } else {
      ++below;
    }
  }
  bool counts_ok = true;
  for (int id = 0; id < c.vocabulary.size(); ++id) {
    counts_ok = counts_ok && c.vocabulary.frequency(id) == stem_count[c.vocabulary.lookup(id)];
  }
  const bool cutoff_ok = got_vocab == expect_vocab && counts_ok && below > 0;

  std::string detail = "Porter agreement " + std::to_string(agree) + "/" + std::to_string(total) + " (" +
                       fmt("%.3f", 100 * rate) + "%)";
  for (const auto& d : divergences) detail += "; divergence " + d;
  detail += "; cutoff kept " + std::to_string(got_vocab.size()) + " stems, removed " + std::to_string(below) +
            " with frequency < 5" + (cutoff_ok ? " (exact)" : " (MISMATCH)");
  return {rate >= 0.999 && cutoff_ok, detail};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const Outcome& o) {
    std::printf("criterion %d: %s: %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  auto guarded = [&](int n, const std::function<Outcome()>& f) {
    try {
      report(n, f());
    } catch (const std::exception& e) {
      report(n, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, gradient_check);
  guarded(2, perturbation_contract);
  guarded(3, adversarial_ascent);
  guarded(4, metric_oracles);
  QualityRun q;
  try {
    q = planted_quality();
    report(5, clustering_quality(q));
    report(6, attention_concentration(q));
  } catch (const std::exception& e) {
    report(5, {false, std::string("exception: ") + e.what()});
    report(6, {false, "not run"});
  }
  guarded(7, ablation_ordering);
  guarded(8, determinism);
  guarded(9, preprocessing_conformance);
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
