#include "doctest.h"

#include "arl/adam.hpp"
#include "arl/metrics.hpp"
#include "arl/trainer.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

using namespace arl;

namespace {

const Corpus& small_corpus() {
  static const Corpus c = [] {
    testing::PlantedSpec s;
    s.topics = 3;
    s.words_per_topic = 20;
    s.documents = 120;
    return testing::planted_preprocessed(s);
  }();
  return c;
}

TrainConfig small_config() {
  TrainConfig c;
  c.clusters = 3;
  c.dim = 12;
  c.batch_size = 16;
  c.epochs = 4;
  c.kmeans_restarts = 2;
  return c;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("mode names round-trip") {
    for (Mode m : {Mode::arl, Mode::arl_adv, Mode::arl_random, Mode::arl_adv_word}) CHECK(parse_mode(mode_name(m)) == m);
    CHECK(mode_name(Mode::arl_adv) == "arl-adv");
    CHECK_THROWS_AS(parse_mode("adv"), Error);
  }

  TEST_CASE("config validation") {
    TrainConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.clusters = 1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.use_l1 = c.use_l2 = false;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.epsilon = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("trained parameter count") {
    TrainConfig c = small_config();
    CHECK(c.trained_parameters(100) == 12 * 100 + 12 * 3);
    c.train_w = false;
    CHECK(c.trained_parameters(100) == 12 * 3);
  }

  TEST_CASE("negative sampling") {
    Rng rng(1);
    const auto negs = sample_negatives(6, 3, rng);
    REQUIRE(negs.size() == 6);
    for (int b = 0; b < 6; ++b) {
      const auto& n = negs[static_cast<std::size_t>(b)];
      CHECK(n.size() == 3);
      CHECK(std::set<int>(n.begin(), n.end()).size() == 3);
      for (int j : n) CHECK((j != b && j >= 0 && j < 6));
    }
    CHECK(sample_negatives(3, 5, rng)[0].size() == 2);
  }

  TEST_CASE("batches cover every document once") {
    Rng rng(2);
    for (int n : {10, 64, 65, 129, 2}) {
      const auto batches = make_batches(n, 64, rng);
      std::vector<int> all;
      for (const auto& b : batches) {
        CHECK(b.size() >= 2);
        all.insert(all.end(), b.begin(), b.end());
      }
      std::sort(all.begin(), all.end());
      std::vector<int> expect(static_cast<std::size_t>(n));
      std::iota(expect.begin(), expect.end(), 0);
      CHECK(all == expect);
    }
    CHECK(make_batches(65, 64, rng).size() == 1);
  }

  TEST_CASE("attention argmax breaks ties low") {
    Matrix a(2, 3);
    a << 0.4, 0.4, 0.2,
         0.1, 0.3, 0.6;
    const auto r = assignments_from_attention(a);
    CHECK(r.assignments == std::vector<int>{0, 2});
    CHECK(r.max_probs[1] == 0.6);
    REQUIRE(r.attn);
    CHECK(r.attn->rows() == 2);
  }

  TEST_CASE("init is seeded and scaled") {
    TrainConfig c = small_config();
    c.kmeans_init = false;
    const auto a = init_params(small_corpus(), c);
    const auto b = init_params(small_corpus(), c);
    CHECK(a.E == b.E);
    CHECK(a.C == b.C);
    const double bound = c.init_norm * std::sqrt(3.0 / c.dim);
    CHECK(a.E.cwiseAbs().maxCoeff() <= bound);
    const double mean_sq = a.E.colwise().squaredNorm().mean();
    CHECK(std::sqrt(mean_sq) == doctest::Approx(c.init_norm).epsilon(0.05));
    c.seed = 2;
    CHECK(init_params(small_corpus(), c).E != a.E);
  }

  TEST_CASE("kmeans init places clusters at document centroids") {
    TrainConfig c = small_config();
    const auto p = init_params(small_corpus(), c);
    const Matrix D = document_embeddings(p.E, small_corpus());
    const auto km = kmeans(D, c.clusters, derive_seed(c.seed, Stream::kmeans), {100, 1e-6, c.kmeans_restarts});
    CHECK(p.C == km.centroids);
  }

  TEST_CASE("training is deterministic") {
    const TrainConfig c = small_config();
    const auto a = train(small_corpus(), c);
    const auto b = train(small_corpus(), c);
    CHECK(a.params.E == b.params.E);
    CHECK(a.params.C == b.params.C);
    CHECK(a.result.history == b.result.history);
    CHECK(a.result.epochs_run == 4);
  }

  TEST_CASE("alpha zero in adversarial mode reproduces the unperturbed mode") {
    TrainConfig c = small_config();
    c.mode = Mode::arl;
    const auto a = train(small_corpus(), c);
    c.mode = Mode::arl_adv;
    c.alpha = 0.0;
    const auto b = train(small_corpus(), c);
    CHECK(a.params.E == b.params.E);
    CHECK(a.params.C == b.params.C);
    CHECK(a.result.history == b.result.history);
  }

  TEST_CASE("reference execution matches the parallel path") {
    TrainConfig c = small_config();
    c.epochs = 2;
    const auto a = train(small_corpus(), c);
    c.execution = Execution::serial_reference;
    const auto b = train(small_corpus(), c);
    CHECK((a.params.E - b.params.E).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(a.result.assignments == b.result.assignments);
  }

  TEST_CASE("every mode trains and frozen parameters stay put") {
    for (const auto& v : ablation_variants()) {
      CAPTURE(v.name);
      TrainConfig c = small_config();
      c.epochs = 2;
      v.apply(c);
      const auto init = init_params(small_corpus(), c);
      const auto r = train(small_corpus(), c);
      CHECK(r.result.assignments.size() == 120);
      CHECK(r.result.history.size() == 2);
      if (!c.train_w) CHECK(r.params.E == init.E);
      if (!c.train_c) CHECK(r.params.C == init.C);
    }
    CHECK(ablation_variants().size() == 8);
  }

  TEST_CASE("learns the planted partition") {
    TrainConfig c = small_config();
    c.dim = 32;
    c.epochs = 15;
    const auto r = train(small_corpus(), c);
    CHECK(score(*small_corpus().labels, r.result.assignments).nmi > 0.8);
  }

  TEST_CASE("callback and early stop") {
    TrainConfig c = small_config();
    c.epochs = 60;
    c.early_stop = true;
    std::vector<EpochStats> seen;
    const auto r = train(small_corpus(), c, [&](const EpochStats& s) { seen.push_back(s); });
    CHECK(r.result.epochs_run == static_cast<int>(seen.size()));
    CHECK(r.result.epochs_run < 60);
    REQUIRE(seen.size() >= 3);
    for (std::size_t i = seen.size() - 3; i < seen.size(); ++i) CHECK(seen[i].churn < 0.001);
  }

  TEST_CASE("divergence surfaces as a numeric error") {
    TrainConfig c = small_config();
    c.learning_rate = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train(small_corpus(), c), NumericError);
  }

  TEST_CASE("adam step") {
    Matrix p = Matrix::Constant(1, 2, 1.0), m = Matrix::Zero(1, 2), v = Matrix::Zero(1, 2);
    Matrix g(1, 2);
    g << 0.5, -2.0;
    adam_update(p, g, m, v, 1, {0.1, 0.9, 0.999, 1e-8});
    // First bias-corrected step moves each entry by lr * sign(g).
    CHECK(p(0, 0) == doctest::Approx(0.9));
    CHECK(p(0, 1) == doctest::Approx(1.1));

    Matrix q = Matrix::Constant(2, 3, 1.0), mq = Matrix::Zero(2, 3), vq = Matrix::Zero(2, 3);
    Matrix r = q, mr = mq, vr = vq;
    SparseColumns sg{{1}, Matrix::Constant(2, 1, 0.3)};
    for (int t = 1; t <= 3; ++t) {
      adam_update(q, sg, mq, vq, t, {});
      adam_update(r, sg.to_dense(3), mr, vr, t, {});
    }
    CHECK(q == r);
  }

  TEST_CASE("adam under a constant gradient steps by the learning rate") {
    Matrix p = Matrix::Zero(1, 3), m = Matrix::Zero(1, 3), v = Matrix::Zero(1, 3);
    Matrix g(1, 3);
    g << 3.0, -0.01, 0.0;
    for (int t = 1; t <= 50; ++t) {
      const Matrix before = p;
      adam_update(p, g, m, v, t, {});
      CHECK((p(0, 0) - before(0, 0)) == doctest::Approx(-1e-3).epsilon(1e-6));
      CHECK((p(0, 1) - before(0, 1)) == doctest::Approx(1e-3).epsilon(1e-4));
      CHECK(p(0, 2) == 0.0);
    }
  }

  TEST_CASE("tfidf and the k-means baseline") {
    const auto X = tfidf(small_corpus());
    CHECK(X.rows() == small_corpus().vocabulary.size());
    for (Eigen::Index i = 0; i < X.cols(); ++i) CHECK(X.col(i).norm() == doctest::Approx(1.0));
    const auto r = baseline_kmeans_tfidf(small_corpus(), small_config());
    CHECK(r.assignments.size() == 120);
    CHECK(std::all_of(r.max_probs.begin(), r.max_probs.end(), [](double p) { return p == 1.0; }));
  }
}
