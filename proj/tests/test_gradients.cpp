#include "doctest.h"

#include "arl/model.hpp"
#include "test_support.hpp"

#include <set>

using namespace arl;

namespace {

testing::Instance clean_instance(Rng& rng, const ObjectiveConfig& cfg, Perturbation& pert) {
  for (;;) {
    auto inst = testing::random_instance(rng);
    pert = adversarial_step(inst.params, inst.batch, inst.negs, cfg);
    const Matrix moved = inst.params.C + pert.delta;
    if (testing::min_hinge_margin(inst.params.E, inst.params.C, inst.batch, inst.negs, cfg.gamma) > 1e-3 &&
        testing::min_hinge_margin(inst.params.E, moved, inst.batch, inst.negs, cfg.gamma) > 1e-3) {
      return inst;
    }
  }
}

}  // namespace

TEST_SUITE("gradients") {
  TEST_CASE("finite differences, both losses") {
    Rng rng(101);
    ObjectiveConfig cfg;
    cfg.epsilon = 0.5;
    for (int t = 0; t < 5; ++t) {
      Perturbation pert;
      const auto inst = clean_instance(rng, cfg, pert);
      const auto rep = testing::finite_difference_check(inst, pert, cfg);
      CHECK(rep.max_rel_E < 1e-4);
      CHECK(rep.max_rel_C < 1e-4);
    }
  }

  TEST_CASE("finite differences, single losses and gamma") {
    Rng rng(102);
    for (const LossSwitches sw : {LossSwitches{true, false}, LossSwitches{false, true}}) {
      ObjectiveConfig cfg;
      cfg.switches = sw;
      cfg.gamma = 0.4;
      cfg.alpha = 0.7;
      cfg.epsilon = 0.3;
      Perturbation pert;
      const auto inst = clean_instance(rng, cfg, pert);
      const auto rep = testing::finite_difference_check(inst, pert, cfg);
      CHECK(rep.max_rel_E < 1e-4);
      CHECK(rep.max_rel_C < 1e-4);
    }
  }

  TEST_CASE("finite differences, serial reference") {
    Rng rng(103);
    ObjectiveConfig cfg;
    cfg.epsilon = 0.5;
    cfg.execution = Execution::serial_reference;
    Perturbation pert;
    const auto inst = clean_instance(rng, cfg, pert);
    const auto rep = testing::finite_difference_check(inst, pert, cfg);
    CHECK(rep.max_rel_E < 1e-4);
    CHECK(rep.max_rel_C < 1e-4);
  }

  TEST_CASE("finite differences with a word perturbation held fixed") {
    Rng rng(104);
    const auto inst = testing::random_instance(rng);
    ObjectiveConfig cfg;
    cfg.epsilon = 0.2;
    const auto wp = adversarial_word_step(inst.params, inst.batch, inst.negs, cfg);
    auto J = [&](const ModelParams& p) {
      return objective_j1(p, inst.batch, inst.negs, cfg.gamma, cfg.switches) +
             cfg.alpha * objective_j2(p, wp, inst.batch, inst.negs, cfg.gamma, cfg.switches);
    };
    const auto g = gradients(inst.params, wp, inst.batch, inst.negs, cfg);
    CHECK(g.objective == doctest::Approx(J(inst.params)).epsilon(1e-12));
    const Matrix dE = g.dE.to_dense(inst.params.vocab_size());
    ModelParams p = inst.params;
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.E.size(); ++i) {
      const double x = p.E.data()[i];
      p.E.data()[i] = x + h;
      const double fp = J(p);
      p.E.data()[i] = x - h;
      const double fm = J(p);
      p.E.data()[i] = x;
      worst = std::max(worst, testing::rel_error(dE.data()[i], (fp - fm) / (2 * h)));
    }
    for (Eigen::Index i = 0; i < p.C.size(); ++i) {
      const double x = p.C.data()[i];
      p.C.data()[i] = x + h;
      const double fp = J(p);
      p.C.data()[i] = x - h;
      const double fm = J(p);
      p.C.data()[i] = x;
      worst = std::max(worst, testing::rel_error(g.dC.data()[i], (fp - fm) / (2 * h)));
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("gradient is sparse over batch words") {
    Rng rng(105);
    const auto inst = testing::random_instance(rng);
    const auto g = gradients(inst.params, Perturbation::zero(8, 4), inst.batch, inst.negs, {});
    std::set<int> active;
    for (const auto& d : inst.batch) active.insert(d.token_ids.begin(), d.token_ids.end());
    CHECK(g.dE.index == std::vector<int>(active.begin(), active.end()));
  }
}
