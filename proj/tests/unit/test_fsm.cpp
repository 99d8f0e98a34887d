#include <gtest/gtest.h>

#include <cmath>

#include "advht/analysis.hpp"
#include "advht/fsm.hpp"
#include "test_support.hpp"

using namespace advht;
using namespace advht::testing;

namespace {

const WeightPair kWitness({1.0 / 3, 1.0, 0.0}, {0.0, 0.0, 1.0});

}  // namespace

TEST(Fsm, RowsAreStochastic) {
  const auto inst = indicator_instance();
  for (int S = 3; S <= 7; ++S) {
    const auto fsm = build_adversarial_fsm(S, kWitness, kWitness, 0.05, std::nullopt, 0.1, inst);
    for (int s = 0; s < S; ++s) {
      for (std::size_t x = 0; x < 3; ++x) {
        double sum = 0.0;
        for (double v : fsm.row(s, x)) {
          EXPECT_GE(v, 0.0);
          sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
    EXPECT_TRUE(fsm.is_birth_death());
  }
}

TEST(Fsm, InternalMoveUsesFlooredWeights) {
  const auto inst = indicator_instance();
  const double eta = 0.1;
  const auto fsm = build_adversarial_fsm(5, kWitness, kWitness, 0.05, std::nullopt, eta, inst);
  EXPECT_NEAR(fsm.prob(1, 1, 2), (1 - 2 * eta) * 1.0 + eta, 1e-15);
  EXPECT_NEAR(fsm.prob(1, 1, 0), eta, 1e-15);
  EXPECT_NEAR(fsm.prob(2, 2, 1), 1 - eta, 1e-15);
}

TEST(Fsm, EndExitScaledByDelta) {
  const auto inst = indicator_instance();
  const auto fsm = build_adversarial_fsm(4, kWitness, kWitness, 0.01, std::nullopt, 0.0, inst);
  const auto step = step_distribution(fsm, 0, Distribution::uniform(3));
  EXPECT_NEAR(step[1], 0.01 * 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(step[0], 1 - 0.01 * 4.0 / 9.0, 1e-15);
}

TEST(Fsm, Decisions) {
  EXPECT_EQ(threshold_decisions(4), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(threshold_decisions(5), (std::vector<int>{0, 0, 0, 1, 1}));
  EXPECT_EQ(centered_initial_state(4), 1);
  EXPECT_EQ(centered_initial_state(5), 2);
}

TEST(Fsm, KappaTooLargeRejected) {
  const auto inst = indicator_instance();
  EXPECT_THROW(build_adversarial_fsm(4, kWitness, kWitness, 0.01, 200.0, 0.0, inst), ValidationError);
  EXPECT_THROW(build_adversarial_fsm(2, kWitness, kWitness, 0.01, 1.0, 0.0, inst), ValidationError);
  EXPECT_THROW(build_adversarial_fsm(4, kWitness, kWitness, 0.01, 1.0, 0.5, inst), ValidationError);
}

TEST(Fsm, BadKernelRejected) {
  std::vector<double> k{0.5, 0.4, 0.0, 1.0};
  EXPECT_THROW(DetectorFSM(2, 1, k, {0, 1}, 0), ValidationError);
}

TEST(Fsm, HellmanKappaEqualizing) {
  const auto p = Distribution({0.5, 0.5});
  const auto q = Distribution({0.25, 0.75});
  const auto fsm = build_hellman_counter(p, q, 4, 1e-4);
  EXPECT_NEAR(fsm.params().kappa, std::pow(3.0, 1.5), 1e-12);
  EXPECT_EQ(fsm.params().x_plus, 1u);
  EXPECT_EQ(fsm.params().x_minus, 0u);
}

TEST(Fsm, HellmanOccupancyRatio) {
  const auto p = Distribution({0.5, 0.2, 0.3});
  const auto q = Distribution({0.2, 0.5, 0.3});
  for (int S = 2; S <= 6; ++S) {
    const auto fsm = build_hellman_counter(p, q, S, 1e-3);
    const auto pol = AdversaryPolicy::fixed(p, singletons(p, q), 0);
    const auto ex = exact_average_error(fsm, pol, 0);
    const double k = fsm.params().kappa;
    const double pp = p[fsm.params().x_plus];
    const double pm = p[fsm.params().x_minus];
    const double ratio = ex.occupancy.front() / ex.occupancy.back();
    EXPECT_NEAR(ratio / (k * std::pow(pm / pp, S - 1)), 1.0, 1e-9) << "S=" << S;
  }
}

TEST(Fsm, HellmanErrorApproachesClosedForm) {
  const auto p = Distribution({0.5, 0.5});
  const auto q = Distribution({0.25, 0.75});
  const auto fsm = build_hellman_counter(p, q, 3, 1e-7);
  const auto inst = singletons(p, q);
  const double e0 = exact_average_error(fsm, AdversaryPolicy::fixed(p, inst, 0), 0).value;
  const double e1 = exact_average_error(fsm, AdversaryPolicy::fixed(q, inst, 1), 1).value;
  // gamma_hc = 3, so 1/(1 + 3) on both sides.
  EXPECT_NEAR(e0, 0.25, 1e-5);
  EXPECT_NEAR(e1, 0.25, 1e-5);
}

TEST(Fsm, IdenticalPairCounterHasUnitKappa) {
  const auto p = Distribution({0.4, 0.6});
  EXPECT_EQ(build_hellman_counter(p, p, 3, 0.5).params().kappa, 1.0);
}

TEST(Fsm, JsonRoundTrip) {
  const auto inst = indicator_instance();
  const auto fsm = build_adversarial_fsm(5, kWitness, kWitness, 0.05, std::nullopt, 0.1, inst);
  const auto again = fsm_from_json(fsm_to_json(fsm));
  EXPECT_EQ(again.num_states(), 5);
  EXPECT_EQ(again.kernel(), fsm.kernel());
  EXPECT_EQ(again.decisions(), fsm.decisions());
  EXPECT_EQ(again.initial_state(), fsm.initial_state());
  EXPECT_EQ(again.params().kind, FsmKind::kAdversarial);
  EXPECT_DOUBLE_EQ(again.params().kappa, fsm.params().kappa);
  EXPECT_EQ(fsm_to_json(again).dump(), fsm_to_json(fsm).dump());
}

TEST(Fsm, DefaultKappaFormula) {
  FsmRateSet r;
  r.gamma0 = 3.0;
  r.gamma1 = 4.0 / 3;
  r.c0 = 2.0;
  r.c1 = 1.5;
  EXPECT_NEAR(default_kappa(r, 4), std::sqrt(1.5 * std::pow(4.0 / 3, 2) / (2.0 * 9.0)), 1e-15);
}
