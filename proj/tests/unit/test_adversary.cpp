#include <gtest/gtest.h>

#include <random>

#include "advht/adversary.hpp"
#include "advht/analysis.hpp"
#include "advht/optimize.hpp"
#include "test_support.hpp"

using namespace advht;
using namespace advht::testing;

namespace {

DetectorFSM solved_fsm(const ProblemInstance& inst, int S, double delta, double eta) {
  const auto g = solve_gamma(inst);
  const auto c = solve_C(inst);
  return build_adversarial_fsm(S, *g.witness_weights, *c.witness_weights, delta, std::nullopt, eta, inst);
}

// Oracle: enumerate every deterministic stationary vertex policy.
double brute_force_worst(const DetectorFSM& fsm, const ProblemInstance& inst, int h) {
  const std::size_t V = inst.polytope(h).num_vertices();
  const int S = fsm.num_states();
  std::vector<std::size_t> map(static_cast<std::size_t>(S), 0);
  double best = -1.0;
  while (true) {
    const auto pol = AdversaryPolicy::stationary_vertices(map, inst, h);
    best = std::max(best, exact_average_error(fsm, pol, h).value);
    std::size_t i = 0;
    while (i < map.size() && ++map[i] == V) map[i++] = 0;
    if (i == map.size()) break;
  }
  return best;
}

ProblemInstance three_vertex_instance() {
  const DistributionPolytope p0({Distribution({0.5, 0.3, 0.2}), Distribution({0.3, 0.5, 0.2}), Distribution({0.4, 0.2, 0.4})});
  const DistributionPolytope p1({Distribution({0.1, 0.3, 0.6}), Distribution({0.2, 0.1, 0.7})});
  return ProblemInstance(Alphabet::numbered(3), p0, p1);
}

}  // namespace

TEST(Mdp, MatchesEnumeration) {
  for (const auto& inst : {indicator_instance(), three_vertex_instance()}) {
    for (int S = 3; S <= 5; ++S) {
      const auto fsm = solved_fsm(inst, S, 0.05, 0.05);
      for (int h = 0; h <= 1; ++h) {
        const auto sol = worst_case_adversary(fsm, inst, h);
        const double oracle = brute_force_worst(fsm, inst, h);
        EXPECT_NEAR(sol.worst_error, oracle, 1e-9) << "S=" << S << " h=" << h;
        const auto pol = AdversaryPolicy::stationary_vertices(sol.policy, inst, h);
        EXPECT_NEAR(exact_average_error(fsm, pol, h).value, sol.worst_error, 1e-9);
      }
    }
  }
}

TEST(Mdp, SingletonEqualsFixed) {
  const auto inst = singleton_instance();
  const auto fsm = build_hellman_counter(inst.p0.vertex(0), inst.p1.vertex(0), 4, 0.01);
  for (int h = 0; h <= 1; ++h) {
    const auto sol = worst_case_adversary(fsm, inst, h);
    const auto fixed = AdversaryPolicy::fixed(inst.polytope(h).vertex(0), inst, h);
    EXPECT_NEAR(sol.worst_error, exact_average_error(fsm, fixed, h).value, 1e-10);
  }
}

TEST(Mdp, WorstDominatesFixedAndGreedy) {
  const auto inst = three_vertex_instance();
  const auto fsm = solved_fsm(inst, 5, 0.05, 0.05);
  for (int h = 0; h <= 1; ++h) {
    const auto sol = worst_case_adversary(fsm, inst, h);
    for (std::size_t v = 0; v < inst.polytope(h).num_vertices(); ++v) {
      const auto fixed = AdversaryPolicy::fixed(inst.polytope(h).vertex(v), inst, h);
      EXPECT_LE(exact_average_error(fsm, fixed, h).value, sol.worst_error + 1e-10);
    }
    const auto greedy = AdversaryPolicy::stationary_vertices(greedy_drift_policy(fsm, inst, h), inst, h);
    EXPECT_LE(exact_average_error(fsm, greedy, h).value, sol.worst_error + 1e-10);
  }
}

TEST(Mdp, MultichainRejected) {
  // Both states absorbing under every letter.
  const std::vector<double> k{1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0};
  const DetectorFSM fsm(2, 2, k, {0, 1}, 0);
  EXPECT_THROW(worst_case_adversary(fsm, singleton_instance(), 0), MultichainError);
}

TEST(Policy, JsonRoundTrip) {
  const auto inst = three_vertex_instance();
  const std::vector<std::size_t> map{2, 0, 1, 1};
  const auto pol = policy_from_json(policy_to_json(map, 0), inst);
  EXPECT_EQ(pol.kind(), PolicyKind::kStationary);
  EXPECT_EQ(pol.hypothesis(), 0);
  ASSERT_TRUE(pol.vertex_map());
  EXPECT_EQ(*pol.vertex_map(), map);
  EXPECT_EQ(pol.at_state(0), inst.p0.vertex(2));
}

TEST(Policy, MembershipEnforced) {
  const auto inst = indicator_instance();
  EXPECT_THROW(AdversaryPolicy::fixed(inst.p1.vertex(0), inst, 0), ValidationError);
  EXPECT_NO_THROW(AdversaryPolicy::fixed(Distribution::mix(inst.p0.vertex(0), inst.p0.vertex(1), 0.5), inst, 0));
  EXPECT_THROW(AdversaryPolicy::stationary_vertices({5}, inst, 0), ValidationError);
}

TEST(Policy, ScriptedNonMemberCaughtInDebug) {
  const auto inst = indicator_instance();
  const auto fsm = solved_fsm(inst, 3, 0.05, 0.05);
  const auto outside = inst.p1.vertex(0);
  ScriptedRule rule = [&](std::span<const std::size_t> samples, std::span<const int>) {
    return samples.size() < 10 ? inst.p0.vertex(0) : outside;
  };
  const auto pol = AdversaryPolicy::scripted(rule, inst, 0, true);
  SimulationOptions opts;
  opts.debug = true;
  EXPECT_THROW(simulate(fsm, pol, 0, 100, 1, opts), ValidationError);
}

TEST(Policy, ScriptedMemberRuns) {
  const auto inst = indicator_instance();
  const auto fsm = solved_fsm(inst, 3, 0.05, 0.05);
  ScriptedRule rule = [&](std::span<const std::size_t>, std::span<const int> states) {
    return states.back() == 0 ? inst.p0.vertex(0) : inst.p0.vertex(1);
  };
  const auto pol = AdversaryPolicy::scripted(rule, inst, 0, true);
  SimulationOptions opts;
  opts.debug = true;
  const auto r = simulate(fsm, pol, 0, 2000, 1, opts);
  EXPECT_EQ(r.n, 2000u);
  EXPECT_GE(r.average_error, 0.0);
  EXPECT_LE(r.average_error, 1.0);
}
