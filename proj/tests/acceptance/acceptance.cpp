// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "advht/adversary.hpp"
#include "advht/analysis.hpp"
#include "advht/drift.hpp"
#include "advht/exponents.hpp"
#include "advht/fsm.hpp"
#include "advht/lfd.hpp"
#include "advht/model.hpp"
#include "advht/optimize.hpp"

using namespace advht;

namespace {

const std::string kData = ADVHT_DATA_DIR;

ProblemInstance indicator() { return load_instance(kData + "/indicator.json"); }
ProblemInstance weaklfd() { return load_instance(kData + "/weaklfd.json"); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

double worst_over_h(const DetectorFSM& fsm, const ProblemInstance& inst) {
  return std::max(worst_case_adversary(fsm, inst, 0).worst_error, worst_case_adversary(fsm, inst, 1).worst_error);
}

std::vector<double> peak_normalized(std::span<const double> f) {
  const double m = *std::max_element(f.begin(), f.end());
  std::vector<double> out(f.begin(), f.end());
  for (auto& v : out) v /= m;
  return out;
}

Outcome reproduce_indicator() {
  const auto inst = indicator();
  const auto sol = solve_gamma(inst);
  const auto& w = sol.witness_weights.value();
  const std::vector<double> fp_ref{1.0 / 3.0, 1.0, 0.0};
  const std::vector<double> fm_ref{0.0, 0.0, 1.0};
  const double dist = std::max(linf_distance(peak_normalized(w.f_plus()), fp_ref),
                               linf_distance(peak_normalized(w.f_minus()), fm_ref));
  std::ostringstream os;
  os.precision(10);
  os << "gamma=" << sol.value << " witness_dist=" << dist;
  return {std::abs(sol.value - 4.0) <= 1e-4 && dist <= 1e-3, os.str()};
}

Outcome minimax_equality() {
  std::vector<ProblemInstance> cases{indicator(), weaklfd()};
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 20; ++i) cases.push_back(random_instance(4, 3, rng));
  double worst = 0.0;
  int failures = 0;
  for (const auto& inst : cases) {
    const auto r = verify_minimax(inst, 1e-3);
    double gap = r.gap;
    if (std::isinf(r.gamma) && std::isinf(r.gamma_bar)) gap = 0.0;
    worst = std::max(worst, gap);
    if (!(gap <= 1e-3)) ++failures;
  }
  std::ostringstream os;
  os << cases.size() << " instances, max gap=" << worst << ", failures=" << failures;
  return {failures == 0, os.str()};
}

bool has_violation_at(const LfdReport& r, double eta) {
  for (const auto& v : r.threshold_violations) {
    if (v.eta == eta || (v.eta_lo < eta && eta < v.eta_hi)) return true;
  }
  return false;
}

Outcome reproduce_weaklfd() {
  const auto inst = weaklfd();
  const auto& v_a = inst.p0.vertex(0);
  const auto& v_b = inst.p0.vertex(1);
  const auto& q = inst.p1.vertex(0);
  bool ok = true;
  std::ostringstream os;
  for (double lam : {0.0, 0.1, 0.5, 0.8, 1.0}) {
    const auto p = Distribution::mix(v_b, v_a, lam);
    const auto rep = is_weak_lfd(p, q, inst);
    const bool want_weak = lam > 0.0 && lam < 1.0;
    const double eta = lam < 1.0 ? 2.0 / 3.0 : 10.0;
    const bool named = has_violation_at(rep, eta);
    ok = ok && rep.is_weak == want_weak && !rep.is_strong && named;
    os << "lam=" << lam << "(weak=" << rep.is_weak << ",strong=" << rep.is_strong << ",eta" << eta << "=" << named
       << ") ";
  }
  const auto gb = solve_gamma_bar(inst);
  const double pe_formula = hellman_pe(81.0, 3);
  const double pe_pair = weak_lfd_pe(Distribution::mix(v_b, v_a, 0.5), q, 3);
  ok = ok && std::abs(gb.value - 81.0) <= 0.05 && pe_formula == 1.0 / 82.0 &&
       std::abs(pe_pair - 1.0 / 82.0) <= 1e-15;
  os.precision(10);
  os << "gamma_bar=" << gb.value << " pe=" << pe_formula << " pe_pair=" << pe_pair;
  return {ok, os.str()};
}

Outcome hellman_limit() {
  const ProblemInstance inst(Alphabet::numbered(2), DistributionPolytope({Distribution({0.5, 0.5})}),
                             DistributionPolytope({Distribution({0.25, 0.75})}));
  const auto& p = inst.p0.vertex(0);
  const auto& q = inst.p1.vertex(0);
  bool ok = true;
  std::ostringstream os;
  for (int S = 2; S <= 5; ++S) {
    const auto fsm = build_hellman_counter(p, q, S, 1e-6);
    const double e0 = exact_average_error(fsm, AdversaryPolicy::fixed(p, inst, 0), 0).value;
    const double e1 = exact_average_error(fsm, AdversaryPolicy::fixed(q, inst, 1), 1).value;
    const double target = 1.0 / (1.0 + std::pow(3.0, (S - 1) / 2.0));
    const double rel = std::abs(std::max(e0, e1) - target) / target;
    ok = ok && rel <= 0.02;
    os << "S=" << S << " rel=" << rel << " ";
  }
  return {ok, os.str()};
}

DetectorFSM adversarial_fsm(const ProblemInstance& inst, int S, double delta, double eta) {
  static const auto g = solve_gamma(inst);
  static const auto c = solve_C(inst);
  return build_adversarial_fsm(S, *g.witness_weights, *c.witness_weights, delta, std::nullopt, eta, inst);
}

Outcome drift_certificates() {
  const auto inst = indicator();
  bool ok = true;
  int checked = 0;
  double worst = -1.0;
  std::ostringstream os;
  for (int S = 3; S <= 8; ++S) {
    const auto fsm = adversarial_fsm(inst, S, 1e-3, 1e-3);
    std::vector<DriftSpec> specs{build_claim1_drift(fsm), mirrored_claim1_drift(fsm)};
    for (int s = 1; s <= S - 2; ++s) specs.push_back(build_claim2_drift(fsm, s));
    for (const auto& spec : specs) {
      const auto r = verify_drift(fsm, spec, inst, 1e-12);
      ++checked;
      worst = std::max(worst, r.worst);
      if (!r.pass) {
        ok = false;
        os << "[S=" << S << " " << spec.label << " worst=" << r.worst << " at state " << r.worst_state << "] ";
      }
    }
  }
  os << checked << " specs, worst normalized violation=" << worst;
  return {ok, os.str()};
}

Outcome sandwich() {
  const auto inst = indicator();
  const double gamma = solve_gamma(inst).value;
  const double delta = 1e-4, eta = 1e-3;
  bool ok = true;
  std::ostringstream os;
  os.precision(6);
  for (int S = 3; S <= 5; ++S) {
    const auto fsm = adversarial_fsm(inst, S, delta, eta);
    const auto& r = *fsm.params().rates;
    const double worst = worst_over_h(fsm, inst);
    const double lo = lower_bound(gamma, S) - 1e-9;
    const double ub = upper_bound(r.gamma0 * r.gamma1, r.c0 * r.c1, S);
    const double hi = ub + 3.0 * (delta / eta) * S;
    ok = ok && lo <= worst && worst <= hi;
    os << "S=" << S << " lower=" << lo << " worst=" << worst << " upper=" << ub << " upper+margin=" << hi << "; ";
  }
  return {ok, os.str()};
}

Outcome oracle_triangle() {
  const auto ind = indicator();
  const auto wl = weaklfd();
  struct Config {
    const ProblemInstance* inst;
    int S;
    int h;
    bool mdp_policy;
  };
  const std::vector<Config> configs{{&ind, 3, 0, true},  {&ind, 3, 1, true},  {&ind, 4, 0, false},
                                    {&ind, 4, 1, true},  {&ind, 5, 0, true},  {&ind, 5, 1, false},
                                    {&ind, 6, 0, true},  {&wl, 3, 0, true},   {&wl, 4, 1, true},
                                    {&wl, 5, 0, false}};
  bool ok = true;
  double worst_z = 0.0, worst_gain = 0.0;
  std::uint64_t seed = 1000;
  for (const auto& c : configs) {
    const auto g = solve_gamma(*c.inst);
    const auto cc = solve_C(*c.inst);
    const auto fsm = build_adversarial_fsm(c.S, *g.witness_weights, *cc.witness_weights, 0.05, std::nullopt, 0.05,
                                           *c.inst);
    const auto mdp = worst_case_adversary(fsm, *c.inst, c.h);
    const auto mdp_pol = AdversaryPolicy::stationary_vertices(mdp.policy, *c.inst, c.h);
    worst_gain = std::max(worst_gain, std::abs(mdp.gain - exact_average_error(fsm, mdp_pol, c.h).value));
    const auto pol = c.mdp_policy ? mdp_pol
                                  : AdversaryPolicy::stationary_vertices(greedy_drift_policy(fsm, *c.inst, c.h),
                                                                         *c.inst, c.h);
    const double exact = exact_average_error(fsm, pol, c.h).value;
    const auto sim = simulate(fsm, pol, c.h, 10'000'000, seed++);
    const double z = std::abs(sim.average_error - exact) / sim.stderr_;
    worst_z = std::max(worst_z, z);
  }
  ok = worst_z <= 4.0 && worst_gain <= 1e-9;
  std::ostringstream os;
  os << configs.size() << " configs, max |z|=" << worst_z << ", max |gain-exact|=" << worst_gain;
  return {ok, os.str()};
}

Outcome exponent_trend() {
  const auto inst = indicator();
  std::vector<double> xs, ys;
  for (int S = 4; S <= 9; ++S) {
    const auto fsm = adversarial_fsm(inst, S, 1e-5, 1e-3);
    xs.push_back(S);
    ys.push_back(-std::log(worst_over_h(fsm, inst)));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double target = 0.5 * std::log(4.0);
  const double rel = std::abs(slope - target) / target;
  std::ostringstream os;
  os << "slope=" << slope << " target=" << target << " rel=" << rel;
  return {rel <= 0.15, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 indicator gamma and witness", 10, reproduce_indicator},
      {"2 minimax equality", 300, minimax_equality},
      {"3 weak LFD example", 60, reproduce_weaklfd},
      {"4 classical counter limit", 1, hellman_limit},
      {"5 drift certificates", 5, drift_certificates},
      {"6 error sandwich", 120, sandwich},
      {"7 simulation/exact/MDP agreement", 300, oracle_triangle},
      {"8 exponent trend", 300, exponent_trend},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %s: %s (%.2fs of %.0fs)\n", pass ? "PASS" : "FAIL", c.name, out.detail.c_str(), secs,
                c.budget_s);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
