#include "advht/drift.hpp"

#include <cmath>

namespace advht {

namespace {

struct MachineParams {
  int S;
  double delta, kappa, eta;
  FsmRateSet r;
};

MachineParams machine_params(const DetectorFSM& fsm) {
  const auto& p = fsm.params();
  if (p.kind != FsmKind::kAdversarial || !p.rates) {
    throw ValidationError("drift specs need a machine built by build_adversarial_fsm");
  }
  return {fsm.num_states(), p.delta, p.kappa, p.eta, *p.rates};
}

std::size_t idx(int one_based) { return static_cast<std::size_t>(one_based - 1); }

// sum_{i=1..k} g^-i
double inverse_sum(double g, int k) {
  double s = 0.0;
  double term = 1.0;
  for (int i = 1; i <= k; ++i) {
    term /= g;
    s += term;
  }
  return s;
}

}  // namespace

double geometric_sum(double g, int k) {
  if (k <= 0) return 0.0;
  const double e = g - 1.0;
  if (e == 0.0) return static_cast<double>(k);
  // g^k - 1 cancels badly when g is close to 1
  return std::expm1(k * std::log1p(e)) / e;
}

DriftSpec build_claim1_drift(const DetectorFSM& fsm) {
  const auto P = machine_params(fsm);
  const int S = P.S;
  const double g0 = P.r.gamma0;
  const double end_weight = P.kappa * P.r.c0 * std::pow(g0, S - 2);
  const double unit = 1.0 / (P.delta * P.r.rho0_plus);
  DriftSpec spec;
  spec.label = "end-state balance under H=0";
  spec.increments.assign(static_cast<std::size_t>(S), 0.0);
  spec.potential.assign(static_cast<std::size_t>(S), 0.0);
  spec.increments[idx(1)] = 1.0;
  spec.increments[idx(S)] = -end_weight;
  spec.potential[idx(1)] = 1.0;
  for (int s = 2; s <= S - 1; ++s) spec.potential[idx(s)] = geometric_sum(g0, s - 1) * unit;
  spec.potential[idx(S)] = geometric_sum(g0, S - 1) * unit - end_weight;
  spec.direction = DriftDirection::kSubmartingale;
  spec.hypothesis = 0;
  return spec;
}

DriftSpec build_claim2_drift(const DetectorFSM& fsm, int s0) {
  const auto P = machine_params(fsm);
  const int S = P.S;
  const int s = s0 + 1;
  if (s < 2 || s > S - 1) throw ValidationError("internal state required (0-based 1..S-2)");
  if (!(P.eta > 0.0)) throw ValidationError("the internal-state potential needs eta > 0");
  const double g0 = P.r.gamma0;
  const double r = (1.0 - P.eta) / P.eta;
  const double rho_p = P.r.rho0_plus;
  const double rho_m = P.r.rho0_minus;
  const double gs = std::pow(g0, s - 1);

  DriftSpec spec;
  spec.label = "time in internal state " + std::to_string(s0) + " under H=0";
  spec.increments.assign(static_cast<std::size_t>(S), 0.0);
  spec.potential.assign(static_cast<std::size_t>(S), 0.0);
  spec.increments[idx(s)] = 1.0;
  spec.increments[idx(1)] = -P.delta * r * rho_p / gs;
  spec.increments[idx(S)] = -P.kappa * P.delta * std::pow(r, S - 1 - s) * rho_m;

  for (int t = 1; t <= S; ++t) {
    double v;
    if (t == S) {
      v = geometric_sum(r, S - s) - P.kappa * P.delta * rho_m * std::pow(r, S - s - 1);
    } else if (t == 1) {
      v = r * (inverse_sum(g0, s - 1) - P.delta * rho_p / gs);
    } else if (t < s) {
      v = r * inverse_sum(g0, s - t);
    } else if (t <= s + 1) {
      v = 1.0;
    } else {
      v = geometric_sum(r, t - s);
    }
    spec.potential[idx(t)] = v;
  }
  spec.direction = DriftDirection::kSupermartingale;
  spec.hypothesis = 0;
  return spec;
}

DriftSpec mirrored_claim1_drift(const DetectorFSM& fsm) {
  const auto P = machine_params(fsm);
  const int S = P.S;
  const double g1 = P.r.gamma1;
  const double end_weight = P.r.c1 * std::pow(g1, S - 2) / P.kappa;
  const double unit = 1.0 / (P.kappa * P.delta * P.r.rho1_minus);
  DriftSpec spec;
  spec.label = "end-state balance under H=1 (reflected)";
  spec.increments.assign(static_cast<std::size_t>(S), 0.0);
  spec.potential.assign(static_cast<std::size_t>(S), 0.0);
  spec.increments[idx(S)] = 1.0;
  spec.increments[idx(1)] = -end_weight;
  spec.potential[idx(S)] = 1.0;
  for (int s = 2; s <= S - 1; ++s) spec.potential[idx(s)] = geometric_sum(g1, S - s) * unit;
  spec.potential[idx(1)] = geometric_sum(g1, S - 1) * unit - end_weight;
  spec.direction = DriftDirection::kSubmartingale;
  spec.hypothesis = 1;
  return spec;
}

DriftReport verify_drift(const DetectorFSM& fsm, const DriftSpec& spec, const ProblemInstance& instance,
                         double slack) {
  const int S = fsm.num_states();
  if (spec.increments.size() != static_cast<std::size_t>(S) || spec.potential.size() != static_cast<std::size_t>(S)) {
    throw ValidationError("drift spec length differs from the number of states");
  }
  const auto& poly = instance.polytope(spec.hypothesis);
  DriftReport rep;
  rep.slack = slack;
  rep.drift.assign(static_cast<std::size_t>(S), std::vector<double>(poly.num_vertices(), 0.0));
  rep.scale = rep.drift;
  rep.worst = -std::numeric_limits<double>::infinity();
  const long double sign = spec.direction == DriftDirection::kSubmartingale ? -1.0L : 1.0L;
  for (int u = 0; u < S; ++u) {
    for (std::size_t a = 0; a < poly.num_vertices(); ++a) {
      const auto& p = poly.vertex(a);
      long double d = 0.0L;
      long double sc = 0.0L;
      for (int t = 0; t < S; ++t) {
        long double pt = 0.0L;
        for (std::size_t x = 0; x < p.size(); ++x) pt += static_cast<long double>(p[x]) * fsm.prob(u, x, t);
        if (pt == 0.0L) continue;
        const long double inc = static_cast<long double>(spec.increments[static_cast<std::size_t>(t)]) +
                                static_cast<long double>(spec.potential[static_cast<std::size_t>(u)]) -
                                static_cast<long double>(spec.potential[static_cast<std::size_t>(t)]);
        d += pt * inc;
        sc += pt * (inc < 0 ? -inc : inc);
      }
      rep.drift[static_cast<std::size_t>(u)][a] = static_cast<double>(d);
      rep.scale[static_cast<std::size_t>(u)][a] = static_cast<double>(sc);
      const double violation = static_cast<double>(sign * d / std::max(1.0L, sc));
      if (violation > rep.worst) {
        rep.worst = violation;
        rep.worst_state = u;
        rep.worst_vertex = a;
      }
    }
  }
  rep.pass = rep.worst <= slack;
  return rep;
}

nlohmann::json to_json(const DriftReport& r) {
  return nlohmann::json{{"drift", r.drift},
                        {"scale", r.scale},
                        {"worst_violation", r.worst},
                        {"worst_state", r.worst_state},
                        {"worst_vertex", r.worst_vertex},
                        {"slack", r.slack},
                        {"pass", r.pass}};
}

}  // namespace advht
