#include "advht/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "advht/analysis.hpp"
#include "advht/lp.hpp"
#include "advht/markov.hpp"

namespace advht {

namespace {

void check_h(int h) {
  if (h != 0 && h != 1) throw ValidationError("hypothesis must be 0 or 1");
}

constexpr double kAperiodicity = 0.5;
constexpr int kMaxPolicyRounds = 1000;

}  // namespace

void require_membership(const Distribution& d, const ProblemInstance& instance, int h) {
  const auto m = member_of(d.probs(), instance.polytope(h));
  if (!m.member) {
    std::ostringstream os;
    os << "distribution is not in P" << h << " (L-inf distance " << m.distance << ")";
    throw ValidationError(os.str());
  }
}

const Distribution& AdversaryPolicy::at_state(int state) const {
  if (kind_ == PolicyKind::kScripted) throw Error("scripted policies have no per-state distribution");
  if (kind_ == PolicyKind::kFixed) return per_state_.front();
  return per_state_.at(static_cast<std::size_t>(state));
}

AdversaryPolicy AdversaryPolicy::fixed(const Distribution& d, const ProblemInstance& instance, int h) {
  check_h(h);
  require_membership(d, instance, h);
  AdversaryPolicy p;
  p.kind_ = PolicyKind::kFixed;
  p.h_ = h;
  p.per_state_.push_back(d);
  return p;
}

AdversaryPolicy AdversaryPolicy::stationary(std::vector<Distribution> per_state, const ProblemInstance& instance,
                                            int h) {
  check_h(h);
  if (per_state.empty()) throw ValidationError("stationary policy needs at least one state");
  for (const auto& d : per_state) require_membership(d, instance, h);
  AdversaryPolicy p;
  p.kind_ = PolicyKind::kStationary;
  p.h_ = h;
  p.per_state_ = std::move(per_state);
  return p;
}

AdversaryPolicy AdversaryPolicy::stationary_vertices(const std::vector<std::size_t>& map,
                                                     const ProblemInstance& instance, int h) {
  check_h(h);
  const auto& poly = instance.polytope(h);
  if (map.empty()) throw ValidationError("stationary policy needs at least one state");
  AdversaryPolicy p;
  p.kind_ = PolicyKind::kStationary;
  p.h_ = h;
  for (auto v : map) {
    if (v >= poly.num_vertices()) {
      throw ValidationError("vertex index " + std::to_string(v) + " out of range for P" + std::to_string(h));
    }
    p.per_state_.push_back(poly.vertex(v));
  }
  p.vertex_map_ = map;
  return p;
}

AdversaryPolicy AdversaryPolicy::scripted(ScriptedRule rule, const ProblemInstance& instance, int h, bool debug) {
  check_h(h);
  if (!rule) throw ValidationError("scripted policy needs a rule");
  AdversaryPolicy p;
  p.kind_ = PolicyKind::kScripted;
  p.h_ = h;
  p.rule_ = std::move(rule);
  if (debug) p.debug_poly_ = std::make_shared<DistributionPolytope>(instance.polytope(h));
  return p;
}

std::vector<std::size_t> greedy_drift_policy(const DetectorFSM& fsm, const ProblemInstance& instance, int h) {
  check_h(h);
  const auto& poly = instance.polytope(h);
  const double sign = h == 0 ? 1.0 : -1.0;
  std::vector<std::size_t> map(static_cast<std::size_t>(fsm.num_states()), 0);
  for (int s = 0; s < fsm.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < poly.num_vertices(); ++v) {
      const auto next = step_distribution(fsm, s, poly.vertex(v));
      double move = 0.0;
      for (int t = 0; t < fsm.num_states(); ++t) move += next[static_cast<std::size_t>(t)] * (t - s);
      if (sign * move > best) {
        best = sign * move;
        map[static_cast<std::size_t>(s)] = v;
      }
    }
  }
  return map;
}

MdpSolution worst_case_adversary(const DetectorFSM& fsm, const ProblemInstance& instance, int h, double tol,
                                 int max_iters) {
  check_h(h);
  if (fsm.num_letters() != instance.num_letters()) throw ValidationError("FSM alphabet differs from instance");
  const auto& poly = instance.polytope(h);
  const int S = fsm.num_states();
  const int A = static_cast<int>(poly.num_vertices());

  std::vector<Matrix> P(A, Matrix::Zero(S, S));
  Matrix support = Matrix::Zero(S, S);
  for (int a = 0; a < A; ++a) {
    for (int s = 0; s < S; ++s) {
      const auto row = step_distribution(fsm, s, poly.vertex(static_cast<std::size_t>(a)));
      for (int t = 0; t < S; ++t) P[a](s, t) = row[static_cast<std::size_t>(t)];
    }
    support = support.cwiseMax(P[a]);
  }
  int count = 0;
  const auto comp = strongly_connected_components(support, &count);
  if (closed_components(support, comp, count).size() != 1) {
    throw MultichainError("the union transition graph has more than one closed class");
  }
  Vector r(S);
  for (int s = 0; s < S; ++s) r(s) = fsm.decision(s) != h ? 1.0 : 0.0;

  MdpSolution sol;
  std::vector<std::size_t> policy(static_cast<std::size_t>(S), 0);

  // Relative value iteration on the aperiodic transform tau I + (1 - tau) P.
  Vector V = Vector::Zero(S);
  for (int it = 0; it < max_iters; ++it) {
    ++sol.iterations;
    Vector TV(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const double q = kAperiodicity * V(s) + (1.0 - kAperiodicity) * P[a].row(s).dot(V);
        if (q > best + 1e-15) {
          best = q;
          policy[static_cast<std::size_t>(s)] = static_cast<std::size_t>(a);
        }
      }
      TV(s) = r(s) + best;
    }
    const Vector diff = TV - V;
    const double span = diff.maxCoeff() - diff.minCoeff();
    V = TV.array() - TV(0);
    if (span <= tol) {
      sol.value_iteration_converged = true;
      break;
    }
  }

  // Policy iteration polish with exact evaluation.
  auto kernel_of = [&](const std::vector<std::size_t>& pol) {
    Matrix K(S, S);
    for (int s = 0; s < S; ++s) K.row(s) = P[pol[static_cast<std::size_t>(s)]].row(s);
    return K;
  };
  Vector hvec = Vector::Zero(S);
  double g = 0.0;
  for (int round = 0; round < kMaxPolicyRounds; ++round) {
    ++sol.policy_iterations;
    const Matrix K = kernel_of(policy);
    // Unknowns (g, h(1), ..., h(S-1)); h(0) = 0.
    Matrix M = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s) {
      M(s, 0) = 1.0;
      for (int t = 1; t < S; ++t) M(s, t) = (s == t ? 1.0 : 0.0) - K(s, t);
    }
    const Vector z = M.fullPivLu().solve(r);
    g = z(0);
    hvec(0) = 0.0;
    for (int t = 1; t < S; ++t) hvec(t) = z(t);

    const double scale = std::max(1.0, hvec.cwiseAbs().maxCoeff());
    bool changed = false;
    for (int s = 0; s < S; ++s) {
      const std::size_t cur = policy[static_cast<std::size_t>(s)];
      double best = P[cur].row(s).dot(hvec);
      std::size_t arg = cur;
      for (int a = 0; a < A; ++a) {
        const double q = P[a].row(s).dot(hvec);
        if (q > best + 1e-12 * scale) {
          best = q;
          arg = static_cast<std::size_t>(a);
        }
      }
      if (arg != cur) {
        policy[static_cast<std::size_t>(s)] = arg;
        changed = true;
      }
    }
    if (!changed) break;
  }

  Vector resid(S);
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) best = std::max(best, r(s) + P[a].row(s).dot(hvec));
    resid(s) = best - hvec(s) - g;
  }
  sol.residual = resid.maxCoeff() - resid.minCoeff();
  sol.policy = policy;
  sol.gain = g;
  sol.bias.assign(hvec.data(), hvec.data() + S);
  const auto pol = AdversaryPolicy::stationary_vertices(policy, instance, h);
  sol.worst_error = exact_average_error(fsm, pol, h).value;
  return sol;
}

nlohmann::json to_json(const MdpSolution& s) {
  return nlohmann::json{{"worst_error", s.worst_error},
                        {"policy", s.policy},
                        {"gain", s.gain},
                        {"bias", s.bias},
                        {"iterations", s.iterations},
                        {"policy_iterations", s.policy_iterations},
                        {"residual", s.residual},
                        {"value_iteration_converged", s.value_iteration_converged},
                        {"note",
                         "transitions and rewards are linear in the adversary's distribution, so vertex actions "
                         "suffice, and stationary deterministic policies are optimal for unichain average-reward "
                         "MDPs"}};
}

nlohmann::json policy_to_json(const std::vector<std::size_t>& map, int h) {
  return nlohmann::json{{"kind", "stationary"}, {"h", h}, {"map", map}};
}

AdversaryPolicy policy_from_json(const nlohmann::json& doc, const ProblemInstance& instance) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const int h = doc.at("h").get<int>();
    if (kind == "stationary") {
      return AdversaryPolicy::stationary_vertices(doc.at("map").get<std::vector<std::size_t>>(), instance, h);
    }
    if (kind == "fixed") {
      if (doc.contains("vertex")) {
        const auto v = doc.at("vertex").get<std::size_t>();
        const auto& poly = instance.polytope(h);
        if (v >= poly.num_vertices()) throw ValidationError("vertex index out of range");
        return AdversaryPolicy::fixed(poly.vertex(v), instance, h);
      }
      std::vector<double> probs;
      for (const auto& e : doc.at("distribution")) probs.push_back(parse_probability(e));
      return AdversaryPolicy::fixed(Distribution(std::move(probs)), instance, h);
    }
    throw ParseError("unknown policy kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed policy document: ") + e.what());
  }
}

}  // namespace advht
