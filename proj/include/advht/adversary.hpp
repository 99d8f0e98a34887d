#pragma once

// Adversary strategies and the worst-case stationary adversary of a fixed
// detector, found as an average-reward MDP whose actions are the vertices of
// the hypothesis polytope.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advht/fsm.hpp"
#include "advht/model.hpp"

namespace advht {

enum class PolicyKind { kFixed, kStationary, kScripted };

/// Chooses the next sample distribution from the full past: samples drawn
/// so far and states visited so far (the last entry is the current state).
using ScriptedRule = std::function<Distribution(std::span<const std::size_t> samples, std::span<const int> states)>;

class AdversaryPolicy {
 public:
  PolicyKind kind() const noexcept { return kind_; }
  int hypothesis() const noexcept { return h_; }

  /// Distribution used in `state` (fixed and stationary only).
  const Distribution& at_state(int state) const;
  const std::vector<Distribution>& per_state() const noexcept { return per_state_; }
  /// Vertex index per state when the policy was built from vertex indices.
  const std::optional<std::vector<std::size_t>>& vertex_map() const noexcept { return vertex_map_; }

  const ScriptedRule& rule() const noexcept { return rule_; }
  /// Polytope used for per-step membership checks of scripted output (debug mode).
  const DistributionPolytope* debug_polytope() const noexcept { return debug_poly_.get(); }

  static AdversaryPolicy fixed(const Distribution& d, const ProblemInstance& instance, int h);
  static AdversaryPolicy stationary(std::vector<Distribution> per_state, const ProblemInstance& instance, int h);
  static AdversaryPolicy stationary_vertices(const std::vector<std::size_t>& map, const ProblemInstance& instance,
                                             int h);
  static AdversaryPolicy scripted(ScriptedRule rule, const ProblemInstance& instance, int h, bool debug);

 private:
  PolicyKind kind_ = PolicyKind::kFixed;
  int h_ = 0;
  std::vector<Distribution> per_state_;
  std::optional<std::vector<std::size_t>> vertex_map_;
  ScriptedRule rule_;
  std::shared_ptr<DistributionPolytope> debug_poly_;
};

/// Membership failures are reported as ValidationError with the distance.
void require_membership(const Distribution& d, const ProblemInstance& instance, int h);

/// Per state, the vertex that pushes the chain hardest toward the wrong end
/// in one step (maximal expected move right under h=0, left under h=1).
std::vector<std::size_t> greedy_drift_policy(const DetectorFSM& fsm, const ProblemInstance& instance, int h);

struct MdpSolution {
  double worst_error = 0.0;
  std::vector<std::size_t> policy;  // vertex index per state
  double gain = 0.0;
  std::vector<double> bias;         // bias(0) = 0
  int iterations = 0;               // value-iteration sweeps
  int policy_iterations = 0;        // exact policy-improvement rounds
  double residual = 0.0;            // span of the Bellman residual at the returned bias
  bool value_iteration_converged = false;
};

nlohmann::json to_json(const MdpSolution& s);

/// Raised when the union support graph has more than one closed class.
class MultichainError : public Error {
 public:
  using Error::Error;
};

MdpSolution worst_case_adversary(const DetectorFSM& fsm, const ProblemInstance& instance, int h, double tol = 1e-10,
                                 int max_iters = 200000);

nlohmann::json policy_to_json(const std::vector<std::size_t>& map, int h);
AdversaryPolicy policy_from_json(const nlohmann::json& doc, const ProblemInstance& instance);

}  // namespace advht
