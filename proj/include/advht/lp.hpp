#pragma once

// Small dense linear programs: a two-phase simplex with Bland's rule and the
// max-slack feasibility test used by the bisection solvers.

#include <span>
#include <string>
#include <vector>

#include "advht/model.hpp"

namespace advht {

/// Raised when the simplex loses numerical control (pivot blow-up or
/// iteration cap). Never returned as a silent verdict.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class Relation { kGreaterEqual, kEqual, kLessEqual };

struct LinearConstraint {
  std::vector<double> coeffs;
  Relation relation = Relation::kGreaterEqual;
  double bound = 0.0;
};

/// Constraints over non-negative variables x >= 0.
struct LinearFeasibilityProblem {
  std::size_t num_vars = 0;
  std::vector<LinearConstraint> constraints;

  explicit LinearFeasibilityProblem(std::size_t n = 0) : num_vars(n) {}

  void add(std::vector<double> coeffs, Relation rel, double bound);
  void add_ge(std::vector<double> coeffs, double bound) { add(std::move(coeffs), Relation::kGreaterEqual, bound); }
  void add_le(std::vector<double> coeffs, double bound) { add(std::move(coeffs), Relation::kLessEqual, bound); }
  void add_eq(std::vector<double> coeffs, double bound) { add(std::move(coeffs), Relation::kEqual, bound); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  int pivots = 0;
};

/// maximize c.x subject to the problem's constraints and x >= 0.
LpSolution lp_maximize(const LinearFeasibilityProblem& problem, std::span<const double> c);

/// Feasibility slack below which a system counts as infeasible, and above
/// which it counts as strictly feasible.
inline constexpr double kFeasibilitySlack = 1e-10;

struct FeasibilityResult {
  bool feasible = false;          // max_slack >= -kFeasibilitySlack
  bool strictly_feasible = false; // max_slack >= kFeasibilitySlack
  /// max sigma such that every inequality holds with margin sigma (capped at 1).
  /// -inf when the equality rows alone are infeasible.
  double max_slack = 0.0;
  std::vector<double> point;
};

/// Decide feasibility by maximizing a uniform margin on the inequality rows.
/// Equality rows are kept exact.
FeasibilityResult lp_feasible(const LinearFeasibilityProblem& problem);

struct MembershipResult {
  bool member = false;
  /// L-infinity distance from the point to the polytope.
  double distance = 0.0;
  std::vector<double> weights;
};

/// Is `point` a convex combination of the polytope vertices (within kFeasibilitySlack)?
MembershipResult member_of(std::span<const double> point, const DistributionPolytope& polytope);

}  // namespace advht
