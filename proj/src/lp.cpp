#include "advht/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advht {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;
constexpr double kPhaseOneTol = 1e-9;
constexpr int kMaxPivots = 200000;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows * (cols + 1), 0.0), z_(cols + 1, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, cols_); }
  std::vector<double>& z() { return z_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / at(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) *= inv;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = z_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= cols_; ++j) z_[j] -= f * at(r, j);
      z_[c] = 0.0;
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<double> z_;
};

// Load costs into the objective row and price out the current basis.
void price(Tableau& T, const std::vector<double>& cost, const std::vector<std::size_t>& basis) {
  auto& z = T.z();
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t j = 0; j < cost.size(); ++j) z[j] = cost[j];
  for (std::size_t i = 0; i < T.rows(); ++i) {
    const double cb = cost[basis[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= T.cols(); ++j) z[j] -= cb * T.at(i, j);
  }
}

enum class Run { kOptimal, kUnbounded };

Run run_simplex(Tableau& T, std::vector<std::size_t>& basis, const std::vector<bool>& barred, int& pivots) {
  while (true) {
    if (++pivots > kMaxPivots) throw NumericalError("simplex iteration cap exceeded");
    std::size_t enter = T.cols();
    for (std::size_t j = 0; j < T.cols(); ++j) {
      if (!barred[j] && T.z()[j] > kCostEps) {
        enter = j;
        break;
      }
    }
    if (enter == T.cols()) return Run::kOptimal;
    std::size_t leave = T.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < T.rows(); ++i) {
      const double a = T.at(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = std::max(0.0, T.rhs(i)) / a;
      const double tie = 1e-14 * (1.0 + ratio);
      if (leave == T.rows() || ratio < best - tie) {
        best = ratio;
        leave = i;
      } else if (ratio <= best + tie && basis[i] < basis[leave]) {
        leave = i;
      }
    }
    if (leave == T.rows()) return Run::kUnbounded;
    T.pivot(leave, enter);
    basis[leave] = enter;
  }
}

}  // namespace

void LinearFeasibilityProblem::add(std::vector<double> coeffs, Relation rel, double bound) {
  if (coeffs.size() != num_vars) {
    throw ValidationError("constraint has " + std::to_string(coeffs.size()) + " coefficients, expected " +
                          std::to_string(num_vars));
  }
  constraints.push_back({std::move(coeffs), rel, bound});
}

LpSolution lp_maximize(const LinearFeasibilityProblem& problem, std::span<const double> c) {
  const std::size_t n = problem.num_vars;
  const std::size_t m = problem.constraints.size();
  if (c.size() != n) throw ValidationError("objective length differs from variable count");

  // Flip rows so every right-hand side is non-negative.
  std::vector<LinearConstraint> rows = problem.constraints;
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (auto& r : rows) {
    if (r.coeffs.size() != n) throw ValidationError("constraint length differs from variable count");
    if (r.bound < 0.0) {
      for (double& a : r.coeffs) a = -a;
      r.bound = -r.bound;
      if (r.relation == Relation::kGreaterEqual) r.relation = Relation::kLessEqual;
      else if (r.relation == Relation::kLessEqual) r.relation = Relation::kGreaterEqual;
    }
    if (r.relation != Relation::kEqual) ++n_slack;
    if (r.relation != Relation::kLessEqual) ++n_art;
  }

  const std::size_t cols = n + n_slack + n_art;
  Tableau T(m, cols);
  std::vector<std::size_t> basis(m);
  std::vector<bool> artificial(cols, false);
  std::size_t next_slack = n;
  std::size_t next_art = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = rows[i];
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = r.coeffs[j];
    T.rhs(i) = r.bound;
    if (r.relation == Relation::kLessEqual) {
      T.at(i, next_slack) = 1.0;
      basis[i] = next_slack++;
    } else {
      if (r.relation == Relation::kGreaterEqual) T.at(i, next_slack++) = -1.0;
      T.at(i, next_art) = 1.0;
      artificial[next_art] = true;
      basis[i] = next_art++;
    }
  }

  LpSolution out;
  std::vector<bool> barred(cols, false);
  double scale = 1.0;
  for (const auto& r : rows) scale = std::max(scale, r.bound);

  if (n_art > 0) {
    std::vector<double> cost(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) cost[j] = artificial[j] ? -1.0 : 0.0;
    price(T, cost, basis);
    run_simplex(T, basis, barred, out.pivots);
    if (T.z()[cols] > kPhaseOneTol * scale) {
      out.status = LpStatus::kInfeasible;
      return out;
    }
    // Drive remaining artificials out of the basis; rows that cannot pivot are redundant.
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[basis[i]]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!artificial[j] && std::abs(T.at(i, j)) > 1e-9) {
          T.pivot(i, j);
          basis[i] = j;
          break;
        }
      }
    }
    for (std::size_t j = 0; j < cols; ++j) barred[j] = artificial[j];
  }

  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
  price(T, cost, basis);
  if (run_simplex(T, basis, barred, out.pivots) == Run::kUnbounded) {
    out.status = LpStatus::kUnbounded;
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = std::max(0.0, T.rhs(i));
  }
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  for (double v : out.x) {
    if (!std::isfinite(v)) throw NumericalError("simplex produced a non-finite point");
  }
  return out;
}

FeasibilityResult lp_feasible(const LinearFeasibilityProblem& problem) {
  const std::size_t n = problem.num_vars;
  // One extra variable t = sigma + 1 in [0, 2]. A slack below -1 shows up as
  // an infeasible lifted program, which is still a correct "infeasible".
  LinearFeasibilityProblem lifted(n + 1);
  for (const auto& r : problem.constraints) {
    double norm = 0.0;
    for (double a : r.coeffs) norm = std::max(norm, std::abs(a));
    if (r.relation == Relation::kEqual) {
      std::vector<double> a(r.coeffs);
      a.resize(n + 1, 0.0);
      lifted.add_eq(std::move(a), r.bound);
      continue;
    }
    const double scale = norm > 0.0 ? 1.0 / norm : 1.0;
    const double sign = r.relation == Relation::kGreaterEqual ? 1.0 : -1.0;
    std::vector<double> a(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[j] = sign * r.coeffs[j] * scale;
    a[n] = -1.0;
    lifted.add_ge(std::move(a), sign * r.bound * scale - 1.0);
  }
  std::vector<double> cap(n + 1, 0.0);
  cap[n] = 1.0;
  lifted.add_le(cap, 2.0);

  std::vector<double> objective(n + 1, 0.0);
  objective[n] = 1.0;
  const LpSolution sol = lp_maximize(lifted, objective);

  FeasibilityResult res;
  if (sol.status == LpStatus::kInfeasible) {
    res.max_slack = -std::numeric_limits<double>::infinity();
    return res;
  }
  if (sol.status == LpStatus::kUnbounded) throw NumericalError("slack program reported unbounded");
  res.max_slack = sol.objective - 1.0;
  res.feasible = res.max_slack >= -kFeasibilitySlack;
  res.strictly_feasible = res.max_slack >= kFeasibilitySlack;
  res.point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
  return res;
}

MembershipResult member_of(std::span<const double> point, const DistributionPolytope& polytope) {
  if (point.size() != polytope.dimension()) throw ValidationError("dimension mismatch in membership test");
  const std::size_t k = polytope.num_vertices();
  // Variables: lambda (k), d >= 0. Minimize the L-inf distance d.
  LinearFeasibilityProblem lp(k + 1);
  std::vector<double> sum(k + 1, 1.0);
  sum[k] = 0.0;
  lp.add_eq(sum, 1.0);
  for (std::size_t x = 0; x < point.size(); ++x) {
    std::vector<double> lo(k + 1, 0.0);
    std::vector<double> hi(k + 1, 0.0);
    for (std::size_t v = 0; v < k; ++v) {
      lo[v] = polytope.vertex(v)[x];
      hi[v] = polytope.vertex(v)[x];
    }
    lo[k] = 1.0;
    hi[k] = -1.0;
    lp.add_ge(std::move(lo), point[x]);
    lp.add_le(std::move(hi), point[x]);
  }
  std::vector<double> objective(k + 1, 0.0);
  objective[k] = -1.0;
  const LpSolution sol = lp_maximize(lp, objective);
  if (sol.status != LpStatus::kOptimal) throw NumericalError("membership program failed");
  MembershipResult r;
  r.distance = std::max(0.0, -sol.objective);
  r.member = r.distance <= kFeasibilitySlack;
  r.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(k));
  return r;
}

}  // namespace advht
