#pragma once

// Solvers for the three exponent programs over polytope pairs:
//   gamma     = sup_f  min_{p,q}       gamma_ratio(f; p, q)
//   C         = sup_f  min_{p,p',q,q'} E_q f+ E_p f- / (E_q' f- E_p' f+)
//   gamma_bar = min_{p,q} gamma_hc(p, q)
// and a numerical check that gamma == gamma_bar.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "advht/exponents.hpp"
#include "advht/model.hpp"

namespace advht {

/// Solver did not reach the requested tolerance; the partial result is attached.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double best, double gap) : Error(what), best_value(best), gap_value(gap) {}
  double best_value;
  double gap_value;
};

struct SolverOptions {
  double tol = 1e-6;
  int starts = 32;
  std::uint64_t seed = 0;
  int max_iters = 20000;
};

/// Indices of the vertices attaining the inner optimum. For gamma the primed
/// indices repeat p and q; for C they name the maximizing vertices.
struct ActiveVertices {
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t p_alt = 0;
  std::size_t q_alt = 0;
};

struct ExponentSolution {
  double value = 0.0;
  std::optional<WeightPair> witness_weights;
  std::optional<std::pair<Distribution, Distribution>> witness_pair;
  std::vector<ActiveVertices> certificate;
  double tolerance_achieved = 0.0;
  int iterations = 0;
  bool unbounded = false;
};

nlohmann::json to_json(const ExponentSolution& s);

/// Inner minimum of the gamma program at fixed weights: gamma1 * gamma0.
double gamma_objective(const ProblemInstance& instance, const WeightPair& w);
/// Inner minimum of the C program at fixed weights: C1 * C0.
double c_objective(const ProblemInstance& instance, const WeightPair& w);

ExponentSolution solve_gamma(const ProblemInstance& instance, const SolverOptions& opts = {});
ExponentSolution solve_C(const ProblemInstance& instance, const SolverOptions& opts = {});
ExponentSolution solve_gamma_bar(const ProblemInstance& instance, const SolverOptions& opts = {});

struct MinimaxReport {
  double gamma = 0.0;
  double gamma_bar = 0.0;
  double gap = 0.0;
  double allowed = 0.0;
  bool pass = false;
  /// gamma exceeded gamma_bar by more than the tolerance: a solver defect.
  bool order_violation = false;
  ExponentSolution gamma_solution;
  ExponentSolution gamma_bar_solution;
};

nlohmann::json to_json(const MinimaxReport& r);

MinimaxReport verify_minimax(const ProblemInstance& instance, double tol, const SolverOptions& opts = {});

/// Random instance with `letters` letters and 1..max_vertices vertices per
/// polytope, vertices drawn uniformly from the simplex.
ProblemInstance random_instance(std::size_t letters, std::size_t max_vertices, std::mt19937_64& rng);

}  // namespace advht
