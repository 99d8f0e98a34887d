#pragma once

// Least-favourable-distribution checks for a candidate pair (p*, q*).
//
// Weak: the extreme likelihood-ratio letter sets X+ and X- are simultaneously
// least favourable for every member of the two polytopes.
// Strong: every likelihood-ratio tail event {x : q*(x)/p*(x) > eta} is.
// Both conditions are linear in the competing distribution, so checking the
// polytope vertices is exact.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "advht/model.hpp"

namespace advht {

inline constexpr double kDefaultTieTol = 1e-9;
inline constexpr double kLfdInequalityTol = 1e-12;

struct RatioSets {
  std::vector<std::size_t> x_plus;
  std::vector<std::size_t> x_minus;
  std::vector<double> ratios;  // q*(x)/p*(x) with 0/0 = 0
  /// The ratio is constant, so X+ = X- = every letter.
  bool degenerate = false;
};

RatioSets argmax_ratio_sets(const Distribution& p_star, const Distribution& q_star, double tie_tol = kDefaultTieTol);

/// One failed tail inequality.
struct ThresholdViolation {
  double eta_lo = 0.0;  // open interval of thresholds sharing this event
  double eta_hi = 0.0;
  double eta = 0.0;     // representative threshold that was tested
  int hypothesis = 0;   // 0: P0 inequality, 1: P1 inequality
  std::size_t vertex = 0;
  double lhs = 0.0;     // competing vertex mass of the event
  double rhs = 0.0;     // candidate mass of the event
  std::vector<std::size_t> event;
};

struct LfdReport {
  bool is_weak = false;
  bool is_strong = false;
  RatioSets sets;
  std::optional<std::string> weak_violation;
  std::optional<std::string> strong_violation;  // first entry of threshold_violations, described
  std::vector<ThresholdViolation> threshold_violations;
  std::vector<double> thresholds_tested;
};

nlohmann::json to_json(const LfdReport& r);

/// Both checks are computed; the names document the caller's intent.
/// Throws ValidationError when p* is not in P0 or q* is not in P1.
LfdReport is_weak_lfd(const Distribution& p_star, const Distribution& q_star, const ProblemInstance& instance,
                      double tie_tol = kDefaultTieTol);
LfdReport is_strong_lfd(const Distribution& p_star, const Distribution& q_star, const ProblemInstance& instance,
                        double tie_tol = kDefaultTieTol);

/// Tail inequalities at a single threshold eta > 0 (no membership check).
std::vector<ThresholdViolation> check_threshold(const Distribution& p_star, const Distribution& q_star,
                                                const ProblemInstance& instance, double eta);

/// The representative thresholds used by the strong check.
std::vector<double> strong_thresholds(const RatioSets& sets, double tie_tol = kDefaultTieTol);

/// 1/(1 + gamma_hc(p*, q*)^((S-1)/2)).
double weak_lfd_pe(const Distribution& p_star, const Distribution& q_star, int S);

struct LfdScanResult {
  std::optional<std::pair<Distribution, Distribution>> pair;
  int candidates_tried = 0;
};

/// Heuristic search for a weak LFD pair: vertices first, then a seeded grid
/// on segments between vertex pairs. Failure to find one proves nothing.
LfdScanResult scan_weak_lfd(const ProblemInstance& instance, int grid, std::uint64_t seed);

}  // namespace advht
