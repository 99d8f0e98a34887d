#pragma once

// Closed-form exponent quantities for fixed arguments.

#include <optional>

#include "advht/model.hpp"

namespace advht {

struct GammaHcResult {
  double value = 0.0;
  double max_q_over_p = 0.0;
  double max_p_over_q = 0.0;
  /// Both one-sided maxima are infinite (supports disjoint in both directions).
  bool doubly_infinite = false;
};

GammaHcResult gamma_hc_detail(const Distribution& p, const Distribution& q);

/// max_x q/p * max_x p/q.
double gamma_hc(const Distribution& p, const Distribution& q);

/// (E_q f+ * E_p f-) / (E_q f- * E_p f+), 0/0 = 0 on the whole fraction.
double gamma_ratio(const WeightPair& w, const Distribution& p, const Distribution& q);

struct FsmRateSet {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double rho0_plus = 0.0;
  double rho0_minus = 0.0;
  double rho1_plus = 0.0;
  double rho1_minus = 0.0;
  /// Some ratio hit a zero denominator at every vertex.
  bool degenerate = false;
};

nlohmann::json to_json(const FsmRateSet& r);

FsmRateSet rate_set(const ProblemInstance& instance, const WeightPair& w_gamma, const WeightPair& w_c);

struct Bounds {
  double lower = 0.0;
  std::optional<double> upper;  // only for S >= 3
  double exponent = 0.0;        // 0.5 * log(gamma)
};

/// Lower bound 1/(1+sqrt(gamma^(S-1))) and upper bound 1/(1+sqrt(C gamma^(S-2))).
/// S == 2 yields only the lower bound; S < 2 throws.
Bounds bounds_for_S(double gamma, double C, int S);

/// Strict form: throws for S < 3.
double upper_bound(double gamma, double C, int S);
double lower_bound(double gamma, int S);

/// 1/(1+gamma_hc^((S-1)/2)).
double hellman_pe(double gamma_hc, int S);

}  // namespace advht
