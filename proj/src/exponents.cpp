#include "advht/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inverse_one_plus(double v) { return std::isinf(v) ? 0.0 : 1.0 / (1.0 + v); }

}  // namespace

GammaHcResult gamma_hc_detail(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw ValidationError("dimension mismatch in gamma_hc");
  GammaHcResult r;
  for (std::size_t x = 0; x < p.size(); ++x) {
    r.max_q_over_p = std::max(r.max_q_over_p, safe_ratio(q[x], p[x]));
    r.max_p_over_q = std::max(r.max_p_over_q, safe_ratio(p[x], q[x]));
  }
  r.doubly_infinite = std::isinf(r.max_q_over_p) && std::isinf(r.max_p_over_q);
  r.value = r.max_q_over_p * r.max_p_over_q;
  return r;
}

double gamma_hc(const Distribution& p, const Distribution& q) { return gamma_hc_detail(p, q).value; }

double gamma_ratio(const WeightPair& w, const Distribution& p, const Distribution& q) {
  const double num = expectation(w.f_plus(), q) * expectation(w.f_minus(), p);
  const double den = expectation(w.f_minus(), q) * expectation(w.f_plus(), p);
  return safe_ratio(num, den);
}

nlohmann::json to_json(const FsmRateSet& r) {
  return nlohmann::json{{"gamma0", r.gamma0},       {"gamma1", r.gamma1},         {"c0", r.c0},
                        {"c1", r.c1},               {"rho0_plus", r.rho0_plus},   {"rho0_minus", r.rho0_minus},
                        {"rho1_plus", r.rho1_plus}, {"rho1_minus", r.rho1_minus}, {"degenerate", r.degenerate}};
}

FsmRateSet rate_set(const ProblemInstance& instance, const WeightPair& w_gamma, const WeightPair& w_c) {
  if (w_gamma.size() != instance.num_letters() || w_c.size() != instance.num_letters()) {
    throw ValidationError("weight pair length differs from alphabet size");
  }
  FsmRateSet r;
  r.gamma0 = kInf;
  r.gamma1 = kInf;
  auto note = [&](double num, double den) {
    if (den == 0.0) r.degenerate = true;
    return safe_ratio(num, den);
  };

  double min_p_cm = kInf;
  double min_q_cp = kInf;
  for (const auto& p : instance.p0.vertices()) {
    r.gamma0 = std::min(r.gamma0, note(expectation(w_gamma.f_minus(), p), expectation(w_gamma.f_plus(), p)));
    const double cp = expectation(w_c.f_plus(), p);
    const double cm = expectation(w_c.f_minus(), p);
    r.rho0_plus = std::max(r.rho0_plus, cp);
    r.rho0_minus = std::max(r.rho0_minus, cm);
    min_p_cm = std::min(min_p_cm, cm);
  }
  for (const auto& q : instance.p1.vertices()) {
    r.gamma1 = std::min(r.gamma1, note(expectation(w_gamma.f_plus(), q), expectation(w_gamma.f_minus(), q)));
    const double cp = expectation(w_c.f_plus(), q);
    const double cm = expectation(w_c.f_minus(), q);
    r.rho1_plus = std::max(r.rho1_plus, cp);
    r.rho1_minus = std::max(r.rho1_minus, cm);
    min_q_cp = std::min(min_q_cp, cp);
  }
  r.c0 = note(min_p_cm, r.rho0_plus);
  r.c1 = note(min_q_cp, r.rho1_minus);
  return r;
}

double lower_bound(double gamma, int S) {
  if (S < 2) throw ValidationError("S must be at least 2");
  if (gamma < 0.0) throw ValidationError("gamma must be non-negative");
  return inverse_one_plus(std::pow(gamma, 0.5 * static_cast<double>(S - 1)));
}

double upper_bound(double gamma, double C, int S) {
  if (S < 3) throw ValidationError("upper bound requires S >= 3");
  if (gamma < 0.0 || C < 0.0) throw ValidationError("gamma and C must be non-negative");
  return inverse_one_plus(std::sqrt(C * std::pow(gamma, static_cast<double>(S - 2))));
}

Bounds bounds_for_S(double gamma, double C, int S) {
  Bounds b;
  b.lower = lower_bound(gamma, S);
  if (S >= 3) b.upper = upper_bound(gamma, C, S);
  b.exponent = gamma <= 0.0 ? -kInf : 0.5 * std::log(gamma);
  return b;
}

double hellman_pe(double gamma_hc_value, int S) {
  if (S < 2) throw ValidationError("S must be at least 2");
  if (!(gamma_hc_value >= 1.0)) throw ValidationError("gamma_hc must be at least 1");
  return inverse_one_plus(std::pow(gamma_hc_value, 0.5 * static_cast<double>(S - 1)));
}

}  // namespace advht
