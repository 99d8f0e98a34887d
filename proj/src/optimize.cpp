#include "advht/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advht/lp.hpp"

namespace advht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDomainFloor = 1e-9;
constexpr double kUnboundedProbe = 1e15;

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

// Variables are (f_plus[0..n), f_minus[0..n)). Rows that hold for every u.
LinearFeasibilityProblem weight_base(const ProblemInstance& inst) {
  const std::size_t n = inst.num_letters();
  LinearFeasibilityProblem lp(2 * n);
  auto sum = zeros(2 * n);
  std::fill(sum.begin(), sum.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
  lp.add_eq(std::move(sum), 1.0);
  for (const auto& q : inst.p1.vertices()) {
    auto a = zeros(2 * n);
    for (std::size_t x = 0; x < n; ++x) a[x] = q[x];
    lp.add_ge(std::move(a), kDomainFloor);
  }
  for (const auto& p : inst.p0.vertices()) {
    auto a = zeros(2 * n);
    for (std::size_t x = 0; x < n; ++x) a[n + x] = p[x];
    lp.add_ge(std::move(a), kDomainFloor);
  }
  return lp;
}

// gamma >= u  <=>  exists f with gamma1 >= 1 and gamma0 >= u (rescale f_minus).
LinearFeasibilityProblem gamma_system(const ProblemInstance& inst, double u) {
  const std::size_t n = inst.num_letters();
  auto lp = weight_base(inst);
  for (const auto& q : inst.p1.vertices()) {
    auto a = zeros(2 * n);
    for (std::size_t x = 0; x < n; ++x) {
      a[x] = q[x];
      a[n + x] = -q[x];
    }
    lp.add_ge(std::move(a), 0.0);
  }
  for (const auto& p : inst.p0.vertices()) {
    auto a = zeros(2 * n);
    for (std::size_t x = 0; x < n; ++x) {
      a[x] = -u * p[x];
      a[n + x] = p[x];
    }
    lp.add_ge(std::move(a), 0.0);
  }
  return lp;
}

// C >= u  <=>  exists f with C1 >= 1 and C0 >= u.
LinearFeasibilityProblem c_system(const ProblemInstance& inst, double u) {
  const std::size_t n = inst.num_letters();
  auto lp = weight_base(inst);
  for (const auto& q : inst.p1.vertices()) {
    for (const auto& q2 : inst.p1.vertices()) {
      auto a = zeros(2 * n);
      for (std::size_t x = 0; x < n; ++x) {
        a[x] = q[x];
        a[n + x] = -q2[x];
      }
      lp.add_ge(std::move(a), 0.0);
    }
  }
  for (const auto& p : inst.p0.vertices()) {
    for (const auto& p2 : inst.p0.vertices()) {
      auto a = zeros(2 * n);
      for (std::size_t x = 0; x < n; ++x) {
        a[x] = -u * p2[x];
        a[n + x] = p[x];
      }
      lp.add_ge(std::move(a), 0.0);
    }
  }
  return lp;
}

WeightPair weights_from_point(const std::vector<double>& z, std::size_t n) {
  std::vector<double> fp(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> fm(z.begin() + static_cast<std::ptrdiff_t>(n), z.end());
  double peak = 0.0;
  for (std::size_t x = 0; x < n; ++x) peak = std::max(peak, fp[x] + fm[x]);
  for (std::size_t x = 0; x < n; ++x) {
    fp[x] /= peak;
    fm[x] /= peak;
  }
  return WeightPair(std::move(fp), std::move(fm));
}

double min_vertex_pair_gamma_hc(const ProblemInstance& inst) {
  double best = kInf;
  for (const auto& p : inst.p0.vertices()) {
    for (const auto& q : inst.p1.vertices()) best = std::min(best, gamma_hc(p, q));
  }
  return best;
}

template <class System, class Objective>
ExponentSolution bisect_weights(const ProblemInstance& inst, const SolverOptions& opts, System system,
                                Objective objective) {
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
  const std::size_t n = inst.num_letters();
  ExponentSolution sol;

  // f_plus = f_minus is always feasible at u = 1.
  double lo = 1.0;
  auto at_lo = lp_feasible(system(inst, lo));
  if (!at_lo.feasible) throw SolverError("weight program infeasible at u = 1", 0.0, kInf);

  double hi = min_vertex_pair_gamma_hc(inst) + 1.0;
  if (std::isinf(hi)) hi = 2.0;
  while (true) {
    ++sol.iterations;
    auto r = lp_feasible(system(inst, hi));
    if (!r.feasible) break;
    lo = hi;
    at_lo = std::move(r);
    if (hi >= kUnboundedProbe) {
      sol.unbounded = true;
      sol.value = kInf;
      sol.witness_weights = weights_from_point(at_lo.point, n);
      return sol;
    }
    hi = std::min(kUnboundedProbe, hi * 2.0);
  }

  while (hi - lo > opts.tol) {
    if (++sol.iterations > opts.max_iters) {
      throw SolverError("bisection did not converge", lo, hi - lo);
    }
    const double mid = 0.5 * (lo + hi);
    auto r = lp_feasible(system(inst, mid));
    if (r.feasible) {
      lo = mid;
      at_lo = std::move(r);
    } else {
      hi = mid;
    }
  }

  WeightPair w = weights_from_point(at_lo.point, n);
  // The witness value is attained, so it is the certified lower end even
  // when LP round-off leaves it a little under lo.
  const double achieved = objective(inst, w);
  sol.value = achieved;
  sol.tolerance_achieved = std::max(hi, achieved) - achieved;
  sol.witness_weights = std::move(w);
  return sol;
}

struct Expect {
  std::vector<double> p_plus, p_minus, q_plus, q_minus;
};

Expect vertex_expectations(const ProblemInstance& inst, const WeightPair& w) {
  Expect e;
  for (const auto& p : inst.p0.vertices()) {
    e.p_plus.push_back(expectation(w.f_plus(), p));
    e.p_minus.push_back(expectation(w.f_minus(), p));
  }
  for (const auto& q : inst.p1.vertices()) {
    e.q_plus.push_back(expectation(w.f_plus(), q));
    e.q_minus.push_back(expectation(w.f_minus(), q));
  }
  return e;
}

std::size_t argmax_index(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double gamma_objective(const ProblemInstance& instance, const WeightPair& w) {
  const auto r = rate_set(instance, w, w);
  return r.gamma0 * r.gamma1;
}

double c_objective(const ProblemInstance& instance, const WeightPair& w) {
  const auto r = rate_set(instance, w, w);
  return r.c0 * r.c1;
}

ExponentSolution solve_gamma(const ProblemInstance& instance, const SolverOptions& opts) {
  auto sol = bisect_weights(instance, opts, gamma_system, gamma_objective);
  if (sol.unbounded) return sol;
  const auto e = vertex_expectations(instance, *sol.witness_weights);
  const double slack = std::max(sol.tolerance_achieved, 1e-9 * std::max(1.0, sol.value));
  double best = kInf;
  for (std::size_t i = 0; i < e.p_plus.size(); ++i) {
    for (std::size_t j = 0; j < e.q_plus.size(); ++j) {
      best = std::min(best, safe_ratio(e.q_plus[j] * e.p_minus[i], e.q_minus[j] * e.p_plus[i]));
    }
  }
  for (std::size_t i = 0; i < e.p_plus.size(); ++i) {
    for (std::size_t j = 0; j < e.q_plus.size(); ++j) {
      const double v = safe_ratio(e.q_plus[j] * e.p_minus[i], e.q_minus[j] * e.p_plus[i]);
      if (v <= best + slack) sol.certificate.push_back({i, j, i, j});
    }
  }
  return sol;
}

ExponentSolution solve_C(const ProblemInstance& instance, const SolverOptions& opts) {
  auto sol = bisect_weights(instance, opts, c_system, c_objective);
  if (sol.unbounded) return sol;
  const auto e = vertex_expectations(instance, *sol.witness_weights);
  const std::size_t pk = argmax_index(e.p_plus);
  const std::size_t ql = argmax_index(e.q_minus);
  const double slack = std::max(sol.tolerance_achieved, 1e-9 * std::max(1.0, sol.value));
  std::vector<double> per_i(e.p_minus.size());
  std::vector<double> per_j(e.q_plus.size());
  const double min_pm = *std::min_element(e.p_minus.begin(), e.p_minus.end());
  const double min_qp = *std::min_element(e.q_plus.begin(), e.q_plus.end());
  const double best = safe_ratio(min_qp * min_pm, e.q_minus[ql] * e.p_plus[pk]);
  for (std::size_t i = 0; i < e.p_minus.size(); ++i) {
    for (std::size_t j = 0; j < e.q_plus.size(); ++j) {
      const double v = safe_ratio(e.q_plus[j] * e.p_minus[i], e.q_minus[ql] * e.p_plus[pk]);
      if (v <= best + slack) sol.certificate.push_back({i, j, pk, ql});
    }
  }
  return sol;
}

namespace {

// gamma_bar <= t  <=>  exists r = sum_v lambda_v v (lambda >= 0, so r = a p with
// a = sum lambda and p in P0) and q in P1 with q <= r <= t q letterwise.
LinearFeasibilityProblem cone_system(const ProblemInstance& inst, double t) {
  const std::size_t n = inst.num_letters();
  const std::size_t k0 = inst.p0.num_vertices();
  const std::size_t k1 = inst.p1.num_vertices();
  LinearFeasibilityProblem lp(k0 + k1);
  auto s1 = zeros(k0 + k1);
  for (std::size_t v = 0; v < k1; ++v) s1[k0 + v] = 1.0;
  lp.add_eq(std::move(s1), 1.0);
  for (std::size_t x = 0; x < n; ++x) {
    auto lower = zeros(k0 + k1);
    auto upper = zeros(k0 + k1);
    for (std::size_t v = 0; v < k0; ++v) {
      lower[v] = inst.p0.vertex(v)[x];
      upper[v] = -inst.p0.vertex(v)[x];
    }
    for (std::size_t v = 0; v < k1; ++v) {
      lower[k0 + v] = -inst.p1.vertex(v)[x];
      upper[k0 + v] = t * inst.p1.vertex(v)[x];
    }
    lp.add_ge(std::move(lower), 0.0);
    lp.add_ge(std::move(upper), 0.0);
  }
  return lp;
}

// Normalizes the cone weights back to a pair (p, q).
std::pair<Distribution, Distribution> pair_from_cone(const ProblemInstance& inst, const std::vector<double>& z) {
  const std::size_t k0 = inst.p0.num_vertices();
  std::vector<double> lam(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k0));
  double total = 0.0;
  for (double v : lam) total += v;
  if (!(total > 0.0)) lam.assign(k0, 1.0);
  std::span<const double> all(z);
  return {inst.p0.combine(lam), inst.p1.combine(all.subspan(k0, inst.p1.num_vertices()))};
}

// min over one polytope of gamma_hc with the other argument fixed.
// `free_is_p` selects which side moves. Returns the improved point and value.
std::pair<Distribution, double> block_minimize(const DistributionPolytope& poly, const Distribution& fixed,
                                               bool free_is_p, const Distribution& start, double rel_tol) {
  const std::size_t n = fixed.size();
  const std::size_t k = poly.num_vertices();
  auto hc = [&](const Distribution& d) { return free_is_p ? gamma_hc(d, fixed) : gamma_hc(fixed, d); };
  Distribution best = start;
  double hi = hc(start);
  if (std::isinf(hi)) hi = 1e12;
  double lo = 1.0;
  auto system = [&](double t) {
    LinearFeasibilityProblem lp(k);
    lp.add_eq(std::vector<double>(k, 1.0), 1.0);
    // For every letter pair: q(x+) p(x-) <= t q(x-) p(x+).
    for (std::size_t xp = 0; xp < n; ++xp) {
      for (std::size_t xm = 0; xm < n; ++xm) {
        if (xp == xm) continue;
        auto a = zeros(k);
        for (std::size_t v = 0; v < k; ++v) {
          const auto& d = poly.vertex(v);
          if (free_is_p) {
            a[v] = t * fixed[xm] * d[xp] - fixed[xp] * d[xm];
          } else {
            a[v] = t * d[xm] * fixed[xp] - d[xp] * fixed[xm];
          }
        }
        lp.add_ge(std::move(a), 0.0);
      }
    }
    return lp_feasible(lp);
  };
  double best_value = hc(best);
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    auto r = system(mid);
    if (r.feasible) {
      hi = mid;
      Distribution d = poly.combine(r.point);
      const double v = hc(d);
      if (v < best_value) {
        best_value = v;
        best = d;
      }
    } else {
      lo = mid;
    }
  }
  return {best, best_value};
}

}  // namespace

ExponentSolution solve_gamma_bar(const ProblemInstance& instance, const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
  ExponentSolution sol;
  const auto& P0 = instance.p0;
  const auto& P1 = instance.p1;

  // Incumbent from vertex pairs.
  double U = kInf;
  std::optional<std::pair<Distribution, Distribution>> best_pair;
  auto offer = [&](const Distribution& p, const Distribution& q) {
    const double v = gamma_hc(p, q);
    if (v < U) {
      U = v;
      best_pair.emplace(p, q);
    }
  };
  for (const auto& p : P0.vertices()) {
    for (const auto& q : P1.vertices()) offer(p, q);
  }
  if (std::isinf(U)) {
    auto probe = lp_feasible(cone_system(instance, kUnboundedProbe));
    ++sol.iterations;
    if (!probe.feasible) {
      sol.unbounded = true;
      sol.value = kInf;
      sol.witness_pair = best_pair;
      return sol;
    }
    auto [p, q] = pair_from_cone(instance, probe.point);
    offer(p, q);
  }

  // Multistart alternating block descent.
  std::mt19937_64 rng(opts.seed);
  std::exponential_distribution<double> expo(1.0);
  auto random_point = [&](const DistributionPolytope& poly) {
    std::vector<double> w(poly.num_vertices());
    for (double& v : w) v = expo(rng);
    return poly.combine(w);
  };
  for (int s = 0; s < opts.starts; ++s) {
    Distribution q = s == 0 ? best_pair->second : random_point(P1);
    Distribution p = s == 0 ? best_pair->first : random_point(P0);
    double current = gamma_hc(p, q);
    for (int round = 0; round < 8; ++round) {
      ++sol.iterations;
      auto [p2, v1] = block_minimize(P0, q, true, p, opts.tol * 1e-2);
      auto [q2, v2] = block_minimize(P1, p2, false, q, opts.tol * 1e-2);
      p = p2;
      q = q2;
      offer(p, q);
      if (!(v2 < current - opts.tol)) break;
      current = v2;
    }
  }

  // Certified bisection on the cone program between 1 and the incumbent.
  double lo = 1.0;
  double hi = U;
  while (hi - lo > opts.tol) {
    if (++sol.iterations > opts.max_iters) {
      throw SolverError("bisection did not converge", U, U - lo);
    }
    const double mid = 0.5 * (lo + hi);
    auto r = lp_feasible(cone_system(instance, mid));
    if (r.feasible) {
      hi = mid;
      auto [p, q] = pair_from_cone(instance, r.point);
      offer(p, q);
    } else {
      lo = mid;
    }
  }
  const double lower = lo;

  sol.value = U;
  sol.witness_pair = best_pair;
  sol.tolerance_achieved = std::max(0.0, U - lower);
  return sol;
}

MinimaxReport verify_minimax(const ProblemInstance& instance, double tol, const SolverOptions& opts) {
  MinimaxReport r;
  r.gamma_solution = solve_gamma(instance, opts);
  r.gamma_bar_solution = solve_gamma_bar(instance, opts);
  r.gamma = r.gamma_solution.value;
  r.gamma_bar = r.gamma_bar_solution.value;
  r.allowed = tol + r.gamma_solution.tolerance_achieved + r.gamma_bar_solution.tolerance_achieved;
  if (std::isinf(r.gamma) && std::isinf(r.gamma_bar)) {
    r.gap = 0.0;
  } else {
    r.gap = std::abs(r.gamma - r.gamma_bar);
  }
  r.order_violation = r.gamma > r.gamma_bar + r.allowed;
  r.pass = r.gap <= r.allowed && !r.order_violation;
  return r;
}

ProblemInstance random_instance(std::size_t letters, std::size_t max_vertices, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<std::size_t> count(1, max_vertices);
  auto poly = [&]() {
    const std::size_t k = count(rng);
    std::vector<Distribution> vs;
    while (vs.size() < k) {
      std::vector<double> w(letters);
      double total = 0.0;
      for (double& v : w) total += (v = expo(rng));
      for (double& v : w) v /= total;
      Distribution d(std::move(w));
      bool dup = false;
      for (const auto& o : vs) dup = dup || linf_distance(o.probs(), d.probs()) < 1e-9;
      if (!dup) vs.push_back(std::move(d));
    }
    return DistributionPolytope(std::move(vs));
  };
  auto p0 = poly();
  auto p1 = poly();
  return ProblemInstance(Alphabet::numbered(letters), std::move(p0), std::move(p1));
}

nlohmann::json to_json(const ExponentSolution& s) {
  nlohmann::json j;
  j["value"] = s.unbounded ? nlohmann::json("inf") : nlohmann::json(s.value);
  j["unbounded"] = s.unbounded;
  j["tolerance_achieved"] = s.tolerance_achieved;
  j["iterations"] = s.iterations;
  if (s.witness_weights) {
    j["witness_weights"] = to_json(*s.witness_weights);
    j["witness_normalized"] = to_json(normalize_weight_pair(*s.witness_weights));
  }
  if (s.witness_pair) {
    j["witness_pair"] = {{"p", s.witness_pair->first.vector()}, {"q", s.witness_pair->second.vector()}};
  }
  nlohmann::json cert = nlohmann::json::array();
  for (const auto& c : s.certificate) {
    cert.push_back({{"p", c.p}, {"q", c.q}, {"p_alt", c.p_alt}, {"q_alt", c.q_alt}});
  }
  j["certificate"] = cert;
  return j;
}

nlohmann::json to_json(const MinimaxReport& r) {
  return nlohmann::json{{"gamma", r.gamma_solution.unbounded ? nlohmann::json("inf") : nlohmann::json(r.gamma)},
                        {"gamma_bar", r.gamma_bar_solution.unbounded ? nlohmann::json("inf") : nlohmann::json(r.gamma_bar)},
                        {"gap", r.gap},
                        {"allowed", r.allowed},
                        {"pass", r.pass},
                        {"order_violation", r.order_violation},
                        {"gamma_solution", to_json(r.gamma_solution)},
                        {"gamma_bar_solution", to_json(r.gamma_bar_solution)}};
}

}  // namespace advht
