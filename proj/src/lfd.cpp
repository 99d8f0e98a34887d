#include "advht/lfd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "advht/exponents.hpp"
#include "advht/lp.hpp"

namespace advht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool tied(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double mass(const Distribution& d, const std::vector<std::size_t>& letters) {
  double s = 0.0;
  for (auto x : letters) s += d[x];
  return s;
}

std::string letters_text(const ProblemInstance& inst, const std::vector<std::size_t>& set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += inst.alphabet[set[i]];
  }
  return out + "}";
}

struct Band {
  double lo, hi, eta;
};

std::vector<Band> bands(const RatioSets& sets, double tie_tol) {
  std::vector<double> v = sets.ratios;
  std::sort(v.begin(), v.end());
  std::vector<double> distinct;
  for (double r : v) {
    if (distinct.empty() || !tied(distinct.back(), r, tie_tol)) distinct.push_back(r);
  }
  std::vector<Band> out;
  if (distinct.front() > 0.0) {
    const double top = distinct.front();
    out.push_back({0.0, top, std::isinf(top) ? 1.0 : 0.5 * top});
  }
  for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
    const double a = distinct[k];
    const double b = distinct[k + 1];
    if (std::isinf(b)) {
      out.push_back({a, b, a > 0.0 ? 2.0 * a : a + 1.0});
    } else {
      out.push_back({a, b, 0.5 * (a + b)});
    }
  }
  return out;
}

void require_member(const Distribution& d, const DistributionPolytope& poly, const char* name) {
  const auto m = member_of(d.probs(), poly);
  if (!m.member) {
    std::ostringstream os;
    os << name << " is not a member of its polytope (L-inf distance " << m.distance << ")";
    throw ValidationError(os.str());
  }
}

std::vector<ThresholdViolation> tail_check(const Distribution& p_star, const Distribution& q_star,
                                           const ProblemInstance& inst, const std::vector<double>& ratios,
                                           const Band& band) {
  std::vector<ThresholdViolation> out;
  std::vector<std::size_t> event;
  for (std::size_t x = 0; x < ratios.size(); ++x) {
    if (ratios[x] > band.eta) event.push_back(x);
  }
  const double p_ref = mass(p_star, event);
  const double q_ref = mass(q_star, event);
  for (std::size_t v = 0; v < inst.p0.num_vertices(); ++v) {
    const double m = mass(inst.p0.vertex(v), event);
    if (m > p_ref + kLfdInequalityTol) out.push_back({band.lo, band.hi, band.eta, 0, v, m, p_ref, event});
  }
  for (std::size_t v = 0; v < inst.p1.num_vertices(); ++v) {
    const double m = mass(inst.p1.vertex(v), event);
    if (m < q_ref - kLfdInequalityTol) out.push_back({band.lo, band.hi, band.eta, 1, v, m, q_ref, event});
  }
  return out;
}

std::optional<std::string> weak_check(const Distribution& p_star, const Distribution& q_star,
                                      const ProblemInstance& inst, const RatioSets& sets) {
  const double pp = mass(p_star, sets.x_plus);
  const double pm = mass(p_star, sets.x_minus);
  const double qp = mass(q_star, sets.x_plus);
  const double qm = mass(q_star, sets.x_minus);
  const std::string xp = letters_text(inst, sets.x_plus);
  const std::string xm = letters_text(inst, sets.x_minus);
  std::ostringstream os;
  os.precision(12);
  for (std::size_t v = 0; v < inst.p0.num_vertices(); ++v) {
    const auto& p = inst.p0.vertex(v);
    if (mass(p, sets.x_plus) > pp + kLfdInequalityTol) {
      os << "P0 vertex " << v << ": p(X+=" << xp << ") = " << mass(p, sets.x_plus) << " > p*(X+) = " << pp;
      return os.str();
    }
    if (mass(p, sets.x_minus) < pm - kLfdInequalityTol) {
      os << "P0 vertex " << v << ": p(X-=" << xm << ") = " << mass(p, sets.x_minus) << " < p*(X-) = " << pm;
      return os.str();
    }
  }
  for (std::size_t v = 0; v < inst.p1.num_vertices(); ++v) {
    const auto& q = inst.p1.vertex(v);
    if (mass(q, sets.x_plus) < qp - kLfdInequalityTol) {
      os << "P1 vertex " << v << ": q(X+=" << xp << ") = " << mass(q, sets.x_plus) << " < q*(X+) = " << qp;
      return os.str();
    }
    if (mass(q, sets.x_minus) > qm + kLfdInequalityTol) {
      os << "P1 vertex " << v << ": q(X-=" << xm << ") = " << mass(q, sets.x_minus) << " > q*(X-) = " << qm;
      return os.str();
    }
  }
  return std::nullopt;
}

std::string describe(const ThresholdViolation& v, const ProblemInstance& inst) {
  std::ostringstream os;
  os.precision(12);
  os << "eta = " << v.eta << " in (" << v.eta_lo << ", " << v.eta_hi << "), event " << letters_text(inst, v.event)
     << ": P" << v.hypothesis << " vertex " << v.vertex << " has mass " << v.lhs
     << (v.hypothesis == 0 ? " > " : " < ") << v.rhs;
  return os.str();
}

LfdReport analyze(const Distribution& p_star, const Distribution& q_star, const ProblemInstance& inst,
                  double tie_tol) {
  if (p_star.size() != inst.num_letters() || q_star.size() != inst.num_letters()) {
    throw ValidationError("candidate dimension differs from alphabet size");
  }
  require_member(p_star, inst.p0, "p*");
  require_member(q_star, inst.p1, "q*");
  LfdReport r;
  r.sets = argmax_ratio_sets(p_star, q_star, tie_tol);
  r.weak_violation = weak_check(p_star, q_star, inst, r.sets);
  r.is_weak = !r.weak_violation.has_value();
  for (const auto& b : bands(r.sets, tie_tol)) {
    r.thresholds_tested.push_back(b.eta);
    auto v = tail_check(p_star, q_star, inst, r.sets.ratios, b);
    r.threshold_violations.insert(r.threshold_violations.end(), v.begin(), v.end());
  }
  r.is_strong = r.threshold_violations.empty();
  if (!r.is_strong) r.strong_violation = describe(r.threshold_violations.front(), inst);
  return r;
}

}  // namespace

RatioSets argmax_ratio_sets(const Distribution& p_star, const Distribution& q_star, double tie_tol) {
  if (p_star.size() != q_star.size()) throw ValidationError("dimension mismatch in ratio sets");
  RatioSets s;
  s.ratios.resize(p_star.size());
  double hi = -kInf;
  double lo = kInf;
  for (std::size_t x = 0; x < p_star.size(); ++x) {
    s.ratios[x] = safe_ratio(q_star[x], p_star[x]);
    hi = std::max(hi, s.ratios[x]);
    lo = std::min(lo, s.ratios[x]);
  }
  for (std::size_t x = 0; x < p_star.size(); ++x) {
    if (tied(s.ratios[x], hi, tie_tol)) s.x_plus.push_back(x);
    if (tied(s.ratios[x], lo, tie_tol)) s.x_minus.push_back(x);
  }
  s.degenerate = tied(hi, lo, tie_tol);
  return s;
}

LfdReport is_weak_lfd(const Distribution& p_star, const Distribution& q_star, const ProblemInstance& instance,
                      double tie_tol) {
  return analyze(p_star, q_star, instance, tie_tol);
}

LfdReport is_strong_lfd(const Distribution& p_star, const Distribution& q_star, const ProblemInstance& instance,
                        double tie_tol) {
  return analyze(p_star, q_star, instance, tie_tol);
}

std::vector<ThresholdViolation> check_threshold(const Distribution& p_star, const Distribution& q_star,
                                                const ProblemInstance& instance, double eta) {
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  std::vector<double> ratios(p_star.size());
  for (std::size_t x = 0; x < ratios.size(); ++x) ratios[x] = safe_ratio(q_star[x], p_star[x]);
  return tail_check(p_star, q_star, instance, ratios, {eta, eta, eta});
}

std::vector<double> strong_thresholds(const RatioSets& sets, double tie_tol) {
  std::vector<double> out;
  for (const auto& b : bands(sets, tie_tol)) out.push_back(b.eta);
  return out;
}

double weak_lfd_pe(const Distribution& p_star, const Distribution& q_star, int S) {
  return hellman_pe(gamma_hc(p_star, q_star), S);
}

LfdScanResult scan_weak_lfd(const ProblemInstance& instance, int grid, std::uint64_t seed) {
  LfdScanResult res;
  std::vector<Distribution> c0(instance.p0.vertices());
  std::vector<Distribution> c1(instance.p1.vertices());
  std::mt19937_64 rng(seed);
  auto segments = [&](const DistributionPolytope& poly, std::vector<Distribution>& out) {
    for (std::size_t i = 0; i < poly.num_vertices(); ++i) {
      for (std::size_t j = i + 1; j < poly.num_vertices(); ++j) {
        std::uniform_real_distribution<double> jitter(0.0, 1.0 / grid);
        for (int k = 0; k < grid; ++k) {
          const double t = std::min(1.0, static_cast<double>(k) / grid + jitter(rng));
          out.push_back(Distribution::mix(poly.vertex(i), poly.vertex(j), t));
        }
      }
    }
  };
  segments(instance.p0, c0);
  segments(instance.p1, c1);
  for (const auto& p : c0) {
    for (const auto& q : c1) {
      ++res.candidates_tried;
      const auto sets = argmax_ratio_sets(p, q);
      if (sets.degenerate) continue;
      if (!weak_check(p, q, instance, sets)) {
        res.pair.emplace(p, q);
        return res;
      }
    }
  }
  return res;
}

nlohmann::json to_json(const LfdReport& r) {
  auto ratio_json = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
  nlohmann::json ratios = nlohmann::json::array();
  for (double v : r.sets.ratios) ratios.push_back(ratio_json(v));
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : r.threshold_violations) {
    viol.push_back({{"eta", v.eta},
                    {"eta_lo", ratio_json(v.eta_lo)},
                    {"eta_hi", ratio_json(v.eta_hi)},
                    {"hypothesis", v.hypothesis},
                    {"vertex", v.vertex},
                    {"vertex_mass", v.lhs},
                    {"candidate_mass", v.rhs},
                    {"event", v.event}});
  }
  nlohmann::json j{{"is_weak", r.is_weak},
                   {"is_strong", r.is_strong},
                   {"x_plus", r.sets.x_plus},
                   {"x_minus", r.sets.x_minus},
                   {"ratios", ratios},
                   {"degenerate", r.sets.degenerate},
                   {"thresholds_tested", r.thresholds_tested},
                   {"threshold_violations", viol}};
  j["weak_violation"] = r.weak_violation ? nlohmann::json(*r.weak_violation) : nlohmann::json(nullptr);
  j["strong_violation"] = r.strong_violation ? nlohmann::json(*r.strong_violation) : nlohmann::json(nullptr);
  return j;
}

}  // namespace advht
