#include "advht/fsm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace advht {

namespace {

constexpr double kRowTol = 1e-12;

// Birth-death kernel from per-(s, x) right/left move probabilities.
template <class Right, class Left>
std::vector<double> birth_death_kernel(int S, std::size_t n, Right right, Left left) {
  std::vector<double> k(static_cast<std::size_t>(S) * n * static_cast<std::size_t>(S), 0.0);
  auto at = [&](int s, std::size_t x, int t) -> double& {
    return k[(static_cast<std::size_t>(s) * n + x) * static_cast<std::size_t>(S) + static_cast<std::size_t>(t)];
  };
  for (int s = 0; s < S; ++s) {
    for (std::size_t x = 0; x < n; ++x) {
      const double r = s + 1 < S ? right(s, x) : 0.0;
      const double l = s > 0 ? left(s, x) : 0.0;
      const double stay = 1.0 - r - l;
      if (r < 0.0 || l < 0.0 || stay < -kRowTol) {
        std::ostringstream os;
        os.precision(17);
        os << "invalid move probabilities at state " << s << ", letter " << x << ": right " << r << ", left " << l;
        throw ValidationError(os.str());
      }
      if (s + 1 < S) at(s, x, s + 1) = r;
      if (s > 0) at(s, x, s - 1) = l;
      at(s, x, s) = std::max(0.0, stay);
    }
  }
  return k;
}

const char* kind_name(FsmKind k) {
  switch (k) {
    case FsmKind::kAdversarial: return "adversarial";
    case FsmKind::kHellmanCover: return "hellman_cover";
    case FsmKind::kCustom: return "custom";
  }
  return "custom";
}

FsmKind kind_from(const std::string& s) {
  if (s == "adversarial") return FsmKind::kAdversarial;
  if (s == "hellman_cover") return FsmKind::kHellmanCover;
  return FsmKind::kCustom;
}

}  // namespace

DetectorFSM::DetectorFSM(int S, std::size_t letters, std::vector<double> kernel, std::vector<int> decision,
                         int initial_state, FsmParams params)
    : S_(S), letters_(letters), kernel_(std::move(kernel)), decision_(std::move(decision)), initial_(initial_state),
      params_(std::move(params)) {
  if (S_ < 2) throw ValidationError("an FSM needs at least 2 states");
  if (letters_ < 1) throw ValidationError("an FSM needs at least one letter");
  const std::size_t expect = static_cast<std::size_t>(S_) * letters_ * static_cast<std::size_t>(S_);
  if (kernel_.size() != expect) {
    throw ValidationError("kernel has " + std::to_string(kernel_.size()) + " entries, expected " + std::to_string(expect));
  }
  if (decision_.size() != static_cast<std::size_t>(S_)) throw ValidationError("decision map length differs from S");
  for (int d : decision_) {
    if (d != 0 && d != 1) throw ValidationError("decisions must be 0 or 1");
  }
  if (initial_ < 0 || initial_ >= S_) throw ValidationError("initial state out of range");
  for (int s = 0; s < S_; ++s) {
    for (std::size_t x = 0; x < letters_; ++x) {
      double sum = 0.0;
      for (int t = 0; t < S_; ++t) {
        const double v = prob(s, x, t);
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("negative or non-finite kernel entry at (" + std::to_string(s) + ", " +
                                std::to_string(x) + ", " + std::to_string(t) + ")");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowTol) {
        std::ostringstream os;
        os.precision(17);
        os << "kernel row (" << s << ", " << x << ") sums to " << sum;
        throw ValidationError(os.str());
      }
    }
  }
}

bool DetectorFSM::is_birth_death() const {
  for (int s = 0; s < S_; ++s) {
    for (std::size_t x = 0; x < letters_; ++x) {
      for (int t = 0; t < S_; ++t) {
        if (std::abs(t - s) > 1 && prob(s, x, t) != 0.0) return false;
      }
    }
  }
  return true;
}

std::vector<int> threshold_decisions(int S) {
  std::vector<int> d(static_cast<std::size_t>(S));
  const int half = (S + 1) / 2;  // ceil(S/2) states decide 0
  for (int s = 0; s < S; ++s) d[static_cast<std::size_t>(s)] = s < half ? 0 : 1;
  d.back() = 1;
  d.front() = 0;
  return d;
}

int centered_initial_state(int S) { return (S + 1) / 2 - 1; }

double default_kappa(const FsmRateSet& r, int S) {
  const double e = static_cast<double>(S - 2);
  return std::sqrt((r.c1 * std::pow(r.gamma1, e)) / (r.c0 * std::pow(r.gamma0, e)));
}

DetectorFSM build_adversarial_fsm(int S, const WeightPair& w_gamma, const WeightPair& w_c, double delta,
                                  std::optional<double> kappa, double eta, const ProblemInstance& instance) {
  if (S < 3) throw ValidationError("the adversarial machine needs S >= 3");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  if (!(eta >= 0.0 && eta < 0.5)) throw ValidationError("eta must lie in [0, 1/2)");
  if (kappa && !(*kappa > 0.0)) throw ValidationError("kappa must be positive");
  const std::size_t n = instance.num_letters();
  if (w_gamma.size() != n || w_c.size() != n) throw ValidationError("weight length differs from alphabet size");

  WeightPair fg = w_gamma.floored(eta);
  WeightPair fc = w_c.simplex_normalized() ? w_c.scaled_to_unit_peak() : w_c;
  const FsmRateSet rates = rate_set(instance, fg, fc);
  const double k = kappa ? *kappa : default_kappa(rates, S);
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ValidationError("default kappa is not a positive finite number (degenerate rates)");
  }
  double max_cm = 0.0;
  for (double v : fc.f_minus()) max_cm = std::max(max_cm, v);
  if (k * delta * max_cm > 1.0 + kRowTol) {
    std::ostringstream os;
    os << "kappa * delta * max f_C- = " << k * delta * max_cm << " exceeds 1";
    throw ValidationError(os.str());
  }

  auto kernel = birth_death_kernel(
      S, n,
      [&](int s, std::size_t x) { return s == 0 ? delta * fc.f_plus()[x] : fg.f_plus()[x]; },
      [&](int s, std::size_t x) { return s == S - 1 ? k * delta * fc.f_minus()[x] : fg.f_minus()[x]; });

  FsmParams params;
  params.kind = FsmKind::kAdversarial;
  params.delta = delta;
  params.kappa = k;
  params.eta = eta;
  params.w_gamma = w_gamma;
  params.w_gamma_floored = fg;
  params.w_c = fc;
  params.rates = rates;
  return DetectorFSM(S, n, std::move(kernel), threshold_decisions(S), centered_initial_state(S), std::move(params));
}

double hellman_kappa(const Distribution& p, const Distribution& q, std::size_t x_plus, std::size_t x_minus, int S) {
  const double base = (q[x_plus] * p[x_plus]) / (q[x_minus] * p[x_minus]);
  return std::pow(base, 0.5 * static_cast<double>(S - 1));
}

DetectorFSM build_hellman_counter(const Distribution& p, const Distribution& q, int S, double delta,
                                  std::optional<double> kappa) {
  if (S < 2) throw ValidationError("the counter needs S >= 2");
  if (p.size() != q.size()) throw ValidationError("dimension mismatch between p and q");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  const std::size_t n = p.size();
  double best_plus = -1.0;
  double best_minus = -1.0;
  std::size_t xp = 0;
  std::size_t xm = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const double up = safe_ratio(q[x], p[x]);
    const double dn = safe_ratio(p[x], q[x]);
    if (up > best_plus) {
      best_plus = up;
      xp = x;
    }
    if (dn > best_minus) {
      best_minus = dn;
      xm = x;
    }
  }
  if (std::isinf(best_plus) || std::isinf(best_minus)) {
    throw ValidationError("likelihood ratio is infinite on the extreme letter; the counter is undefined");
  }
  const bool identical = std::abs(best_plus * best_minus - 1.0) <= 1e-12;
  if (xp == xm) {
    // Only possible when the ratio is constant: take the next letter.
    xm = xp + 1 < n ? xp + 1 : 0;
  }
  const double k = kappa ? *kappa : (identical ? 1.0 : hellman_kappa(p, q, xp, xm, S));
  if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("kappa must be positive and finite");
  if (k * delta > 1.0 + kRowTol) {
    std::ostringstream os;
    os << "kappa * delta = " << k * delta << " exceeds 1";
    throw ValidationError(os.str());
  }
  auto kernel = birth_death_kernel(
      S, n,
      [&](int s, std::size_t x) { return x == xp ? (s == 0 ? delta : 1.0) : 0.0; },
      [&](int s, std::size_t x) { return x == xm ? (s == S - 1 ? k * delta : 1.0) : 0.0; });
  FsmParams params;
  params.kind = FsmKind::kHellmanCover;
  params.delta = delta;
  params.kappa = k;
  params.x_plus = xp;
  params.x_minus = xm;
  return DetectorFSM(S, n, std::move(kernel), threshold_decisions(S), centered_initial_state(S), std::move(params));
}

std::vector<double> step_distribution(const DetectorFSM& fsm, int s, const Distribution& p) {
  if (s < 0 || s >= fsm.num_states()) throw ValidationError("state out of range");
  if (p.size() != fsm.num_letters()) throw ValidationError("distribution length differs from FSM alphabet");
  std::vector<double> out(static_cast<std::size_t>(fsm.num_states()), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    auto r = fsm.row(s, x);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += p[x] * r[t];
  }
  return out;
}

nlohmann::json fsm_to_json(const DetectorFSM& fsm) {
  const int S = fsm.num_states();
  nlohmann::json kernel = nlohmann::json::array();
  for (int s = 0; s < S; ++s) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t x = 0; x < fsm.num_letters(); ++x) {
      auto r = fsm.row(s, x);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    kernel.push_back(rows);
  }
  const auto& P = fsm.params();
  nlohmann::json params{{"kind", kind_name(P.kind)}, {"delta", P.delta}, {"kappa", P.kappa}, {"eta", P.eta}};
  if (P.w_gamma) params["w_gamma"] = to_json(*P.w_gamma);
  if (P.w_gamma_floored) params["w_gamma_floored"] = to_json(*P.w_gamma_floored);
  if (P.w_c) params["w_c"] = to_json(*P.w_c);
  if (P.rates) params["rates"] = to_json(*P.rates);
  if (P.kind == FsmKind::kHellmanCover) {
    params["x_plus"] = P.x_plus;
    params["x_minus"] = P.x_minus;
  }
  return nlohmann::json{{"S", S},
                        {"kernel", kernel},
                        {"decision", fsm.decisions()},
                        {"initial_state", fsm.initial_state()},
                        {"params", params}};
}

DetectorFSM fsm_from_json(const nlohmann::json& doc) {
  try {
    const int S = doc.at("S").get<int>();
    const auto& k = doc.at("kernel");
    if (!k.is_array() || k.size() != static_cast<std::size_t>(S)) throw ParseError("kernel must have S blocks");
    const std::size_t n = k.at(0).size();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(S) * n * static_cast<std::size_t>(S));
    for (const auto& block : k) {
      if (block.size() != n) throw ParseError("kernel blocks differ in letter count");
      for (const auto& row : block) {
        if (row.size() != static_cast<std::size_t>(S)) throw ParseError("kernel rows must have S entries");
        for (const auto& v : row) flat.push_back(parse_probability(v));
      }
    }
    FsmParams params;
    if (doc.contains("params")) {
      const auto& p = doc.at("params");
      params.kind = kind_from(p.value("kind", std::string("custom")));
      params.delta = p.value("delta", 0.0);
      params.kappa = p.value("kappa", 0.0);
      params.eta = p.value("eta", 0.0);
      if (p.contains("w_gamma")) params.w_gamma = weight_pair_from_json(p.at("w_gamma"));
      if (p.contains("w_gamma_floored")) params.w_gamma_floored = weight_pair_from_json(p.at("w_gamma_floored"));
      if (p.contains("w_c")) params.w_c = weight_pair_from_json(p.at("w_c"));
      if (p.contains("rates")) {
        const auto& r = p.at("rates");
        FsmRateSet rs;
        rs.gamma0 = r.at("gamma0").get<double>();
        rs.gamma1 = r.at("gamma1").get<double>();
        rs.c0 = r.at("c0").get<double>();
        rs.c1 = r.at("c1").get<double>();
        rs.rho0_plus = r.at("rho0_plus").get<double>();
        rs.rho0_minus = r.at("rho0_minus").get<double>();
        rs.rho1_plus = r.at("rho1_plus").get<double>();
        rs.rho1_minus = r.at("rho1_minus").get<double>();
        rs.degenerate = r.value("degenerate", false);
        params.rates = rs;
      }
      params.x_plus = p.value("x_plus", std::size_t{0});
      params.x_minus = p.value("x_minus", std::size_t{0});
    }
    return DetectorFSM(S, n, std::move(flat), doc.at("decision").get<std::vector<int>>(),
                       doc.at("initial_state").get<int>(), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed FSM document: ") + e.what());
  }
}

DetectorFSM load_fsm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open FSM file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return fsm_from_json(doc);
}

}  // namespace advht
