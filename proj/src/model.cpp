#include "advht/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace advht {

namespace {

std::string describe(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ')';
  return os.str();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\n\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number_text(std::string_view raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw ParseError("empty numeric entry");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t num = 0;
    std::int64_t den = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto r1 = std::from_chars(first, first + slash, num);
    auto r2 = std::from_chars(first + slash + 1, last, den);
    if (r1.ec != std::errc{} || r1.ptr != first + slash || r2.ec != std::errc{} || r2.ptr != last) {
      throw ParseError("malformed rational '" + text + "'");
    }
    if (den == 0) throw ParseError("zero denominator in '" + text + "'");
    constexpr std::int64_t kExact = std::int64_t{1} << 53;
    if (std::llabs(num) > kExact || std::llabs(den) > kExact) {
      throw ParseError("rational component too large for exact conversion: '" + text + "'");
    }
    return static_cast<double>(num) / static_cast<double>(den);
  }
  double value = 0.0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw ParseError("malformed number '" + text + "'");
  }
  return value;
}

}  // namespace

double safe_ratio(double numerator, double denominator) noexcept {
  if (denominator == 0.0) {
    return numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return numerator / denominator;
}

Alphabet::Alphabet(std::vector<std::string> letters) : letters_(std::move(letters)) {
  if (letters_.size() < 2) throw ValidationError("alphabet must have at least 2 letters");
  std::set<std::string> seen;
  for (const auto& l : letters_) {
    if (l.empty()) throw ValidationError("alphabet letters must be non-empty");
    if (!seen.insert(l).second) throw ValidationError("duplicate alphabet letter '" + l + "'");
  }
}

Alphabet Alphabet::numbered(std::size_t n) {
  std::vector<std::string> letters;
  for (std::size_t i = 1; i <= n; ++i) letters.push_back(std::to_string(i));
  return Alphabet(std::move(letters));
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("distribution must be non-empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("negative or non-finite probability at index " + std::to_string(i) +
                            " in " + describe(probs_));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << sum << " (not 1) in " << describe(probs_);
    throw ValidationError(os.str());
  }
  if (sum != 1.0) {
    for (double& p : probs_) p /= sum;
  }
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::mix(const Distribution& a, const Distribution& b, double lambda) {
  if (a.size() != b.size()) throw ValidationError("dimension mismatch in mix");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  return Distribution(std::move(out));
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dimension mismatch in distance");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

DistributionPolytope::DistributionPolytope(std::vector<Distribution> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw ValidationError("polytope needs at least one vertex");
  const std::size_t dim = vertices_.front().size();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].size() != dim) {
      throw ValidationError("vertex " + std::to_string(i) + " has dimension " +
                            std::to_string(vertices_[i].size()) + ", expected " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (linf_distance(vertices_[i].probs(), vertices_[j].probs()) < kProbabilityTolerance) {
        throw ValidationError("duplicate vertices " + std::to_string(j) + " and " + std::to_string(i));
      }
    }
  }
}

Distribution DistributionPolytope::combine(std::span<const double> weights) const {
  if (weights.size() != vertices_.size()) throw ValidationError("weight count != vertex count");
  std::vector<double> out(dimension(), 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const double w = std::max(0.0, weights[v]);
    total += w;
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += w * vertices_[v][x];
  }
  if (total <= 0.0) throw ValidationError("convex weights are all zero");
  for (double& p : out) p /= total;
  return Distribution(std::move(out));
}

ProblemInstance::ProblemInstance(Alphabet alphabet_in, DistributionPolytope p0_in,
                                 DistributionPolytope p1_in)
    : alphabet(std::move(alphabet_in)), p0(std::move(p0_in)), p1(std::move(p1_in)) {
  if (p0.dimension() != alphabet.size()) {
    throw ValidationError("P0 vertices have dimension " + std::to_string(p0.dimension()) +
                          " but the alphabet has " + std::to_string(alphabet.size()) + " letters");
  }
  if (p1.dimension() != alphabet.size()) {
    throw ValidationError("P1 vertices have dimension " + std::to_string(p1.dimension()) +
                          " but the alphabet has " + std::to_string(alphabet.size()) + " letters");
  }
}

const DistributionPolytope& ProblemInstance::polytope(int hypothesis) const {
  if (hypothesis == 0) return p0;
  if (hypothesis == 1) return p1;
  throw ValidationError("hypothesis must be 0 or 1");
}

WeightPair::WeightPair(std::vector<double> f_plus, std::vector<double> f_minus)
    : WeightPair(std::move(f_plus), std::move(f_minus), false) {}

WeightPair::WeightPair(std::vector<double> f_plus, std::vector<double> f_minus, bool simplex)
    : f_plus_(std::move(f_plus)), f_minus_(std::move(f_minus)), simplex_normalized_(simplex) {
  if (f_plus_.size() != f_minus_.size()) throw ValidationError("weight components differ in length");
  if (f_plus_.empty()) throw ValidationError("weights must be non-empty");
  bool any = false;
  for (std::size_t x = 0; x < f_plus_.size(); ++x) {
    const double a = f_plus_[x];
    const double b = f_minus_[x];
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
      throw ValidationError("weights must be finite and non-negative (letter " + std::to_string(x) + ")");
    }
    if (!simplex_normalized_ && a + b > 1.0 + kProbabilityTolerance) {
      throw ValidationError("f_plus + f_minus exceeds 1 at letter " + std::to_string(x));
    }
    any = any || a > 0.0 || b > 0.0;
  }
  if (!any) throw ValidationError("weight pair is identically zero");
}

WeightPair WeightPair::from_normalized(std::vector<double> f_plus, std::vector<double> f_minus) {
  return WeightPair(std::move(f_plus), std::move(f_minus), true);
}

WeightPair WeightPair::scaled_to_unit_peak() const {
  double peak = 0.0;
  for (std::size_t x = 0; x < f_plus_.size(); ++x) peak = std::max(peak, f_plus_[x] + f_minus_[x]);
  std::vector<double> fp(f_plus_);
  std::vector<double> fm(f_minus_);
  for (std::size_t x = 0; x < fp.size(); ++x) {
    fp[x] /= peak;
    fm[x] /= peak;
  }
  return WeightPair(std::move(fp), std::move(fm));
}

WeightPair WeightPair::floored(double eta) const {
  if (simplex_normalized_) return scaled_to_unit_peak().floored(eta);
  if (!(eta >= 0.0 && eta < 0.5)) throw ValidationError("eta must lie in [0, 1/2)");
  std::vector<double> fp(f_plus_.size());
  std::vector<double> fm(f_minus_.size());
  for (std::size_t x = 0; x < fp.size(); ++x) {
    fp[x] = (1.0 - 2.0 * eta) * f_plus_[x] + eta;
    fm[x] = (1.0 - 2.0 * eta) * f_minus_[x] + eta;
  }
  return WeightPair(std::move(fp), std::move(fm));
}

WeightPair WeightPair::indicators(std::size_t n, std::size_t x_plus, std::size_t x_minus) {
  if (x_plus >= n || x_minus >= n || x_plus == x_minus) {
    throw ValidationError("indicator letters must be distinct and in range");
  }
  std::vector<double> fp(n, 0.0);
  std::vector<double> fm(n, 0.0);
  fp[x_plus] = 1.0;
  fm[x_minus] = 1.0;
  return WeightPair(std::move(fp), std::move(fm));
}

double expectation(std::span<const double> f, const Distribution& d) {
  if (f.size() != d.size()) {
    throw ValidationError("dimension mismatch: weights have " + std::to_string(f.size()) +
                          " entries, distribution has " + std::to_string(d.size()));
  }
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) s += d[x] * f[x];
  return s;
}

WeightPair normalize_weight_pair(const WeightPair& w) {
  auto scale = [](std::span<const double> f) {
    std::vector<double> out(f.begin(), f.end());
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0.0) {
      for (double& v : out) v /= total;
    }
    return out;
  };
  auto fp = scale(w.f_plus());
  auto fm = scale(w.f_minus());
  return WeightPair::from_normalized(std::move(fp), std::move(fm));
}

double parse_probability(const nlohmann::json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_number_text(value.get<std::string>());
  throw ParseError("probability entries must be numbers or strings, got " + value.dump());
}

namespace {

DistributionPolytope parse_polytope(const nlohmann::json& doc, const char* name) {
  if (!doc.contains(name)) throw ParseError(std::string("missing \"") + name + "\"");
  const auto& block = doc.at(name);
  if (!block.is_object() || !block.contains("vertices") || !block.at("vertices").is_array()) {
    throw ParseError(std::string("\"") + name + "\" must be an object with a \"vertices\" array");
  }
  std::vector<Distribution> vertices;
  std::size_t index = 0;
  for (const auto& v : block.at("vertices")) {
    if (!v.is_array()) throw ParseError(std::string(name) + " vertex must be an array");
    std::vector<double> probs;
    for (const auto& e : v) probs.push_back(parse_probability(e));
    try {
      vertices.emplace_back(std::move(probs));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(name) + " vertex " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  try {
    return DistributionPolytope(std::move(vertices));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

ProblemInstance parse_instance(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");
  if (!doc.contains("alphabet") || !doc.at("alphabet").is_array()) {
    throw ParseError("missing \"alphabet\" array");
  }
  std::vector<std::string> letters;
  for (const auto& l : doc.at("alphabet")) {
    if (!l.is_string()) throw ParseError("alphabet entries must be strings");
    letters.push_back(l.get<std::string>());
  }
  Alphabet alphabet(std::move(letters));
  auto p0 = parse_polytope(doc, "P0");
  auto p1 = parse_polytope(doc, "P1");
  return ProblemInstance(std::move(alphabet), std::move(p0), std::move(p1));
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_instance(doc);
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
  auto poly = [](const DistributionPolytope& p) {
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : p.vertices()) vs.push_back(v.vector());
    return nlohmann::json{{"vertices", vs}};
  };
  return nlohmann::json{{"alphabet", instance.alphabet.letters()},
                        {"P0", poly(instance.p0)},
                        {"P1", poly(instance.p1)}};
}

Distribution parse_distribution_list(std::string_view text) {
  std::vector<double> probs;
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    auto doc = nlohmann::json::parse(body);
    for (const auto& e : doc) probs.push_back(parse_probability(e));
    return Distribution(std::move(probs));
  }
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    const auto piece = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    probs.push_back(parse_number_text(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return Distribution(std::move(probs));
}

nlohmann::json to_json(const WeightPair& w) {
  return nlohmann::json{{"f_plus", std::vector<double>(w.f_plus().begin(), w.f_plus().end())},
                        {"f_minus", std::vector<double>(w.f_minus().begin(), w.f_minus().end())}};
}

WeightPair weight_pair_from_json(const nlohmann::json& doc) {
  std::vector<double> fp;
  std::vector<double> fm;
  for (const auto& e : doc.at("f_plus")) fp.push_back(parse_probability(e));
  for (const auto& e : doc.at("f_minus")) fm.push_back(parse_probability(e));
  return WeightPair(std::move(fp), std::move(fm));
}

}  // namespace advht
