#pragma once

// Core domain types for adversarial hypothesis testing over finite alphabets.
//
// An instance is a pair of convex sets of distributions (one per hypothesis)
// given by their vertices. Every other module consumes these types; they are
// validated on construction and immutable afterwards.

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace advht {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input file could not be read or parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Absolute tolerance on probability sums and vertex deduplication.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Soft size limits for the solvers (not enforced by the types themselves).
inline constexpr std::size_t kSoftMaxAlphabet = 64;
inline constexpr std::size_t kSoftMaxVertices = 256;

/// a / b with the conventions 0/0 = 0 and a/0 = +inf for a > 0.
double safe_ratio(double numerator, double denominator) noexcept;

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> letters);

  std::size_t size() const noexcept { return letters_.size(); }
  const std::vector<std::string>& letters() const noexcept { return letters_; }
  const std::string& operator[](std::size_t i) const { return letters_.at(i); }

  /// Alphabet {"1", ..., "n"}.
  static Alphabet numbered(std::size_t n);

 private:
  std::vector<std::string> letters_;
};

/// A probability vector. Entries are non-negative and sum to one; inputs whose
/// sum is within kProbabilityTolerance of one are renormalized once.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vector() const noexcept { return probs_; }

  static Distribution uniform(std::size_t n);
  /// lambda * a + (1 - lambda) * b.
  static Distribution mix(const Distribution& a, const Distribution& b, double lambda);

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

double linf_distance(std::span<const double> a, std::span<const double> b);

/// Closed convex set of distributions in vertex representation.
class DistributionPolytope {
 public:
  explicit DistributionPolytope(std::vector<Distribution> vertices);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t dimension() const noexcept { return vertices_.front().size(); }
  const Distribution& vertex(std::size_t i) const { return vertices_.at(i); }
  const std::vector<Distribution>& vertices() const noexcept { return vertices_; }

  /// Point of the polytope with the given convex weights over vertices.
  Distribution combine(std::span<const double> weights) const;

 private:
  std::vector<Distribution> vertices_;
};

struct ProblemInstance {
  Alphabet alphabet;
  DistributionPolytope p0;
  DistributionPolytope p1;

  ProblemInstance(Alphabet alphabet_in, DistributionPolytope p0_in, DistributionPolytope p1_in);

  const DistributionPolytope& polytope(int hypothesis) const;
  std::size_t num_letters() const noexcept { return alphabet.size(); }
};

/// Letter weights (f_plus, f_minus) with f_plus + f_minus <= 1 pointwise.
///
/// The ratio objectives are invariant under separate rescaling of the two
/// components, so a pair may also be held in simplex-normalized form (each
/// nonzero component sums to one). Such pairs skip the pointwise bound and
/// must go through scaled_to_unit_peak() before driving transition weights.
class WeightPair {
 public:
  WeightPair(std::vector<double> f_plus, std::vector<double> f_minus);

  /// Simplex-normalized pair; only non-negativity is checked.
  static WeightPair from_normalized(std::vector<double> f_plus, std::vector<double> f_minus);

  std::size_t size() const noexcept { return f_plus_.size(); }
  std::span<const double> f_plus() const noexcept { return f_plus_; }
  std::span<const double> f_minus() const noexcept { return f_minus_; }

  bool simplex_normalized() const noexcept { return simplex_normalized_; }

  /// Joint rescaling so that max_x f_plus(x) + f_minus(x) = 1.
  WeightPair scaled_to_unit_peak() const;

  /// The same pair with each component sent through f -> (1 - 2 eta) f + eta.
  WeightPair floored(double eta) const;

  /// Indicator weights on single letters.
  static WeightPair indicators(std::size_t n, std::size_t x_plus, std::size_t x_minus);

 private:
  WeightPair(std::vector<double> f_plus, std::vector<double> f_minus, bool simplex);

  std::vector<double> f_plus_;
  std::vector<double> f_minus_;
  bool simplex_normalized_ = false;
};

/// Sum_x d(x) f(x).
double expectation(std::span<const double> f, const Distribution& d);

/// Rescale each nonzero component to sum to one. Zero components stay zero.
WeightPair normalize_weight_pair(const WeightPair& w);

/// Parse a probability entry: a JSON number or a string "a/b" / decimal.
double parse_probability(const nlohmann::json& value);

ProblemInstance parse_instance(const nlohmann::json& doc);
ProblemInstance load_instance(const std::filesystem::path& path);
nlohmann::json instance_to_json(const ProblemInstance& instance);

/// Parse a comma-separated list of entries ("0.1,1/3,...") into a distribution.
Distribution parse_distribution_list(std::string_view text);

nlohmann::json to_json(const WeightPair& w);
WeightPair weight_pair_from_json(const nlohmann::json& doc);

}  // namespace advht
