#pragma once

// Randomized finite-state detectors.
//
// States are 0-based here and in the FSM file format: the adversarial
// machines use state 0 as the "decide 0" end and state S-1 as the
// "decide 1" end.

#include <optional>
#include <string>
#include <vector>

#include "advht/exponents.hpp"
#include "advht/model.hpp"

namespace advht {

enum class FsmKind { kAdversarial, kHellmanCover, kCustom };

struct FsmParams {
  FsmKind kind = FsmKind::kCustom;
  double delta = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  std::optional<WeightPair> w_gamma;          // as supplied
  std::optional<WeightPair> w_gamma_floored;  // drives internal moves
  std::optional<WeightPair> w_c;              // drives end-state exits
  std::optional<FsmRateSet> rates;            // from the floored gamma weights
  std::size_t x_plus = 0;                     // Hellman-Cover only
  std::size_t x_minus = 0;
};

class DetectorFSM {
 public:
  /// kernel is indexed [s][x][t] flattened; rows are re-validated.
  DetectorFSM(int S, std::size_t letters, std::vector<double> kernel, std::vector<int> decision, int initial_state,
              FsmParams params = {});

  int num_states() const noexcept { return S_; }
  std::size_t num_letters() const noexcept { return letters_; }
  double prob(int s, std::size_t x, int t) const {
    return kernel_[(static_cast<std::size_t>(s) * letters_ + x) * static_cast<std::size_t>(S_) + static_cast<std::size_t>(t)];
  }
  /// pi(. | s, x) as a contiguous row of length S.
  std::span<const double> row(int s, std::size_t x) const {
    return {kernel_.data() + (static_cast<std::size_t>(s) * letters_ + x) * static_cast<std::size_t>(S_),
            static_cast<std::size_t>(S_)};
  }
  int decision(int s) const { return decision_.at(static_cast<std::size_t>(s)); }
  const std::vector<int>& decisions() const noexcept { return decision_; }
  int initial_state() const noexcept { return initial_; }
  const FsmParams& params() const noexcept { return params_; }
  const std::vector<double>& kernel() const noexcept { return kernel_; }

  /// True when every transition moves at most one state.
  bool is_birth_death() const;

 private:
  int S_;
  std::size_t letters_;
  std::vector<double> kernel_;
  std::vector<int> decision_;
  int initial_;
  FsmParams params_;
};

/// Decision rule of the built machines: 0 for s < ceil(S/2), 1 otherwise
/// (0-based), which puts the "decide 0" end at state 0.
std::vector<int> threshold_decisions(int S);

/// ceil(S/2) - 1 in 0-based numbering.
int centered_initial_state(int S);

/// Default end-state balance: sqrt(C1 gamma1^(S-2) / (C0 gamma0^(S-2))).
double default_kappa(const FsmRateSet& rates, int S);

DetectorFSM build_adversarial_fsm(int S, const WeightPair& w_gamma, const WeightPair& w_c, double delta,
                                  std::optional<double> kappa, double eta, const ProblemInstance& instance);

/// Classical saturable counter for a single pair (p, q).
DetectorFSM build_hellman_counter(const Distribution& p, const Distribution& q, int S, double delta,
                                  std::optional<double> kappa = std::nullopt);

/// Equalizing kappa of the classical counter: (q(x+) p(x+) / (q(x-) p(x-)))^((S-1)/2).
double hellman_kappa(const Distribution& p, const Distribution& q, std::size_t x_plus, std::size_t x_minus, int S);

/// Sum_x p(x) pi(. | s, x).
std::vector<double> step_distribution(const DetectorFSM& fsm, int s, const Distribution& p);

nlohmann::json fsm_to_json(const DetectorFSM& fsm);
DetectorFSM fsm_from_json(const nlohmann::json& doc);
DetectorFSM load_fsm(const std::filesystem::path& path);

}  // namespace advht
