#pragma once

// One-step drift certificates for the adversarial detector.
//
// A spec pairs per-state increments b with a potential V. The process
//   M_n = sum_{i<=n} b(R_i) - V(R_n)
// has conditional drift sum_t P(t|u) (b(t) + V(u) - V(t)) from state u, which
// must be >= 0 (submartingale) or <= 0 (supermartingale) for every vertex of
// the hypothesis polytope. States are 0-based.

#include <string>
#include <vector>

#include "advht/exponents.hpp"
#include "advht/fsm.hpp"
#include "advht/model.hpp"

namespace advht {

enum class DriftDirection { kSubmartingale, kSupermartingale };

struct DriftSpec {
  std::vector<double> increments;
  std::vector<double> potential;
  DriftDirection direction = DriftDirection::kSubmartingale;
  int hypothesis = 0;
  std::string label;
};

/// Counts visits to the "decide 0" end against weighted visits to the other end, under H=0.
DriftSpec build_claim1_drift(const DetectorFSM& fsm);

/// Bounds the time spent in internal state s (0-based, 1 <= s <= S-2) under H=0.
DriftSpec build_claim2_drift(const DetectorFSM& fsm, int s);

/// The H=1 counterpart of the first spec, obtained by reflecting the states.
DriftSpec mirrored_claim1_drift(const DetectorFSM& fsm);

/// sum_{i<k} g^i, with the limit k at g = 1.
double geometric_sum(double g, int k);

struct DriftReport {
  std::vector<std::vector<double>> drift;  // [state][vertex]
  std::vector<std::vector<double>> scale;  // sum_t P(t|u) |increment|
  double worst = 0.0;                      // most adverse drift, signed as a violation amount
  int worst_state = 0;
  std::size_t worst_vertex = 0;
  bool pass = false;
  double slack = 0.0;
};

nlohmann::json to_json(const DriftReport& r);

/// Checks every state and every vertex of P_h. A drift counts as a violation
/// when it has the wrong sign by more than slack * max(1, scale), where scale
/// is the expected absolute increment; the arithmetic is in long double.
DriftReport verify_drift(const DetectorFSM& fsm, const DriftSpec& spec, const ProblemInstance& instance,
                         double slack);

}  // namespace advht
