#pragma once

// Exact and Monte Carlo evaluation of a detector's long-run error.

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "advht/adversary.hpp"
#include "advht/fsm.hpp"
#include "advht/markov.hpp"

namespace advht {

/// Kernel of the state chain when the adversary plays `per_state[s]` in state s.
Matrix chain_kernel(const DetectorFSM& fsm, const std::vector<Distribution>& per_state);

struct ExactError {
  double value = 0.0;
  std::vector<double> occupancy;
  bool multiple_closed_classes = false;
};

/// Cesaro-limit fraction of time the decision differs from h.
ExactError exact_average_error(const DetectorFSM& fsm, const AdversaryPolicy& policy, int h);

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter ctr, Key key);

  explicit Philox4x32(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Two independent uniforms in [0, 1) with 53 random bits each, for step i.
  std::array<double, 2> uniforms(std::uint64_t step, std::uint32_t stream = 0) const;

 private:
  Key key_;
};

struct Checkpoint {
  std::uint64_t step = 0;
  double running_error = 0.0;
  double occupancy_first = 0.0;  // state 0
  double occupancy_last = 0.0;   // state S-1
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct SimulationResult {
  std::uint64_t n = 0;
  double average_error = 0.0;
  std::vector<double> per_state_occupancy;
  double stderr_ = 0.0;
  std::uint64_t seed = 0;
  std::vector<Checkpoint> trajectory_checkpoints;
  /// Extremes of the running error over the tail checkpoints.
  double tail_min = 0.0;
  double tail_max = 0.0;

  friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

struct SimulationOptions {
  int batches = 50;
  /// Validate scripted output against the polytope at every step.
  bool debug = false;
};

SimulationResult simulate(const DetectorFSM& fsm, const AdversaryPolicy& policy, int h, std::uint64_t n,
                          std::uint64_t seed, const SimulationOptions& opts = {});

/// Pooled estimate across independent replicas.
struct MergedEstimate {
  double average_error = 0.0;
  double stderr_ = 0.0;
  std::uint64_t total_steps = 0;
};
MergedEstimate merge_replicas(const std::vector<SimulationResult>& replicas);

void write_trajectory_csv(const SimulationResult& r, std::ostream& out);
nlohmann::json to_json(const SimulationResult& r);

}  // namespace advht
