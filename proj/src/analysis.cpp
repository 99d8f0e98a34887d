#include "advht/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advht/lp.hpp"

namespace advht {

Matrix chain_kernel(const DetectorFSM& fsm, const std::vector<Distribution>& per_state) {
  const int S = fsm.num_states();
  Matrix K = Matrix::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    const auto& d = per_state.size() == 1 ? per_state.front() : per_state.at(static_cast<std::size_t>(s));
    const auto row = step_distribution(fsm, s, d);
    for (int t = 0; t < S; ++t) K(s, t) = row[static_cast<std::size_t>(t)];
  }
  return K;
}

ExactError exact_average_error(const DetectorFSM& fsm, const AdversaryPolicy& policy, int h) {
  if (policy.kind() == PolicyKind::kScripted) throw ValidationError("exact evaluation needs a stationary policy");
  if (h != 0 && h != 1) throw ValidationError("hypothesis must be 0 or 1");
  if (policy.kind() == PolicyKind::kStationary &&
      policy.per_state().size() != static_cast<std::size_t>(fsm.num_states())) {
    throw ValidationError("stationary policy length differs from the number of states");
  }
  const Matrix K = chain_kernel(fsm, policy.per_state());
  const auto lim = limiting_occupancy(K, fsm.initial_state());
  ExactError out;
  out.multiple_closed_classes = lim.multiple_closed_classes;
  out.occupancy.assign(lim.occupancy.data(), lim.occupancy.data() + lim.occupancy.size());
  for (int s = 0; s < fsm.num_states(); ++s) {
    if (fsm.decision(s) != h) out.value += out.occupancy[static_cast<std::size_t>(s)];
  }
  return out;
}

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
  return (static_cast<double>(a >> 5) * 67108864.0 + static_cast<double>(b >> 6)) * (1.0 / 9007199254740992.0);
}

// Inverse-CDF draw; the final index absorbs rounding in the cumulative sum.
template <class Span>
std::size_t draw(const Span& probs, double u) {
  double acc = 0.0;
  const std::size_t n = probs.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Skip trailing zero-probability entries.
  std::size_t last = n - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  return last;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<double, 2> Philox4x32::uniforms(std::uint64_t step, std::uint32_t stream) const {
  const auto out = block({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream, 0u}, key_);
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

SimulationResult simulate(const DetectorFSM& fsm, const AdversaryPolicy& policy, int h, std::uint64_t n,
                          std::uint64_t seed, const SimulationOptions& opts) {
  if (n < 1) throw ValidationError("n must be at least 1");
  if (h != 0 && h != 1) throw ValidationError("hypothesis must be 0 or 1");
  const int S = fsm.num_states();
  const bool scripted = policy.kind() == PolicyKind::kScripted;
  if (!scripted && policy.kind() == PolicyKind::kStationary &&
      policy.per_state().size() != static_cast<std::size_t>(S)) {
    throw ValidationError("stationary policy length differs from the number of states");
  }
  const Philox4x32 rng(seed);
  const std::uint64_t batches = std::max<std::uint64_t>(1, std::min<std::uint64_t>(opts.batches, n));
  const std::uint64_t batch_len = n / batches;

  std::vector<std::uint64_t> visits(static_cast<std::size_t>(S), 0);
  std::vector<double> batch_means;
  std::uint64_t errors = 0;
  std::uint64_t batch_errors = 0;
  std::vector<std::size_t> samples;
  std::vector<int> states;
  int state = fsm.initial_state();
  if (scripted) states.push_back(state);

  SimulationResult res;
  res.n = n;
  res.seed = seed;
  std::uint64_t next_checkpoint = 1;

  for (std::uint64_t i = 0; i < n; ++i) {
    const auto u = rng.uniforms(i);
    std::size_t x;
    if (scripted) {
      const Distribution d = policy.rule()(samples, states);
      if (d.size() != fsm.num_letters()) throw ValidationError("scripted distribution has the wrong length");
      if (policy.debug_polytope()) {
        const auto m = member_of(d.probs(), *policy.debug_polytope());
        if (!m.member) {
          throw ValidationError("scripted policy left the polytope at step " + std::to_string(i) +
                                " (L-inf distance " + std::to_string(m.distance) + ")");
        }
      }
      x = draw(d.probs(), u[0]);
    } else {
      x = draw(policy.at_state(state).probs(), u[0]);
    }
    state = static_cast<int>(draw(fsm.row(state, x), u[1]));
    if (scripted) {
      samples.push_back(x);
      states.push_back(state);
    }
    ++visits[static_cast<std::size_t>(state)];
    const bool wrong = fsm.decision(state) != h;
    errors += wrong;
    if (i / batch_len < batches) {
      batch_errors += wrong;
      if ((i + 1) % batch_len == 0) {
        batch_means.push_back(static_cast<double>(batch_errors) / static_cast<double>(batch_len));
        batch_errors = 0;
      }
    }
    const std::uint64_t done = i + 1;
    if (done == next_checkpoint || done == n) {
      res.trajectory_checkpoints.push_back({done, static_cast<double>(errors) / static_cast<double>(done),
                                            static_cast<double>(visits.front()) / static_cast<double>(done),
                                            static_cast<double>(visits.back()) / static_cast<double>(done)});
      if (done == next_checkpoint) next_checkpoint *= 2;
    }
  }

  res.average_error = static_cast<double>(errors) / static_cast<double>(n);
  res.per_state_occupancy.resize(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    res.per_state_occupancy[static_cast<std::size_t>(s)] =
        static_cast<double>(visits[static_cast<std::size_t>(s)]) / static_cast<double>(n);
  }
  if (batch_means.size() >= 2) {
    const double k = static_cast<double>(batch_means.size());
    const double mean = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / k;
    double ss = 0.0;
    for (double b : batch_means) ss += (b - mean) * (b - mean);
    res.stderr_ = std::sqrt(ss / (k - 1.0) / k);
  }
  // Tail: the last quarter of the checkpoints (at least two when available).
  const std::size_t m = res.trajectory_checkpoints.size();
  const std::size_t tail = std::max<std::size_t>(std::min<std::size_t>(2, m), m / 4);
  res.tail_min = 1.0;
  res.tail_max = 0.0;
  for (std::size_t i = m - tail; i < m; ++i) {
    res.tail_min = std::min(res.tail_min, res.trajectory_checkpoints[i].running_error);
    res.tail_max = std::max(res.tail_max, res.trajectory_checkpoints[i].running_error);
  }
  return res;
}

MergedEstimate merge_replicas(const std::vector<SimulationResult>& replicas) {
  MergedEstimate m;
  for (const auto& r : replicas) m.total_steps += r.n;
  if (m.total_steps == 0) return m;
  double var = 0.0;
  for (const auto& r : replicas) {
    const double w = static_cast<double>(r.n) / static_cast<double>(m.total_steps);
    m.average_error += w * r.average_error;
    var += w * w * r.stderr_ * r.stderr_;
  }
  m.stderr_ = std::sqrt(var);
  return m;
}

void write_trajectory_csv(const SimulationResult& r, std::ostream& out) {
  out << "step,running_error,occupancy_1,occupancy_S\n";
  out.precision(17);
  for (const auto& c : r.trajectory_checkpoints) {
    out << c.step << ',' << c.running_error << ',' << c.occupancy_first << ',' << c.occupancy_last << '\n';
  }
}

nlohmann::json to_json(const SimulationResult& r) {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& c : r.trajectory_checkpoints) {
    cps.push_back({{"step", c.step},
                   {"running_error", c.running_error},
                   {"occupancy_1", c.occupancy_first},
                   {"occupancy_S", c.occupancy_last}});
  }
  return nlohmann::json{{"n", r.n},
                        {"average_error", r.average_error},
                        {"stderr", r.stderr_},
                        {"seed", r.seed},
                        {"per_state_occupancy", r.per_state_occupancy},
                        {"tail_liminf_estimate", r.tail_min},
                        {"tail_limsup_estimate", r.tail_max},
                        {"trajectory_checkpoints", cps}};
}

}  // namespace advht
