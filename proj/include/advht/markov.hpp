#pragma once

// Finite Markov chain utilities on dense row-stochastic matrices.

#include <Eigen/Dense>
#include <vector>

namespace advht {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Strongly connected components of the support graph (entries > 0).
/// Returns a component id per state; ids are in reverse topological order.
std::vector<int> strongly_connected_components(const Matrix& P, int* count = nullptr);

/// States reachable from `start` (including it).
std::vector<bool> reachable_from(const Matrix& P, int start);

/// Component ids that have no edge leaving the component.
std::vector<int> closed_components(const Matrix& P, const std::vector<int>& comp, int count);

/// Stationary distribution of an irreducible chain by the
/// Grassmann-Taksar-Heyman elimination (no subtractions, so it stays accurate
/// for nearly decoupled chains). Throws if the chain is reducible.
Vector stationary_gth(const Matrix& P);

struct LimitingOccupancy {
  Vector occupancy;
  /// The start state reaches more than one closed class.
  bool multiple_closed_classes = false;
  int closed_classes_reached = 0;
};

/// Cesaro-limit occupancy of the chain started at `start`.
LimitingOccupancy limiting_occupancy(const Matrix& P, int start);

}  // namespace advht
