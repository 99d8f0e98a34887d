#include "advht/markov.hpp"

#include <algorithm>
#include <functional>

#include "advht/model.hpp"

namespace advht {

std::vector<int> strongly_connected_components(const Matrix& P, int* count) {
  const int n = static_cast<int>(P.rows());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int next = 0;
  int ncomp = 0;
  // Tarjan, iterative over an explicit frame stack.
  struct Frame {
    int v;
    int w;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.w < n) {
        const int w = f.w++;
        if (P(f.v, w) <= 0.0) continue;
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      if (low[v] == index[v]) {
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
    }
  }
  if (count) *count = ncomp;
  return comp;
}

std::vector<bool> reachable_from(const Matrix& P, int start) {
  const int n = static_cast<int>(P.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> todo{start};
  seen[start] = true;
  while (!todo.empty()) {
    const int v = todo.back();
    todo.pop_back();
    for (int w = 0; w < n; ++w) {
      if (P(v, w) > 0.0 && !seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

std::vector<int> closed_components(const Matrix& P, const std::vector<int>& comp, int count) {
  std::vector<bool> open(count, false);
  const int n = static_cast<int>(P.rows());
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (P(v, w) > 0.0 && comp[v] != comp[w]) open[comp[v]] = true;
    }
  }
  std::vector<int> out;
  for (int c = 0; c < count; ++c) {
    if (!open[c]) out.push_back(c);
  }
  return out;
}

Vector stationary_gth(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  if (n == 1) return Vector::Ones(1);
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> A = P.cast<long double>();
  for (int k = n - 1; k > 0; --k) {
    long double s = 0.0L;
    for (int j = 0; j < k; ++j) s += A(k, j);
    if (s <= 0.0L) throw Error("chain is reducible: state " + std::to_string(k) + " cannot reach lower states");
    for (int i = 0; i < k; ++i) A(i, k) /= s;
    for (int i = 0; i < k; ++i) {
      const long double a = A(i, k);
      if (a == 0.0L) continue;
      for (int j = 0; j < k; ++j) A(i, j) += a * A(k, j);
    }
  }
  std::vector<long double> pi(n, 0.0L);
  pi[0] = 1.0L;
  long double total = 1.0L;
  for (int k = 1; k < n; ++k) {
    long double s = 0.0L;
    for (int i = 0; i < k; ++i) s += pi[i] * A(i, k);
    pi[k] = s;
    total += s;
  }
  Vector out(n);
  for (int k = 0; k < n; ++k) out(k) = static_cast<double>(pi[k] / total);
  return out;
}

LimitingOccupancy limiting_occupancy(const Matrix& P, int start) {
  const int n = static_cast<int>(P.rows());
  int count = 0;
  const auto comp = strongly_connected_components(P, &count);
  const auto reach = reachable_from(P, start);
  std::vector<int> classes;
  for (int c : closed_components(P, comp, count)) {
    for (int v = 0; v < n; ++v) {
      if (comp[v] == c && reach[v]) {
        classes.push_back(c);
        break;
      }
    }
  }
  LimitingOccupancy out;
  out.occupancy = Vector::Zero(n);
  out.closed_classes_reached = static_cast<int>(classes.size());
  out.multiple_closed_classes = classes.size() > 1;

  auto class_stationary = [&](int c) {
    std::vector<int> members;
    for (int v = 0; v < n; ++v) {
      if (comp[v] == c) members.push_back(v);
    }
    Matrix sub(members.size(), members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = 0; j < members.size(); ++j) sub(i, j) = P(members[i], members[j]);
    }
    Vector pi = stationary_gth(sub);
    Vector full = Vector::Zero(n);
    for (std::size_t i = 0; i < members.size(); ++i) full(members[i]) = pi(static_cast<int>(i));
    return full;
  };

  if (classes.size() == 1) {
    out.occupancy = class_stationary(classes.front());
    return out;
  }

  // Absorption probabilities into each closed class from the transient states.
  std::vector<bool> recurrent(n, false);
  for (int c : classes) {
    for (int v = 0; v < n; ++v) recurrent[v] = recurrent[v] || comp[v] == c;
  }
  std::vector<int> transient;
  std::vector<int> pos(n, -1);
  for (int v = 0; v < n; ++v) {
    if (reach[v] && !recurrent[v]) {
      pos[v] = static_cast<int>(transient.size());
      transient.push_back(v);
    }
  }
  const int m = static_cast<int>(transient.size());
  Matrix IQ = Matrix::Identity(m, m);
  Matrix R = Matrix::Zero(m, static_cast<int>(classes.size()));
  for (int i = 0; i < m; ++i) {
    const int v = transient[i];
    for (int w = 0; w < n; ++w) {
      if (P(v, w) == 0.0) continue;
      if (pos[w] >= 0) {
        IQ(i, pos[w]) -= P(v, w);
      } else {
        for (std::size_t c = 0; c < classes.size(); ++c) {
          if (comp[w] == classes[c]) R(i, static_cast<int>(c)) += P(v, w);
        }
      }
    }
  }
  Matrix B = IQ.partialPivLu().solve(R);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    double weight = 0.0;
    if (pos[start] >= 0) {
      weight = B(pos[start], static_cast<int>(c));
    } else {
      weight = comp[start] == classes[c] ? 1.0 : 0.0;
    }
    if (weight > 0.0) out.occupancy += weight * class_stationary(classes[c]);
  }
  return out;
}

}  // namespace advht
