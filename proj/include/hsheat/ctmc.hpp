#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hsheat/errors.hpp"
#include "hsheat/rng.hpp"

namespace hsheat {

/// Validated transition-rate matrix of a finite, irreducible
/// continuous-time Markov chain. Off-diagonal entries are nonnegative,
/// rows sum to zero, and the positive-rate digraph is strongly connected.
class Generator {
 public:
  static Generator validate(const Eigen::MatrixXd& rates) {
    if (rates.rows() != rates.cols() || rates.rows() < 1)
      throw DimensionMismatch("generator matrix must be square, N >= 1");
    const int n = static_cast<int>(rates.rows());
    const double scale = std::max(rates.cwiseAbs().maxCoeff(), 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        if (i != j && rates(i, j) < 0.0)
          throw NegativeOffDiagonal(i, j, rates(i, j));
      const double s = rates.row(i).sum();
      if (std::abs(s) > 1e-12 * scale) throw RowSumNonzero(i, s);
    }
    check_strongly_connected(rates);
    return Generator(rates);
  }

  int n_states() const { return static_cast<int>(rates_.rows()); }
  const Eigen::MatrixXd& rates() const { return rates_; }
  double rate(int i, int j) const { return rates_(i, j); }
  double exit_rate(int i) const { return -rates_(i, i); }
  double max_abs_rate() const {
    return n_states() == 1 ? 0.0 : rates_.cwiseAbs().maxCoeff();
  }

 private:
  explicit Generator(Eigen::MatrixXd rates) : rates_(std::move(rates)) {}

  // Kosaraju-lite: BFS on the positive-rate digraph and its reverse.
  static void check_strongly_connected(const Eigen::MatrixXd& g) {
    const int n = static_cast<int>(g.rows());
    if (n == 1) return;
    auto reach = [&](bool transpose) {
      std::vector<char> seen(n, 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j) {
          double r = transpose ? g(j, i) : g(i, j);
          if (i != j && r > 0.0 && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      return seen;
    };
    auto fwd = reach(false), bwd = reach(true);
    for (int i = 0; i < n; ++i)
      if (!fwd[i] || !bwd[i]) throw NotIrreducible(i);
  }

  Eigen::MatrixXd rates_;
};

struct StationaryDistribution {
  Eigen::VectorXd pi;
};

/// Solves pi * Gamma = 0, sum(pi) = 1 by replacing the last column of
/// Gamma^T's system with the normalization row. Unique for irreducible
/// generators; the singular guard is defensive only.
inline StationaryDistribution stationary_distribution(const Generator& g) {
  const int n = g.n_states();
  Eigen::MatrixXd a = g.rates().transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(b);
  const double scale = std::max(g.max_abs_rate(), 1.0);
  if (!pi.allFinite() || (a * pi - b).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw SingularSystem("stationary solve failed for irreducible generator");
  // One iterative-refinement step tightens the residual to the contract.
  pi += lu.solve(b - a * pi);
  for (int i = 0; i < n; ++i)
    if (pi(i) <= 0.0)
      throw SingularSystem("stationary distribution has nonpositive entry");
  return {pi};
}

/// One realization's jump skeleton: r(t) = states[k] on [jump_times[k],
/// jump_times[k+1]), right continuous, jump_times[0] = 0.
struct MarkovPath {
  std::vector<double> jump_times;  // increasing, starts at 0
  std::vector<int> states;         // 0-based state indices
  double horizon = 0.0;

  int state_at(double t) const {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin()) - 1];
  }
};

struct OccupationMeasure {
  Eigen::VectorXd weights;
  double t = 0.0;
};

/// Hold-and-jump sampling: holding time in state i is Exp(-gamma_ii),
/// next state j != i with probability gamma_ij / (-gamma_ii).
inline MarkovPath simulate_path(const Generator& g, int start_state,
                                double horizon, std::uint64_t seed) {
  if (horizon <= 0.0) throw TimeOutOfRange("horizon must be positive");
  if (start_state < 0 || start_state >= g.n_states())
    throw DimensionMismatch("start state out of range");
  MarkovPath path;
  path.horizon = horizon;
  path.jump_times.push_back(0.0);
  path.states.push_back(start_state);
  std::mt19937_64 rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  int state = start_state;
  while (true) {
    const double exit = g.exit_rate(state);
    if (exit <= 0.0) break;  // N = 1, or defensive: no exit, hold forever
    std::exponential_distribution<double> hold(exit);
    t += hold(rng);
    if (t >= horizon) break;
    // inverse-CDF draw of the embedded jump
    double u = unif(rng) * exit;
    int next = -1;
    double acc = 0.0;
    for (int j = 0; j < g.n_states(); ++j) {
      if (j == state) continue;
      acc += g.rate(state, j);
      if (u <= acc) {
        next = j;
        break;
      }
    }
    if (next < 0) {  // numerical guard: u landed past the last bin
      for (int j = g.n_states() - 1; j >= 0; --j)
        if (j != state && g.rate(state, j) > 0.0) {
          next = j;
          break;
        }
    }
    path.jump_times.push_back(t);
    path.states.push_back(next);
    state = next;
  }
  return path;
}

/// Exact occupation fractions on [0, t] from the jump skeleton.
inline OccupationMeasure occupation_measure(const MarkovPath& path, double t,
                                            int n_states) {
  if (t <= 0.0 || t > path.horizon)
    throw TimeOutOfRange("time outside (0, horizon]");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_states);
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const double a = path.jump_times[k];
    if (a >= t) break;
    const double b =
        (k + 1 < path.jump_times.size()) ? std::min(path.jump_times[k + 1], t) : t;
    w(path.states[k]) += b - a;
  }
  w /= t;
  return {w, t};
}

/// Exact integral of a per-state function along the path:
/// int_0^t f(r(s)) ds = t * <f, L_t>.
inline double path_integral(const MarkovPath& path,
                            const Eigen::VectorXd& per_state, double t) {
  if (t <= 0.0 || t > path.horizon)
    throw TimeOutOfRange("time outside (0, horizon]");
  double acc = 0.0;
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const double a = path.jump_times[k];
    if (a >= t) break;
    const double b =
        (k + 1 < path.jump_times.size()) ? std::min(path.jump_times[k + 1], t) : t;
    acc += per_state(path.states[k]) * (b - a);
  }
  return acc;
}

}  // namespace hsheat
