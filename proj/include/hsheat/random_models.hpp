#pragma once

#include <Eigen/Dense>
#include <random>

#include "hsheat/ctmc.hpp"

namespace hsheat {

/// Random irreducible generator: all off-diagonal rates drawn uniform in
/// [0.05, 2.0] (dense positive digraph is strongly connected), rows
/// balanced on the diagonal.
inline Generator random_irreducible_generator(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.05, 2.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = n == 1 ? 0.0 : unif(rng);
      s += m(i, j);
    }
    m(i, i) = -s;
  }
  return Generator::validate(m);
}

inline Eigen::VectorXd random_weights(int n, double lo, double hi,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = unif(rng);
  return g;
}

}  // namespace hsheat
