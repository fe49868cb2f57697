#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hsheat/ctmc.hpp"
#include "hsheat/errors.hpp"
#include "hsheat/hybrid_model.hpp"
#include "hsheat/spectral.hpp"

namespace hsheat::presets {

inline InitialData first_mode_initial(const SpectralBasis& basis) {
  std::vector<double> c(basis.n_modes(), 0.0);
  c[0] = 1.0;
  return initial_from_coefficients(std::move(c), basis);
}

/// Three-state chain on (0, pi) with drifts (0.1, 1.5, 0.2), no noise,
/// u0 the first eigenfunction.
inline HybridHeatModel example_3_5(int n_modes = 16) {
  Eigen::MatrixXd rates(3, 3);
  rates << -2, 1, 1, 3, -4, 1, 1, 1, -2;
  auto gen = Generator::validate(rates);
  auto basis = SpectralBasis::interval(std::numbers::pi, n_modes);
  auto init = first_mode_initial(basis);
  Eigen::VectorXd alpha(3);
  alpha << 0.1, 1.5, 0.2;
  return HybridHeatModel(std::move(gen), std::move(basis), std::move(init),
                         std::move(alpha), Eigen::MatrixXd(3, 0));
}

/// Two-state switching model on (0, pi): alpha = (a, b), beta = (c, d).
inline HybridHeatModel two_state(double a, double b, double c, double d,
                                 double gamma12, double gamma21,
                                 int n_modes = 16) {
  Eigen::MatrixXd rates(2, 2);
  rates << -gamma12, gamma12, gamma21, -gamma21;
  auto gen = Generator::validate(rates);
  auto basis = SpectralBasis::interval(std::numbers::pi, n_modes);
  auto init = first_mode_initial(basis);
  Eigen::VectorXd alpha(2);
  alpha << a, b;
  Eigen::MatrixXd beta(2, 1);
  beta << c, d;
  return HybridHeatModel(std::move(gen), std::move(basis), std::move(init),
                         std::move(alpha), std::move(beta));
}

/// a=2, b=1, c=d=1, gamma_12 = 4 and configurable gamma_21.
inline HybridHeatModel example_4_2(double gamma21 = 2.0, int n_modes = 16) {
  return two_state(2.0, 1.0, 1.0, 1.0, 4.0, gamma21, n_modes);
}

/// Single-state model on (0, pi): constant alpha, one noise channel beta.
inline HybridHeatModel single_state(double alpha, double beta,
                                    int n_modes = 16) {
  Eigen::MatrixXd rates(1, 1);
  rates << 0.0;
  auto gen = Generator::validate(rates);
  auto basis = SpectralBasis::interval(std::numbers::pi, n_modes);
  auto init = first_mode_initial(basis);
  Eigen::VectorXd a(1);
  a << alpha;
  Eigen::MatrixXd b(1, beta == 0.0 ? 0 : 1);
  if (beta != 0.0) b(0, 0) = beta;
  return HybridHeatModel(std::move(gen), std::move(basis), std::move(init),
                         std::move(a), std::move(b));
}

// Unstable single-mode model with multiplicative noise, exponent +1/2.
inline HybridHeatModel eq_16(int n_modes = 16) {
  return single_state(2.0, 1.0, n_modes);
}

// Its stabilized counterpart, exponent -1/2.
inline HybridHeatModel eq_0(int n_modes = 16) {
  return single_state(1.0, 1.0, n_modes);
}

inline HybridHeatModel by_name(const std::string& name, int n_modes = 16) {
  if (name == "example-3.5") return example_3_5(n_modes);
  if (name == "example-4.2") return example_4_2(2.0, n_modes);
  if (name == "eq-16") return eq_16(n_modes);
  if (name == "eq-0") return eq_0(n_modes);
  if (name == "single-state-stable") return single_state(0.1, 0.0, n_modes);
  if (name == "single-state-unstable") return single_state(1.5, 0.0, n_modes);
  throw ValidationError("unknown preset: " + name);
}

inline std::vector<std::string> names() {
  return {"example-3.5", "example-4.2", "eq-16", "eq-0",
          "single-state-stable", "single-state-unstable"};
}

}  // namespace hsheat::presets
