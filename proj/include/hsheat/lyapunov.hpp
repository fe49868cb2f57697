#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "hsheat/ctmc.hpp"
#include "hsheat/errors.hpp"
#include "hsheat/hybrid_model.hpp"
#include "hsheat/large_deviation.hpp"

namespace hsheat {

/// Which eigenvalue enters the exponent formulas: lambda_{n0} (exact for a
/// deterministic nonzero u0) or lambda_1 (upper bound for any u0).
enum class ExponentMode { ExactForDeterministicU0, UpperBoundAnyU0 };

inline constexpr double kMarginTol = 1e-12;

/// Strict-inequality verdict with its signed margin; margins inside the
/// tolerance band are reported as boundary/indeterminate.
struct StabilityVerdict {
  bool stable = false;
  bool boundary = false;
  double margin = 0.0;  // positive means stable with room to spare

  static StabilityVerdict from_exponent(double exponent) {
    StabilityVerdict v;
    v.margin = -exponent;
    v.boundary = std::abs(v.margin) <= kMarginTol;
    v.stable = !v.boundary && v.margin > 0.0;
    return v;
  }

  std::string label() const {
    if (boundary) return "boundary/indeterminate";
    return stable ? "stable" : "unstable";
  }
};

namespace detail {

inline double mode_eigenvalue(const HybridHeatModel& model, ExponentMode mode) {
  if (mode == ExponentMode::ExactForDeterministicU0)
    return model.basis.eigenvalue(model.initial.leading_index);
  return model.basis.eigenvalue(1);
}

}  // namespace detail

/// Sample exponent of the noiseless switching heat equation:
///   -(lambda_{n0} - sum_j pi_j alpha_j),
/// or the lambda_1 upper bound in bound mode.
inline double heat_sample_exponent(const HybridHeatModel& model,
                                   ExponentMode mode) {
  if (model.initial.leading_index < 1)
    throw ZeroInitialData("initial datum is zero");
  const Eigen::VectorXd pi = stationary_distribution(model.generator).pi;
  return -(detail::mode_eigenvalue(model, mode) - pi.dot(model.alpha));
}

/// Sample exponent with noise:
///   -(lambda - sum_i pi_i (alpha_i - sigma_i^2 / 2)),  sigma_i^2 = sum_j beta_ij^2.
inline double sample_exponent(const HybridHeatModel& model, ExponentMode mode) {
  if (model.initial.leading_index < 1)
    throw ZeroInitialData("initial datum is zero");
  const Eigen::VectorXd pi = stationary_distribution(model.generator).pi;
  const Eigen::VectorXd drift = model.alpha - 0.5 * model.sigma_sq();
  return -(detail::mode_eigenvalue(model, mode) - pi.dot(drift));
}

/// Two-state closed-form predicate for the unit-interval model with
/// alpha = (a, b), beta = (c, d): stable iff
///   (a g22 + b g11)/(g11 + g22) < 1 + (c^2 g22 + d^2 g11)/(2 (g11 + g22)),
/// where g11 = gamma_12 and g22 = gamma_21 are the positive exit rates.
inline StabilityVerdict two_state_stability(double a, double b, double c,
                                            double d, double gamma12,
                                            double gamma21) {
  if (!(gamma12 > 0.0) || !(gamma21 > 0.0))
    throw NonpositiveRates("both transition rates must be positive");
  const double g11 = gamma12, g22 = gamma21;
  const double lhs = (a * g22 + b * g11) / (g11 + g22);
  const double rhs = 1.0 + (c * c * g22 + d * d * g11) / (2.0 * (g11 + g22));
  StabilityVerdict v;
  v.margin = rhs - lhs;
  v.boundary = std::abs(v.margin) <= kMarginTol;
  v.stable = !v.boundary && v.margin > 0.0;
  return v;
}

// g_i = p alpha_i + (p (p-1) / 2) sigma_i^2
inline Eigen::VectorXd moment_weights(const HybridHeatModel& model, double p) {
  if (!(p > 0.0)) throw NonpositiveP("p must be positive");
  return p * model.alpha + 0.5 * p * (p - 1.0) * model.sigma_sq();
}

/// p-th moment exponent: -p lambda + Lambda(g), where Lambda(g) is the
/// variational value sup_mu { <g,mu> - I(mu) } (equivalently the tilted
/// principal eigenvalue).
inline double moment_exponent(const HybridHeatModel& model, double p,
                              ExponentMode mode) {
  if (model.initial.leading_index < 1)
    throw ZeroInitialData("initial datum is zero");
  const Eigen::VectorXd g = moment_weights(model, p);
  const double lam = tilted_principal_eigenvalue(model.generator, g);
  return -p * detail::mode_eigenvalue(model, mode) + lam;
}

/// Lower bound from I(pi) = 0: -p lambda_{n0} + <g, pi>.
inline double moment_lower_bound_pi(const HybridHeatModel& model, double p) {
  if (model.initial.leading_index < 1)
    throw ZeroInitialData("initial datum is zero");
  const Eigen::VectorXd g = moment_weights(model, p);
  const Eigen::VectorXd pi = stationary_distribution(model.generator).pi;
  return -p * model.basis.eigenvalue(model.initial.leading_index) + pi.dot(g);
}

/// Right-hand side of the sufficient explosion condition for the 1/q
/// two-state family: (q^2 - 2 q^{3/2} + 2 q - 2 q^{1/2} + 1) / (3 q + 1).
inline double eq00_rhs(double q) {
  if (!(q > 0.0)) throw NonpositiveQ("q must be positive");
  const double sq = std::sqrt(q);
  return (q * q - 2.0 * q * sq + 2.0 * q - 2.0 * sq + 1.0) / (3.0 * q + 1.0);
}

/// Aggregate analytic report for one model.
struct ExponentReport {
  double sample_exact = 0.0;
  double sample_bound = 0.0;
  StabilityVerdict sample_verdict;
  struct MomentEntry {
    double p = 0.0;
    double exponent = 0.0;
    double lower_bound_pi = 0.0;
    StabilityVerdict verdict;
  };
  std::vector<MomentEntry> moments;
};

inline ExponentReport analyze(const HybridHeatModel& model,
                              const std::vector<double>& p_list) {
  ExponentReport rep;
  rep.sample_exact =
      sample_exponent(model, ExponentMode::ExactForDeterministicU0);
  rep.sample_bound = sample_exponent(model, ExponentMode::UpperBoundAnyU0);
  rep.sample_verdict = StabilityVerdict::from_exponent(rep.sample_exact);
  for (double p : p_list) {
    ExponentReport::MomentEntry e;
    e.p = p;
    e.exponent = moment_exponent(model, p, ExponentMode::ExactForDeterministicU0);
    e.lower_bound_pi = moment_lower_bound_pi(model, p);
    e.verdict = StabilityVerdict::from_exponent(e.exponent);
    rep.moments.push_back(e);
  }
  return rep;
}

}  // namespace hsheat
