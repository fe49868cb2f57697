#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hsheat/ctmc.hpp"
#include "hsheat/errors.hpp"
#include "hsheat/optim.hpp"
#include "hsheat/rng.hpp"

namespace hsheat {

struct RateFunctionEvaluation {
  Eigen::VectorXd mu;
  double value = 0.0;          // I(mu) >= 0
  Eigen::VectorXd minimizer;   // u > 0, normalized u_1 = 1
  int iterations = 0;
  double grad_norm = 0.0;
};

namespace detail {

// Objective of the inner infimum in w = log u coordinates, w_1 = 0:
//   F(w) = sum_{i,j} mu_i gamma_ij exp(w_j - w_i),
// convex in w (the diagonal terms are constant). I(mu) = -min F.
inline double rate_objective(const Generator& g, const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& w_free,
                             Eigen::VectorXd& grad) {
  const int n = g.n_states();
  Eigen::VectorXd w(n);
  w(0) = 0.0;
  for (int k = 1; k < n; ++k) w(k) = w_free(k - 1);
  double f = 0.0;
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (mu(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double r = g.rate(i, j);
      if (r == 0.0) continue;
      const double term = mu(i) * r * std::exp(w(j) - w(i));
      f += term;
      if (i != j) {
        gw(j) += term;
        gw(i) -= term;
      }
    }
  }
  grad.resize(n - 1);
  for (int k = 1; k < n; ++k) grad(k - 1) = gw(k);
  return f;
}

inline OptimResult rate_infimum(const Generator& g, const Eigen::VectorXd& mu,
                                Eigen::VectorXd w0, double grad_tol,
                                int max_iter) {
  auto fg = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
    return rate_objective(g, mu, w, grad);
  };
  return minimize_bfgs(fg, std::move(w0), grad_tol, max_iter);
}

}  // namespace detail

/// Donsker-Varadhan rate function of the chain's occupation measure,
///   I(mu) = -inf_{u>0} sum_{i,j} mu_i gamma_ij u_j / u_i,
/// computed by multistart BFGS in log coordinates.
inline RateFunctionEvaluation rate_function(const Generator& g,
                                            const Eigen::VectorXd& mu,
                                            std::uint64_t seed = 0) {
  const int n = g.n_states();
  if (mu.size() != n) throw DimensionMismatch("mu length != n_states");
  // the objective is convex in w; a couple of starts guard against a
  // line-search stall, nothing more
  OptimResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng = make_rng(seed, 0x7a7eULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_starts = 2;
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(n - 1);
    if (s > 0)
      for (int k = 0; k < n - 1; ++k) w0(k) = normal(rng);
    OptimResult r = detail::rate_infimum(g, mu, std::move(w0), 1e-12, 1000);
    if (r.value < best.value) best = std::move(r);
  }
  RateFunctionEvaluation eval;
  eval.mu = mu;
  eval.value = -best.value;
  eval.minimizer.resize(n);
  eval.minimizer(0) = 1.0;
  for (int k = 1; k < n; ++k) eval.minimizer(k) = std::exp(best.x(k - 1));
  eval.iterations = best.iterations;
  eval.grad_norm = best.grad_norm;
  return eval;
}

/// Dominant real eigenvalue of the tilted generator Gamma + diag(g):
/// shift to a nonnegative matrix and run power iteration.
inline double tilted_principal_eigenvalue(const Generator& g,
                                          const Eigen::VectorXd& weights,
                                          double tol = 1e-12,
                                          int max_iter = 100000) {
  const int n = g.n_states();
  if (weights.size() != n) throw DimensionMismatch("weights length != n_states");
  if (n == 1) return weights(0);
  double shift = 0.0;
  for (int i = 0; i < n; ++i)
    shift = std::max(shift, g.exit_rate(i) + std::abs(weights(i)));
  shift += 1.0;
  Eigen::MatrixXd m = g.rates();
  m.diagonal() += weights;
  m.diagonal().array() += shift;  // nonnegative, irreducible
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double rq_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd mv = m * v;
    const double rq = v.dot(mv);
    mv.normalize();
    if (std::abs(rq - rq_prev) <= tol * std::abs(rq) &&
        (m * mv - rq * mv).norm() <= 1e-10 * std::abs(rq)) {
      return rq - shift;
    }
    rq_prev = rq;
    v = mv;
  }
  throw PowerIterationStalled("power iteration did not converge");
}

struct VariationalResult {
  double lambda = 0.0;             // sup_mu { <g,mu> - I(mu) }
  Eigen::VectorXd maximizer_mu;
  double eigen_lambda = 0.0;       // independent eigenvalue route
  double agreement_gap = 0.0;
};

/// Direct maximization of <g,mu> - I(mu) over the simplex via softmax
/// coordinates, cross-checked against the tilted principal eigenvalue.
/// The gradient in mu uses the envelope theorem at the inner minimizer.
inline VariationalResult variational_sup(const Generator& g,
                                         const Eigen::VectorXd& weights,
                                         bool check_agreement = true,
                                         std::uint64_t seed = 0) {
  const int n = g.n_states();
  if (weights.size() != n) throw DimensionMismatch("weights length != n_states");
  VariationalResult res;
  res.eigen_lambda = tilted_principal_eigenvalue(g, weights);
  if (n == 1) {
    res.lambda = weights(0);
    res.maximizer_mu = Eigen::VectorXd::Ones(1);
    res.agreement_gap = 0.0;
    return res;
  }
  const Eigen::VectorXd pi = stationary_distribution(g).pi;

  // Shared evaluation of f(mu) = <g,mu> - I(mu) with its gradient in mu.
  // The inner infimum is convex, so a single solve warm-started from the
  // previous evaluation suffices; the gradient uses the envelope theorem
  // at the inner minimizer, dF/dmu_i = g_i + sum_j gamma_ij u*_j / u*_i.
  Eigen::VectorXd w_warm = Eigen::VectorXd::Zero(n - 1);
  auto eval_mu = [&](const Eigen::VectorXd& mu, Eigen::VectorXd& dmu) {
    if (!w_warm.allFinite() || w_warm.cwiseAbs().maxCoeff() > 30.0)
      w_warm.setZero();
    OptimResult inner = detail::rate_infimum(g, mu, w_warm, 1e-11, 250);
    if (!inner.converged) {  // warm start can stall after a large mu move
      OptimResult alt =
          detail::rate_infimum(g, mu, Eigen::VectorXd::Zero(n - 1), 1e-11, 250);
      if (!std::isfinite(inner.value) || alt.value < inner.value)
        inner = std::move(alt);
    }
    if (inner.x.allFinite()) w_warm = inner.x;
    Eigen::VectorXd u(n);
    u(0) = 1.0;
    for (int k = 1; k < n; ++k) u(k) = std::exp(inner.x(k - 1));
    dmu.resize(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += g.rate(i, j) * u(j) / u(i);
      dmu(i) = weights(i) + s;
    }
    return weights.dot(mu) + inner.value;  // -I = min F
  };

  // Objective in free softmax coordinates v_2..v_N (v_1 = 0); minimized,
  // so the sign is flipped.
  auto fg = [&](const Eigen::VectorXd& v_free, Eigen::VectorXd& grad) {
    Eigen::VectorXd v(n);
    v(0) = 0.0;
    for (int k = 1; k < n; ++k) v(k) = v_free(k - 1);
    const double vmax = v.maxCoeff();
    Eigen::VectorXd mu = (v.array() - vmax).exp();
    mu /= mu.sum();
    Eigen::VectorXd dmu;
    const double f = eval_mu(mu, dmu);
    const double mean = mu.dot(dmu);
    grad.resize(n - 1);
    for (int k = 1; k < n; ++k) grad(k - 1) = -mu(k) * (dmu(k) - mean);
    return -f;
  };

  // The same objective in square-root coordinates mu = x.^2 / |x|^2. Near-
  // vertex maximizers (where I has a square-root cusp and softmax gradients
  // vanish) are smooth interior points in x, so this serves as a polish.
  auto fg_x = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const double s2 = x.squaredNorm();
    Eigen::VectorXd mu = x.array().square() / s2;
    Eigen::VectorXd dmu;
    const double f = eval_mu(mu, dmu);
    const double mean = mu.dot(dmu);
    grad = (-2.0 / s2) * x.array() * (dmu.array() - mean);
    return -f;
  };

  OptimResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> starts;
  {
    Eigen::VectorXd v0(n - 1);  // start at pi
    for (int k = 1; k < n; ++k) v0(k - 1) = std::log(pi(k)) - std::log(pi(0));
    starts.push_back(v0);
    for (int i = 0; i < n; ++i) {  // near-vertex starts
      Eigen::VectorXd v(n);
      v.setConstant(-4.0);
      v(i) = 4.0;
      Eigen::VectorXd vf(n - 1);
      for (int k = 1; k < n; ++k) vf(k - 1) = v(k) - v(0);
      starts.push_back(vf);
    }
  }
  for (auto& v0 : starts) {
    OptimResult r = minimize_bfgs(fg, v0, 1e-9, 400);
    if (r.value < best.value) best = std::move(r);
  }
  Eigen::VectorXd v(n);
  v(0) = 0.0;
  for (int k = 1; k < n; ++k) v(k) = best.x(k - 1);
  Eigen::VectorXd mu = (v.array() - v.maxCoeff()).exp();
  mu /= mu.sum();

  OptimResult polish = minimize_bfgs(
      fg_x, mu.cwiseMax(1e-12).cwiseSqrt(), 1e-11, 400);
  if (polish.value < best.value && polish.x.squaredNorm() > 0.0) {
    best = std::move(polish);
    mu = best.x.array().square() / best.x.squaredNorm();
  }

  res.lambda = -best.value;
  res.maximizer_mu = mu;
  res.agreement_gap = std::abs(res.lambda - res.eigen_lambda);
  if (check_agreement &&
      res.agreement_gap > 1e-6 * (1.0 + std::abs(res.lambda)))
    throw AgreementFailure(res.lambda, res.eigen_lambda);
  return res;
}

struct GrowthCurve {
  std::vector<double> t;
  Eigen::MatrixXd rates;  // (n_times x n_states): (1/t) log E_i[exp int g]
};

/// Finite-t growth rates of E_i[exp int_0^t g(r(s)) ds] from the linear
/// system y' = (Gamma + diag(g)) y, y(0) = 1, propagated in unit chunks
/// with log-domain renormalization so large t does not overflow.
inline GrowthCurve growth_oracle(const Generator& g,
                                 const Eigen::VectorXd& weights,
                                 const std::vector<double>& t_grid) {
  const int n = g.n_states();
  if (weights.size() != n) throw DimensionMismatch("weights length != n_states");
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    if (t_grid[k] <= 0.0 || (k > 0 && t_grid[k] <= t_grid[k - 1]))
      throw TimeOutOfRange("t_grid must be increasing and positive");
  Eigen::MatrixXd m = g.rates();
  m.diagonal() += weights;
  GrowthCurve out;
  out.t = t_grid;
  out.rates.resize(static_cast<int>(t_grid.size()), n);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  double log_scale = 0.0;
  double t_prev = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    double remaining = t_grid[k] - t_prev;
    while (remaining > 1e-15) {
      const double dt = std::min(remaining, 1.0);
      Eigen::MatrixXd e = (dt * m).exp();
      y = e * y;
      const double mx = y.maxCoeff();
      log_scale += std::log(mx);
      y /= mx;
      remaining -= dt;
    }
    for (int i = 0; i < n; ++i)
      out.rates(static_cast<int>(k), i) =
          (std::log(y(i)) + log_scale) / t_grid[k];
    t_prev = t_grid[k];
  }
  return out;
}

}  // namespace hsheat
