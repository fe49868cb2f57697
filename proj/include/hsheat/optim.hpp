#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace hsheat {

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// BFGS with Armijo backtracking for small smooth problems. The objective
/// returns f(x) and writes the gradient.
inline OptimResult minimize_bfgs(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, double grad_tol = 1e-11, int max_iter = 500) {
  const int n = static_cast<int>(x0.size());
  OptimResult res;
  res.x = std::move(x0);
  if (n == 0) {  // nothing to optimize
    Eigen::VectorXd g;
    res.value = fg(res.x, g);
    res.converged = true;
    return res;
  }
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g(n), g_new(n);
  double f = fg(res.x, g);
  for (int it = 0; it < max_iter; ++it) {
    res.grad_norm = g.norm();
    if (res.grad_norm <= grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -(h_inv * g);
    double slope = g.dot(d);
    if (slope >= 0.0) {  // reset on loss of descent
      h_inv.setIdentity();
      d = -g;
      slope = g.dot(d);
    }
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * d;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!std::isfinite(f_new) || f_new > f) break;  // line search failed
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }
    res.x = x_new;
    f = f_new;
    g = g_new;
    res.iterations = it + 1;
  }
  res.value = f;
  res.grad_norm = g.norm();
  if (res.grad_norm <= grad_tol) res.converged = true;
  return res;
}

}  // namespace hsheat
