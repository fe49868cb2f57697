#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hsheat/errors.hpp"

namespace hsheat {

/// Gauss-Legendre nodes/weights on [-1, 1], Newton on the recurrence.
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

/// Eigenstructure of the Dirichlet Laplacian used by the mode expansion.
/// Either the analytic interval basis on (0, L) or user-supplied pairs
/// (in which case pointwise evaluation is unavailable).
class SpectralBasis {
 public:
  static SpectralBasis interval(double length, int n_modes) {
    if (!(length > 0.0)) throw InvalidLength("interval length must be positive");
    if (n_modes < 1) throw DimensionMismatch("n_modes must be >= 1");
    SpectralBasis b;
    b.length_ = length;
    b.eigenvalues_.resize(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
      const double k = n * std::numbers::pi / length;
      b.eigenvalues_[n - 1] = k * k;
    }
    return b;
  }

  /// Basis known only through its eigenvalues; no pointwise evaluation.
  static SpectralBasis user_supplied(std::vector<double> eigenvalues) {
    if (eigenvalues.empty())
      throw DimensionMismatch("need at least one eigenvalue");
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      if (!(eigenvalues[i] > 0.0) ||
          (i > 0 && eigenvalues[i] <= eigenvalues[i - 1]))
        throw ValidationError("eigenvalues must be strictly increasing and positive");
    }
    SpectralBasis b;
    b.eigenvalues_ = std::move(eigenvalues);
    return b;
  }

  int n_modes() const { return static_cast<int>(eigenvalues_.size()); }
  double eigenvalue(int n) const { return eigenvalues_[n - 1]; }  // 1-based
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  bool has_eval() const { return length_ > 0.0; }
  double domain_length() const { return length_; }

  double eval(int n, double x) const {
    if (!has_eval())
      throw ValidationError("user-supplied basis has no pointwise evaluation");
    return std::sqrt(2.0 / length_) *
           std::sin(n * std::numbers::pi * x / length_);
  }

 private:
  std::vector<double> eigenvalues_;
  double length_ = 0.0;  // 0 marks a user-supplied basis
};

/// Mode coefficients of the initial datum, its norm, and the index of the
/// first mode with a numerically nonzero coefficient.
struct InitialData {
  std::vector<double> coefficients;  // u0_n, n = 1..N_modes
  int leading_index = 0;             // n0, 1-based
  double norm = 0.0;                 // ||u0|| by the same quadrature

  double coeff(int n) const { return coefficients[n - 1]; }

  // Mass not captured by the retained modes; clamped at zero.
  double tail_sq() const {
    double captured = 0.0;
    for (double c : coefficients) captured += c * c;
    return std::max(norm * norm - captured, 0.0);
  }
};

inline constexpr double kLeadingCoeffThreshold = 1e-12;

inline int find_leading_index(const std::vector<double>& c) {
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0)
    throw AllCoefficientsBelowThreshold("initial datum projects to zero");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (std::abs(c[i]) > kLeadingCoeffThreshold * cmax)
      return static_cast<int>(i) + 1;
  throw AllCoefficientsBelowThreshold("initial datum projects to zero");
}

/// Projects u0 onto the interval basis by Gauss-Legendre quadrature.
inline InitialData project_initial(const std::function<double(double)>& u0,
                                   const SpectralBasis& basis, int quad_nodes) {
  if (!basis.has_eval())
    throw ValidationError("projection needs the interval basis");
  if (quad_nodes < 2 * basis.n_modes() + 1)
    throw DimensionMismatch("quad_nodes must be >= 2*n_modes + 1");
  const double L = basis.domain_length();
  GaussLegendre gl(quad_nodes);
  std::vector<double> fx(quad_nodes), xs(quad_nodes);
  for (int q = 0; q < quad_nodes; ++q) {
    xs[q] = 0.5 * L * (gl.nodes[q] + 1.0);
    fx[q] = u0(xs[q]);
  }
  InitialData data;
  data.coefficients.resize(basis.n_modes());
  double norm_sq = 0.0;
  for (int q = 0; q < quad_nodes; ++q)
    norm_sq += 0.5 * L * gl.weights[q] * fx[q] * fx[q];
  data.norm = std::sqrt(std::max(norm_sq, 0.0));
  for (int n = 1; n <= basis.n_modes(); ++n) {
    double c = 0.0;
    for (int q = 0; q < quad_nodes; ++q)
      c += 0.5 * L * gl.weights[q] * fx[q] * basis.eval(n, xs[q]);
    data.coefficients[n - 1] = c;
  }
  data.leading_index = find_leading_index(data.coefficients);
  return data;
}

/// Initial data given directly as mode coefficients (user-supplied basis
/// route, or presets like u0 = e_1).
inline InitialData initial_from_coefficients(std::vector<double> coeffs,
                                             const SpectralBasis& basis) {
  if (static_cast<int>(coeffs.size()) != basis.n_modes())
    throw DimensionMismatch("coefficient count must match n_modes");
  InitialData data;
  data.coefficients = std::move(coeffs);
  double s = 0.0;
  for (double c : data.coefficients) s += c * c;
  data.norm = std::sqrt(s);
  data.leading_index = find_leading_index(data.coefficients);
  return data;
}

/// CSV rows "n,lambda_n,u0_n" (header optional) -> basis + initial data.
inline std::pair<SpectralBasis, InitialData> load_eigenpairs_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open eigenpair file: " + path);
  std::vector<double> lambdas, coeffs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, c))
      throw ValidationError("bad eigenpair row: " + line);
    try {
      (void)std::stod(a);
    } catch (...) {
      continue;  // header row
    }
    lambdas.push_back(std::stod(b));
    coeffs.push_back(std::stod(c));
  }
  auto basis = SpectralBasis::user_supplied(std::move(lambdas));
  auto init = initial_from_coefficients(std::move(coeffs), basis);
  return {std::move(basis), std::move(init)};
}

}  // namespace hsheat
