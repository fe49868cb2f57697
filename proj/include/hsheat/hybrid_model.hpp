#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hsheat/ctmc.hpp"
#include "hsheat/errors.hpp"
#include "hsheat/rng.hpp"
#include "hsheat/spectral.hpp"

namespace hsheat {

/// Full problem instance: switching generator, Dirichlet eigenstructure
/// with projected initial datum, per-state drift alpha_i and noise rows
/// beta_ij (m channels; m = 0 is the deterministic equation).
struct HybridHeatModel {
  Generator generator;
  SpectralBasis basis;
  InitialData initial;
  Eigen::VectorXd alpha;   // per state
  Eigen::MatrixXd beta;    // n_states x m

  HybridHeatModel(Generator g, SpectralBasis b, InitialData u0,
                  Eigen::VectorXd a, Eigen::MatrixXd bm)
      : generator(std::move(g)),
        basis(std::move(b)),
        initial(std::move(u0)),
        alpha(std::move(a)),
        beta(std::move(bm)) {
    const int n = generator.n_states();
    if (alpha.size() != n) throw DimensionMismatch("alpha length != n_states");
    if (beta.size() > 0 && beta.rows() != n)
      throw DimensionMismatch("beta rows != n_states");
  }

  int n_states() const { return generator.n_states(); }
  int n_channels() const { return static_cast<int>(beta.cols()); }
  bool deterministic() const {
    return beta.size() == 0 || beta.cwiseAbs().maxCoeff() == 0.0;
  }

  // sigma_i^2 = sum_j beta_ij^2
  Eigen::VectorXd sigma_sq() const {
    if (beta.size() == 0) return Eigen::VectorXd::Zero(n_states());
    return beta.array().square().rowwise().sum();
  }
};

/// One Brownian realization aligned with a chain skeleton. Increments are
/// drawn per sub-segment of the partition refined by a caller-declared
/// evaluation grid, so every grid time is a partition point and the
/// realization is well defined at each queried t.
class DrivingNoise {
 public:
  DrivingNoise(const MarkovPath& path, const std::vector<double>& eval_grid,
               int n_channels, std::uint64_t seed) {
    breakpoints_.push_back(0.0);
    for (double tau : path.jump_times)
      if (tau > 0.0) breakpoints_.push_back(tau);
    for (double t : eval_grid) {
      if (t < 0.0 || t > path.horizon)
        throw TimeOutOfRange("evaluation time outside [0, horizon]");
      if (t > 0.0) breakpoints_.push_back(t);
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()),
                       breakpoints_.end());
    const int nseg = static_cast<int>(breakpoints_.size()) - 1;
    segment_state_.resize(nseg);
    for (int k = 0; k < nseg; ++k)
      segment_state_[k] = path.state_at(breakpoints_[k]);
    increments_.resize(n_channels, std::vector<double>(nseg));
    std::mt19937_64 rng = make_rng(seed, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < n_channels; ++j)
      for (int k = 0; k < nseg; ++k)
        increments_[j][k] =
            std::sqrt(breakpoints_[k + 1] - breakpoints_[k]) * normal(rng);
  }

  int n_channels() const { return static_cast<int>(increments_.size()); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int segment_state(int k) const { return segment_state_[k]; }
  double increment(int channel, int k) const { return increments_[channel][k]; }

  // int_0^t beta_j(r(s)) dB_j(s); coefficients are constant per segment.
  double weighted_integral(int channel, const Eigen::MatrixXd& beta,
                           double t) const {
    const int kend = segment_count_to(t);
    double acc = 0.0;
    for (int k = 0; k < kend; ++k)
      acc += beta(segment_state_[k], channel) * increments_[channel][k];
    return acc;
  }

  // Number of whole segments in [0, t]; t must be a partition point.
  int segment_count_to(double t) const {
    if (t == 0.0) return 0;
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(),
                               t - 1e-12 * std::max(t, 1.0));
    if (it == breakpoints_.end() ||
        std::abs(*it - t) > 1e-12 * std::max(t, 1.0))
      throw TimeOutOfRange("noise not realized at this time; add it to the grid");
    return static_cast<int>(it - breakpoints_.begin());
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<int> segment_state_;
  std::vector<std::vector<double>> increments_;  // [channel][segment]
};

/// Log-sum-exp with max shift.
inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Pathwise evaluation of the explicit solution: the deterministic mode
/// sum along the chain path times the x-independent exponential factor
/// carried by the noise. All time integrals are exact on the skeleton;
/// everything is accumulated in the log domain.
class PathSolution {
 public:
  PathSolution(const HybridHeatModel& model, MarkovPath path,
               DrivingNoise noise)
      : model_(model), path_(std::move(path)), noise_(std::move(noise)) {}

  const MarkovPath& path() const { return path_; }
  const DrivingNoise& noise() const { return noise_; }

  // A(t) = int alpha(r) ds, exact
  double drift_integral(double t) const {
    return t == 0.0 ? 0.0 : path_integral(path_, model_.alpha, t);
  }

  // Q(t) = int sigma^2(r) ds, exact
  double variance_integral(double t) const {
    return t == 0.0 ? 0.0 : path_integral(path_, model_.sigma_sq(), t);
  }

  // log ||v(t)||, v the solution of the noiseless switching equation
  double log_deterministic_norm(double t) const {
    const double a = drift_integral(t);
    std::vector<double> terms;
    terms.reserve(model_.basis.n_modes());
    for (int n = 1; n <= model_.basis.n_modes(); ++n) {
      const double c = model_.initial.coeff(n);
      if (c == 0.0) continue;
      terms.push_back(2.0 * (-model_.basis.eigenvalue(n) * t + a) +
                      2.0 * std::log(std::abs(c)));
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    return 0.5 * log_sum_exp(terms);
  }

  double deterministic_norm(double t) const {
    return std::exp(log_deterministic_norm(t));
  }

  // log S(t), the exponential factor exp{-Q/2 + sum_j int beta_j dB_j}
  double log_stochastic_factor(double t) const {
    double m = 0.0;
    for (int j = 0; j < noise_.n_channels(); ++j)
      m += noise_.weighted_integral(j, model_.beta, t);
    return -0.5 * variance_integral(t) + m;
  }

  double stochastic_factor(double t) const {
    return std::exp(log_stochastic_factor(t));
  }

  double log_solution_norm(double t) const {
    return log_deterministic_norm(t) + log_stochastic_factor(t);
  }

  double solution_norm(double t) const {
    return std::exp(log_solution_norm(t));
  }

  // z_n(t), the n-th Galerkin coefficient
  double mode_coefficient(int n, double t) const {
    if (n < 1 || n > model_.basis.n_modes())
      throw ModeOutOfRange("mode index outside 1..n_modes");
    const double c = model_.initial.coeff(n);
    if (c == 0.0) return 0.0;
    const double log_mag = -model_.basis.eigenvalue(n) * t +
                           drift_integral(t) + log_stochastic_factor(t);
    return c * std::exp(log_mag);
  }

  // u(t, x) on a grid of interior points (interval basis only)
  std::vector<double> evaluate_field(double t,
                                     const std::vector<double>& x_grid) const {
    const double L = model_.basis.domain_length();
    for (double x : x_grid)
      if (x <= 0.0 || x >= L)
        throw PointOutsideDomain("grid point outside (0, L)");
    const double a = drift_integral(t);
    const double s = stochastic_factor(t);
    std::vector<double> out(x_grid.size(), 0.0);
    for (int n = 1; n <= model_.basis.n_modes(); ++n) {
      const double c = model_.initial.coeff(n);
      if (c == 0.0) continue;
      const double amp = std::exp(-model_.basis.eigenvalue(n) * t + a) * c;
      for (std::size_t q = 0; q < x_grid.size(); ++q)
        out[q] += amp * model_.basis.eval(n, x_grid[q]);
    }
    for (double& v : out) v *= s;
    return out;
  }

  // Bound on the mass dropped by mode truncation at time t:
  // sqrt(sum_{n>N} (u0_n)^2) * exp{-lambda_{N+1} t + A(t)} * S(t).
  double truncation_tail_bound(double t) const {
    const double tail = std::sqrt(model_.initial.tail_sq());
    if (tail == 0.0) return 0.0;
    const int nm = model_.basis.n_modes();
    double lambda_next;
    if (model_.basis.has_eval()) {
      const double k = (nm + 1) * std::numbers::pi / model_.basis.domain_length();
      lambda_next = k * k;
    } else {
      lambda_next = model_.basis.eigenvalue(nm);
    }
    return tail * std::exp(-lambda_next * t + drift_integral(t) +
                           log_stochastic_factor(t));
  }

 private:
  const HybridHeatModel& model_;
  MarkovPath path_;
  DrivingNoise noise_;
};

}  // namespace hsheat
