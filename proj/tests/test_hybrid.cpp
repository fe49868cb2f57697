#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hsheat/hybrid_model.hpp"
#include "hsheat/presets.hpp"
#include "hsheat/rng.hpp"

using namespace hsheat;
using std::numbers::pi;

namespace {

MarkovPath constant_path(int state, double horizon) {
  MarkovPath p;
  p.jump_times = {0.0};
  p.states = {state};
  p.horizon = horizon;
  return p;
}

PathSolution solve_at(const HybridHeatModel& model, MarkovPath path,
                      const std::vector<double>& grid, std::uint64_t seed) {
  DrivingNoise noise(path, grid, model.n_channels(), seed);
  return PathSolution(model, std::move(path), std::move(noise));
}

}  // namespace

TEST_CASE("deterministic norm") {
  auto model = presets::single_state(0.1, 0.0);
  auto sol = solve_at(model, constant_path(0, 10.0), {}, 1);

  REQUIRE(sol.deterministic_norm(0.0) ==
          Catch::Approx(model.initial.norm).margin(1e-14));
  for (double t : {0.5, 2.0, 7.5})
    REQUIRE(sol.deterministic_norm(t) ==
            Catch::Approx(std::exp(-0.9 * t)).epsilon(1e-12));
}

TEST_CASE("deterministic norm ergodic limit (three-state model)") {
  auto model = presets::example_3_5();
  const double t = 500.0;
  const int n_paths = 50;
  double mean = 0.0, sq = 0.0;
  for (int m = 0; m < n_paths; ++m) {
    MarkovPath path = simulate_path(model.generator, m % 3, t, 9000 + m);
    PathSolution sol(model, path, DrivingNoise(path, {}, 0, 1));
    const double v = sol.log_deterministic_norm(t) / t;
    mean += v;
    sq += v * v;
  }
  mean /= n_paths;
  const double se =
      std::sqrt((sq / n_paths - mean * mean) / (n_paths - 1));
  REQUIRE(std::abs(mean - (-44.0 / 75.0)) <= 3.0 * se);
}

TEST_CASE("mode coefficients") {
  SECTION("noiseless reduction and zero modes") {
    auto model = presets::example_3_5();
    MarkovPath path = simulate_path(model.generator, 0, 5.0, 11);
    PathSolution sol(model, path, DrivingNoise(path, {}, 0, 2));
    const double a = sol.drift_integral(3.0);
    REQUIRE(sol.mode_coefficient(1, 3.0) ==
            Catch::Approx(std::exp(-1.0 * 3.0 + a)).epsilon(1e-12));
    for (int n = 2; n <= model.basis.n_modes(); ++n)
      REQUIRE(sol.mode_coefficient(n, 3.0) == 0.0);
    REQUIRE_THROWS_AS(sol.mode_coefficient(0, 1.0), ModeOutOfRange);
    REQUIRE_THROWS_AS(sol.mode_coefficient(99, 1.0), ModeOutOfRange);
  }

  SECTION("geometric Brownian law of log z_1") {
    const double alpha = 0.3, beta = 0.7, t = 1.0;
    auto model = presets::single_state(alpha, beta);
    const int draws = 10000;
    double mean = 0.0, sq = 0.0;
    for (int m = 0; m < draws; ++m) {
      auto sol = solve_at(model, constant_path(0, t), {t}, 500 + m);
      const double logz = std::log(sol.mode_coefficient(1, t));
      mean += logz;
      sq += logz * logz;
    }
    mean /= draws;
    const double var = sq / draws - mean * mean;
    const double mu_expected = (-1.0 + alpha - 0.5 * beta * beta) * t;
    const double var_expected = beta * beta * t;
    const double se_mean = std::sqrt(var_expected / draws);
    const double se_var = var_expected * std::sqrt(2.0 / (draws - 1));
    REQUIRE(std::abs(mean - mu_expected) <= 3.0 * se_mean);
    REQUIRE(std::abs(var - var_expected) <= 3.0 * se_var);
  }
}

TEST_CASE("stochastic factor") {
  auto model = presets::single_state(0.0, 1.0);

  SECTION("trivial values") {
    auto sol = solve_at(model, constant_path(0, 4.0), {2.0}, 3);
    REQUIRE(sol.stochastic_factor(0.0) == 1.0);
    auto det = presets::single_state(0.5, 0.0);
    auto dsol = solve_at(det, constant_path(0, 4.0), {2.0}, 3);
    REQUIRE(dsol.stochastic_factor(2.0) == 1.0);
  }

  SECTION("exponential martingale: E S(t) = 1") {
    const double t = 1.0;
    const int draws = 10000;
    double mean = 0.0, sq = 0.0;
    for (int m = 0; m < draws; ++m) {
      auto sol = solve_at(model, constant_path(0, t), {t}, 40000 + m);
      const double s = sol.stochastic_factor(t);
      mean += s;
      sq += s * s;
    }
    mean /= draws;
    const double se = std::sqrt((sq / draws - mean * mean) / (draws - 1));
    REQUIRE(std::abs(mean - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("solution norm identities") {
  auto model = presets::example_4_2(2.0);
  MarkovPath path = simulate_path(model.generator, 0, 6.0, 21);
  const std::vector<double> grid{1.0, 3.0, 6.0};
  DrivingNoise noise(path, grid, model.n_channels(), 77);
  PathSolution sol(model, path, noise);

  for (double t : grid) {
    // factorization
    REQUIRE(std::abs(sol.solution_norm(t) -
                     sol.stochastic_factor(t) * sol.deterministic_norm(t)) <=
            1e-12 * sol.solution_norm(t));
    // two forms of the mode expansion
    double sq = 0.0;
    for (int n = 1; n <= model.basis.n_modes(); ++n) {
      const double z = sol.mode_coefficient(n, t);
      sq += z * z;
    }
    REQUIRE(std::sqrt(sq) ==
            Catch::Approx(sol.solution_norm(t)).epsilon(1e-10));
  }
}

TEST_CASE("noiseless model collapses to the deterministic norm") {
  // same generator/drifts, beta identically zero through the noise API
  Eigen::MatrixXd rates(2, 2);
  rates << -4, 4, 2, -2;
  auto gen = Generator::validate(rates);
  auto basis = SpectralBasis::interval(pi, 16);
  auto init = presets::first_mode_initial(basis);
  Eigen::VectorXd alpha(2);
  alpha << 2.0, 1.0;
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2, 1);
  HybridHeatModel model(std::move(gen), std::move(basis), std::move(init),
                        std::move(alpha), std::move(beta));
  MarkovPath path = simulate_path(model.generator, 0, 8.0, 5);
  auto sol = solve_at(model, path, {2.0, 8.0}, 9);
  for (double t : {2.0, 8.0})
    REQUIRE(sol.solution_norm(t) == sol.deterministic_norm(t));
}

TEST_CASE("unvisited states do not affect the realization") {
  auto model_a = presets::two_state(0.5, -1.0, 0.8, 0.3, 1.0, 1.0);
  auto model_b = presets::two_state(0.5, -1.0, 0.8, 99.0, 1.0, 1.0);
  MarkovPath path = constant_path(0, 5.0);  // never visits state 2
  const std::vector<double> grid{1.0, 5.0};
  DrivingNoise na(path, grid, 1, 42), nb(path, grid, 1, 42);
  PathSolution a(model_a, path, na), b(model_b, path, nb);
  for (double t : grid) {
    REQUIRE(a.solution_norm(t) == b.solution_norm(t));
    REQUIRE(a.stochastic_factor(t) == b.stochastic_factor(t));
  }
}

TEST_CASE("field evaluation") {
  SECTION("heat semigroup on the first mode") {
    auto model = presets::single_state(0.0, 0.0);
    auto sol = solve_at(model, constant_path(0, 3.0), {}, 1);
    const std::vector<double> xs{0.3, 1.0, 2.2, 3.0};
    for (double t : {0.0, 1.0, 2.5}) {
      auto u = sol.evaluate_field(t, xs);
      for (std::size_t q = 0; q < xs.size(); ++q)
        REQUIRE(u[q] == Catch::Approx(std::exp(-t) *
                                      std::sqrt(2.0 / pi) * std::sin(xs[q]))
                            .margin(1e-10));
    }
  }

  SECTION("Dirichlet decay toward the boundary") {
    auto model = presets::example_3_5();
    MarkovPath path = simulate_path(model.generator, 0, 2.0, 8);
    PathSolution sol(model, path, DrivingNoise(path, {}, 0, 8));
    auto near = sol.evaluate_field(1.0, {1e-6, pi - 1e-6});
    REQUIRE(std::abs(near[0]) < 1e-5);
    REQUIRE(std::abs(near[1]) < 1e-5);
    REQUIRE_THROWS_AS(sol.evaluate_field(1.0, {0.0}), PointOutsideDomain);
    REQUIRE_THROWS_AS(sol.evaluate_field(1.0, {pi}), PointOutsideDomain);
  }

  SECTION("field equals the mode expansion") {
    auto model = presets::example_4_2(2.0);
    MarkovPath path = simulate_path(model.generator, 0, 4.0, 31);
    auto sol = solve_at(model, path, {2.0}, 13);
    const std::vector<double> xs{0.7, 1.9};
    auto u = sol.evaluate_field(2.0, xs);
    for (std::size_t q = 0; q < xs.size(); ++q) {
      double expect = 0.0;
      for (int n = 1; n <= model.basis.n_modes(); ++n)
        expect += sol.mode_coefficient(n, 2.0) * model.basis.eval(n, xs[q]);
      REQUIRE(u[q] == Catch::Approx(expect).epsilon(1e-10).margin(1e-12));
    }
  }
}

TEST_CASE("truncation tail bound dominates the dropped mass") {
  auto basis_small = SpectralBasis::interval(pi, 4);
  auto basis_big = SpectralBasis::interval(pi, 64);
  auto u0 = [](double x) { return x * (pi - x); };
  auto init_small = project_initial(u0, basis_small, 64);
  auto init_big = project_initial(u0, basis_big, 300);
  // consistent total norm for the tail estimate
  init_small.norm = init_big.norm;
  Eigen::MatrixXd rates(1, 1);
  rates << 0.0;
  Eigen::VectorXd alpha(1);
  alpha << 0.2;
  HybridHeatModel small(Generator::validate(rates), basis_small, init_small,
                        alpha, Eigen::MatrixXd(1, 0));
  HybridHeatModel big(Generator::validate(rates), basis_big, init_big, alpha,
                      Eigen::MatrixXd(1, 0));
  auto sol_small = solve_at(small, constant_path(0, 2.0), {}, 1);
  auto sol_big = solve_at(big, constant_path(0, 2.0), {}, 1);
  for (double t : {0.1, 0.5, 2.0}) {
    const double err =
        std::abs(sol_big.deterministic_norm(t) - sol_small.deterministic_norm(t));
    REQUIRE(err <= sol_small.truncation_tail_bound(t) + 1e-14);
  }
}

TEST_CASE("Euler-Maruyama oracle converges to the explicit solution") {
  auto model = presets::example_4_2(2.0);
  const double T = 1.0;
  const int n_paths = 1000;
  const std::vector<int> fine_per_seg{256, 128, 64, 32, 16};  // coarsened by 2

  std::vector<double> mean_err(fine_per_seg.size(), 0.0);
  for (int m = 0; m < n_paths; ++m) {
    MarkovPath path = simulate_path(model.generator, m % 2, T, 700 + m);
    DrivingNoise noise(path, {T}, 1, 300 + m);
    PathSolution sol(model, path, noise);
    const double exact = sol.solution_norm(T);

    // refine each segment increment to the finest level with a
    // sum-constrained Gaussian bridge, then coarsen by pairwise sums
    const auto& bp = noise.breakpoints();
    const int nseg = static_cast<int>(bp.size()) - 1;
    std::mt19937_64 rng = make_rng(900, 31 * m);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> fine(nseg);
    const int finest = fine_per_seg.front();
    for (int k = 0; k < nseg; ++k) {
      const double h = (bp[k + 1] - bp[k]) / finest;
      double sum = 0.0;
      fine[k].resize(finest);
      for (int i = 0; i < finest; ++i) {
        fine[k][i] = std::sqrt(h) * normal(rng);
        sum += fine[k][i];
      }
      const double fix = (noise.increment(0, k) - sum) / finest;
      for (int i = 0; i < finest; ++i) fine[k][i] += fix;
    }

    for (std::size_t lev = 0; lev < fine_per_seg.size(); ++lev) {
      const int per_seg = fine_per_seg[lev];
      const int stride = finest / per_seg;
      // Galerkin system decouples mode-by-mode; step each retained mode
      std::vector<double> z(model.basis.n_modes());
      for (int n = 1; n <= model.basis.n_modes(); ++n)
        z[n - 1] = model.initial.coeff(n);
      for (int k = 0; k < nseg; ++k) {
        const int state = noise.segment_state(k);
        const double h = (bp[k + 1] - bp[k]) / per_seg;
        for (int i = 0; i < per_seg; ++i) {
          double db = 0.0;
          for (int s = 0; s < stride; ++s) db += fine[k][i * stride + s];
          for (int n = 1; n <= model.basis.n_modes(); ++n) {
            const double drift =
                (-model.basis.eigenvalue(n) + model.alpha(state)) * z[n - 1];
            z[n - 1] += drift * h + model.beta(state, 0) * z[n - 1] * db;
          }
        }
      }
      double sq = 0.0;
      for (double v : z) sq += v * v;
      mean_err[lev] += std::abs(std::sqrt(sq) - exact);
    }
  }
  for (double& e : mean_err) e /= n_paths;

  // finest step at index 0; errors must grow as steps coarsen, and the
  // fitted order across the halvings must be at least 1/2
  double order_sum = 0.0;
  for (std::size_t lev = 0; lev + 1 < mean_err.size(); ++lev)
    order_sum += std::log2(mean_err[lev + 1] / mean_err[lev]);
  const double order = order_sum / (mean_err.size() - 1);
  INFO("empirical strong order " << order);
  REQUIRE(order >= 0.5);
}
