#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hsheat/montecarlo.hpp"
#include "hsheat/presets.hpp"

using namespace hsheat;

TEST_CASE("sample-exponent estimator on the paper's single-mode models") {
  EstimatorConfig cfg;
  cfg.horizon = 200.0;
  cfg.n_paths = 200;
  cfg.base_seed = 7;

  auto unstable = estimate_sample_exponent(presets::eq_16(), cfg);
  REQUIRE(unstable.analytic_reference == Catch::Approx(0.5).margin(1e-14));
  REQUIRE(std::abs(unstable.point - 0.5) <= 3.0 * unstable.standard_error);

  auto stable = estimate_sample_exponent(presets::eq_0(), cfg);
  REQUIRE(std::abs(stable.point + 0.5) <= 3.0 * stable.standard_error);
}

TEST_CASE("noiseless single-state run is deterministic") {
  EstimatorConfig cfg;
  cfg.horizon = 50.0;
  cfg.n_paths = 20;
  auto rep = estimate_sample_exponent(presets::single_state(0.1, 0.0), cfg);
  REQUIRE(rep.point == Catch::Approx(-0.9).margin(1e-12));
  REQUIRE(rep.standard_error == 0.0);
  for (double v : rep.per_path) REQUIRE(v == rep.per_path.front());
}

TEST_CASE("estimator reproducibility and seed independence") {
  EstimatorConfig cfg;
  cfg.horizon = 50.0;
  cfg.n_paths = 100;
  cfg.base_seed = 11;
  auto model = presets::example_4_2(2.0);

  auto a = estimate_sample_exponent(model, cfg);
  auto b = estimate_sample_exponent(model, cfg);
  REQUIRE(a.per_path == b.per_path);
  REQUIRE(a.point == b.point);

  cfg.base_seed = 987654;
  auto c = estimate_sample_exponent(model, cfg);
  REQUIRE(c.per_path != a.per_path);
  const double se =
      std::sqrt(a.standard_error * a.standard_error +
                c.standard_error * c.standard_error);
  REQUIRE(std::abs(a.point - c.point) <= 4.0 * se);
}

TEST_CASE("moment estimator on the scalar model") {
  // short horizon: the fully sampled log-weights have variance p^2 beta^2 t,
  // and the empirical mean of exp needs M >> exp(variance)
  EstimatorConfig cfg;
  cfg.horizon = 1.0;
  cfg.n_paths = 50000;
  cfg.base_seed = 5;
  cfg.sample_noise_factor = true;  // fully sampled Brownian factor
  auto model = presets::single_state(2.0, 1.0);
  auto rep = estimate_moment_exponent(model, 2.0, cfg);
  REQUIRE(rep.analytic_reference == Catch::Approx(3.0).margin(1e-10));
  REQUIRE(std::abs(rep.point - 3.0) <= 3.0 * rep.standard_error);
}

TEST_CASE("noiseless moment slope is p times the heat exponent") {
  EstimatorConfig cfg;
  cfg.horizon = 30.0;
  cfg.n_paths = 5;
  auto model = presets::single_state(0.1, 0.0);
  auto rep = estimate_moment_exponent(model, 2.0, cfg);
  REQUIRE(rep.point == Catch::Approx(-1.8).margin(1e-10));
  REQUIRE(rep.standard_error <= 1e-12);
}

TEST_CASE("variance-reduced and fully-sampled moment estimators agree") {
  // single-mode initial data: the Brownian factor's p-th moment has the
  // closed form used by the reduced estimator
  EstimatorConfig cfg;
  cfg.horizon = 5.0;
  cfg.n_paths = 4000;
  cfg.base_seed = 19;
  auto model = presets::example_4_2(2.0);
  const double p = 2.0;

  auto reduced = estimate_moment_exponent(model, p, cfg);
  cfg.sample_noise_factor = true;
  cfg.base_seed = 20;
  auto sampled = estimate_moment_exponent(model, p, cfg);
  const double se = std::sqrt(reduced.standard_error * reduced.standard_error +
                              sampled.standard_error * sampled.standard_error);
  REQUIRE(std::abs(reduced.point - sampled.point) <= 3.0 * se);
  // the analytic integration earns its keep
  REQUIRE(reduced.standard_error < sampled.standard_error);
}

TEST_CASE("moment estimator flags heavy tails on the switching model") {
  EstimatorConfig cfg;
  cfg.horizon = 20.0;
  cfg.n_paths = 4000;
  cfg.base_seed = 3;
  auto model = presets::example_4_2(2.0);
  auto rep = estimate_moment_exponent(model, 2.0, cfg);
  REQUIRE(rep.heavy_tail_warning);
}

TEST_CASE("standard error scales like 1/sqrt(M)") {
  auto model = presets::example_4_2(2.0);
  std::vector<double> ses;
  for (int m : {100, 1000, 10000}) {
    EstimatorConfig cfg;
    cfg.horizon = 20.0;
    cfg.n_paths = m;
    cfg.base_seed = 29;
    ses.push_back(estimate_sample_exponent(model, cfg).standard_error);
  }
  for (std::size_t k = 0; k + 1 < ses.size(); ++k) {
    const double ratio = ses[k] / ses[k + 1];
    REQUIRE(ratio >= std::sqrt(10.0) * 0.8);
    REQUIRE(ratio <= std::sqrt(10.0) * 1.2);
  }
}

TEST_CASE("convergence table") {
  SECTION("noiseless gaps are identically zero") {
    EstimatorConfig cfg;
    cfg.n_paths = 5;
    auto rows = convergence_table(presets::single_state(0.1, 0.0), 0.0,
                                  {10.0, 50.0, 200.0}, cfg);
    for (const auto& r : rows) REQUIRE(r.gap <= 1e-12);
  }

  SECTION("sample-exponent gap shrinks with the horizon") {
    EstimatorConfig cfg;
    cfg.n_paths = 400;
    cfg.base_seed = 37;
    auto rows = convergence_table(presets::eq_16(), 0.0,
                                  {10.0, 100.0, 1000.0}, cfg);
    // allow noise: compare the shortest and longest horizons only
    REQUIRE(rows.back().gap <= rows.front().gap + 2.0 * rows.front().standard_error);
    REQUIRE(rows.back().standard_error < rows.front().standard_error);
  }
}

TEST_CASE("finite-t Monte Carlo moments match the chain-functional oracle") {
  // E ||u(t)||^p = |u0_{n0}|^p E exp{-p lambda_{n0} t + int g(r) ds} for a
  // single-mode initial datum, so the MC curve must track the matrix
  // exponential route at every grid time
  auto model = presets::example_4_2(2.0);
  const double p = 2.0;
  EstimatorConfig cfg;
  cfg.horizon = 10.0;
  cfg.n_paths = 60000;
  cfg.base_seed = 41;
  cfg.start_state = 0;
  cfg.grid = {2.0, 4.0, 6.0, 8.0, 10.0};
  auto rep = estimate_moment_exponent(model, p, cfg);

  const Eigen::VectorXd g = moment_weights(model, p);
  auto oracle = growth_oracle(model.generator, g, cfg.grid);
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    const double t = cfg.grid[k];
    const double expected =
        -p * model.basis.eigenvalue(model.initial.leading_index) * t +
        oracle.rates(static_cast<int>(k), 0) * t;
    REQUIRE(std::abs(rep.curve_log_moment[k] - expected) <=
            3.0 * std::max(rep.curve_se[k], 1e-3));
  }
}
