#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsheat/ctmc.hpp"
#include "hsheat/errors.hpp"
#include "hsheat/hybrid_model.hpp"
#include "hsheat/montecarlo.hpp"
#include "hsheat/spectral.hpp"

namespace hsheat {

struct ConfigError : ValidationError {
  ConfigError(int line, const std::string& what)
      : ValidationError("config line " + std::to_string(line) + ": " + what) {}
};

/// Parsed model configuration. INI-style sections:
///   [generator] rows = -2 1 1; 3 -4 1; 1 1 -2
///   [dynamics]  alpha = 0.1 1.5 0.2
///               beta  = 1; 1            (rows per state, channels per row)
///   [spectral]  length = pi | <number>
///               n_modes = 16
///               initial = sin1 | x(pi-x) | coeffs <c1 c2 ...>
///               eigenpairs = <csv path>  (alternative to length/initial)
///   [estimator] horizon, paths, seed, grid_points, p = <list>
struct ModelConfig {
  std::vector<std::vector<double>> generator_rows;
  std::vector<double> alpha;
  std::vector<std::vector<double>> beta_rows;
  double length = std::numbers::pi;
  int n_modes = 16;
  std::string initial_kind = "sin1";
  std::vector<double> initial_coeffs;
  std::optional<std::string> eigenpair_csv;
  EstimatorConfig estimator;
  std::vector<double> p_list{2.0};

  static ModelConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    return parse(in);
  }

  static ModelConfig parse(std::istream& in) {
    ModelConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(lineno, "unterminated section");
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(lineno, "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      cfg.apply(section, key, value, lineno);
    }
    return cfg;
  }

  HybridHeatModel build_model() const {
    auto [basis, init] = build_basis_and_initial();
    Eigen::MatrixXd rates = to_matrix(generator_rows, "generator rows");
    auto gen = Generator::validate(rates);
    const int n = gen.n_states();
    if (static_cast<int>(alpha.size()) != n)
      throw ValidationError("dynamics.alpha: expected " + std::to_string(n) +
                            " entries, got " + std::to_string(alpha.size()));
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = alpha[i];
    Eigen::MatrixXd b(n, 0);
    if (!beta_rows.empty()) {
      b = to_matrix(beta_rows, "dynamics.beta");
      if (b.rows() != n)
        throw ValidationError("dynamics.beta: expected one row per state");
    }
    return HybridHeatModel(std::move(gen), std::move(basis), std::move(init),
                           std::move(a), std::move(b));
  }

 private:
  std::pair<SpectralBasis, InitialData> build_basis_and_initial() const {
    if (eigenpair_csv) return load_eigenpairs_csv(*eigenpair_csv);
    auto basis = SpectralBasis::interval(length, n_modes);
    InitialData init;
    if (initial_kind == "sin1") {
      const double L = length;
      init = project_initial(
          [L](double x) {
            return std::sqrt(2.0 / L) * std::sin(std::numbers::pi * x / L);
          },
          basis, 4 * n_modes);
    } else if (initial_kind == "x(pi-x)") {
      const double L = length;
      init = project_initial([L](double x) { return x * (L - x); }, basis,
                             4 * n_modes);
    } else if (initial_kind == "coeffs") {
      std::vector<double> c = initial_coeffs;
      c.resize(n_modes, 0.0);
      init = initial_from_coefficients(std::move(c), basis);
    } else {
      throw ValidationError("spectral.initial: unknown kind " + initial_kind);
    }
    return {std::move(basis), std::move(init)};
  }

  void apply(const std::string& section, const std::string& key,
             const std::string& value, int lineno) {
    try {
      if (section == "generator" && key == "rows") {
        generator_rows = parse_rows(value);
      } else if (section == "dynamics" && key == "alpha") {
        alpha = parse_numbers(value);
      } else if (section == "dynamics" && key == "beta") {
        beta_rows = parse_rows(value);
      } else if (section == "spectral" && key == "length") {
        length = value == "pi" ? std::numbers::pi : std::stod(value);
      } else if (section == "spectral" && key == "n_modes") {
        n_modes = std::stoi(value);
      } else if (section == "spectral" && key == "initial") {
        std::istringstream ss(value);
        ss >> initial_kind;
        if (initial_kind == "coeffs") {
          double c;
          while (ss >> c) initial_coeffs.push_back(c);
        }
      } else if (section == "spectral" && key == "eigenpairs") {
        eigenpair_csv = value;
      } else if (section == "estimator" && key == "horizon") {
        estimator.horizon = std::stod(value);
      } else if (section == "estimator" && key == "paths") {
        estimator.n_paths = std::stoi(value);
      } else if (section == "estimator" && key == "seed") {
        estimator.base_seed = std::stoull(value);
      } else if (section == "estimator" && key == "grid_points") {
        const int k = std::stoi(value);
        estimator.grid.clear();
        for (int i = 1; i <= k; ++i)
          estimator.grid.push_back(estimator.horizon * i / k);
      } else if (section == "estimator" && key == "p") {
        p_list = parse_numbers(value);
      } else {
        throw ConfigError(lineno, "unknown key [" + section + "] " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(lineno, "[" + section + "] " + key + ": " + e.what());
    }
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static std::vector<double> parse_numbers(const std::string& s) {
    std::istringstream ss(s);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) throw ValidationError("malformed number list: " + s);
    return out;
  }

  static std::vector<std::vector<double>> parse_rows(const std::string& s) {
    std::vector<std::vector<double>> rows;
    std::istringstream ss(s);
    std::string row;
    while (std::getline(ss, row, ';')) rows.push_back(parse_numbers(row));
    return rows;
  }

  static Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows,
                                   const std::string& what) {
    if (rows.empty()) throw ValidationError(what + ": empty");
    Eigen::MatrixXd m(static_cast<int>(rows.size()),
                      static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size())
        throw ValidationError(what + ": ragged rows");
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
  }
};

}  // namespace hsheat
