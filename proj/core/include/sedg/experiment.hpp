#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sedg/mesh.hpp"

namespace sedg {

struct ExperimentConfig {
  std::string scenario = "adaptation";  // checkerboard | adaptation | custom
  std::string relation = "x2";          // equal | plus2 | x1.5 | x1.75 | x2 (checkerboard)
  int p = 4;
  std::vector<int> degrees;  // custom: one isotropic degree per patch, row by row from the origin
  int nx = 3;
  int ny = 3;
  std::array<double, 4> domain{0.0, 3.0, 0.0, 3.0};  // x0, x1, y0, y1

  double gamma = 3.0;
  double beta1 = 0.15;
  double rho1 = 1.25;
  double c1sq = 10.0;
  double alpha = 1.2;
  double c_aspect = 2.0;
  double c_tune = 0.6;
  std::string dyadic_rule = "largest";  // largest | smallest
  double grading_bound = 2.0;

  // stage1-exact | stage2-exact | stage2-substructured | combined | combined-substructured
  std::string stage = "stage1-exact";
  int sweeps = 7;
  int inner_iterations = 1;
  int direct_limit = 20000;

  double lanczos_tol = 1e-4;
  int lanczos_max_it = 400;
  bool run_pcg = true;
  double pcg_tol = 1e-8;
  int pcg_max_it = 2000;
  std::uint64_t seed = 1;
  bool timing = true;

  // Sweep axes; an empty axis means the single value above.
  std::vector<int> sweep_p;
  std::vector<double> sweep_beta1;
  std::vector<double> sweep_rho1;
};

// Throws std::invalid_argument on unknown keys or bad values.
ExperimentConfig parse_config(const std::string& json_text);
void apply_override(ExperimentConfig& config, const std::string& assignment);  // "key=value"
void validate_config(const ExperimentConfig& config);

// Degree of the partner patches for the checkerboard relation.
int related_degree(const std::string& relation, int p);

struct Scenario {
  Mesh mesh;
  int q;  // the second degree of the layout (largest degree for adaptation/custom)
};

Scenario build_scenario(const ExperimentConfig& config);

struct ResultRow {
  std::string scenario;
  int p = 0;
  int q = 0;
  std::string stage;
  double gamma = 0, beta1 = 0, rho1 = 0, c1sq = 0, alpha = 0, c_aspect = 0, c_tune = 0;
  int sweeps = 0;
  double kappa = 0, lambda_min = 0, lambda_max = 0;
  long long ndof_dg = 0, ndof_cg = 0, ndof_dfe = 0;
  int pcg_iters = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0;
  std::string error;  // empty on success
  bool operator==(const ResultRow&) const = default;
};

ResultRow run_point(const ExperimentConfig& config);

// Expands the sweep axes (p outermost, then beta1, then rho1) and runs them on `threads` workers.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& config);
std::vector<ResultRow> run_sweep(const ExperimentConfig& config, int threads = 1);

std::string csv_header();
std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_json_rows(const std::string& text);

// format is "csv" or "json"; throws std::runtime_error if the file cannot be written.
void emit_results(const std::vector<ResultRow>& rows, const std::string& path, const std::string& format);

}  // namespace sedg
