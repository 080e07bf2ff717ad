#include "sedg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sedg/krylov.hpp"
#include "sedg/precond.hpp"

namespace sedg {

namespace {

using nlohmann::json;

json to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["relation"] = c.relation;
  j["p"] = c.p;
  j["degrees"] = c.degrees;
  j["nx"] = c.nx;
  j["ny"] = c.ny;
  j["domain"] = c.domain;
  j["gamma"] = c.gamma;
  j["beta1"] = c.beta1;
  j["rho1"] = c.rho1;
  j["c1sq"] = c.c1sq;
  j["alpha"] = c.alpha;
  j["c_aspect"] = c.c_aspect;
  j["c_tune"] = c.c_tune;
  j["dyadic_rule"] = c.dyadic_rule;
  j["grading_bound"] = c.grading_bound;
  j["stage"] = c.stage;
  j["sweeps"] = c.sweeps;
  j["inner_iterations"] = c.inner_iterations;
  j["direct_limit"] = c.direct_limit;
  j["lanczos_tol"] = c.lanczos_tol;
  j["lanczos_max_it"] = c.lanczos_max_it;
  j["run_pcg"] = c.run_pcg;
  j["pcg_tol"] = c.pcg_tol;
  j["pcg_max_it"] = c.pcg_max_it;
  j["seed"] = c.seed;
  j["timing"] = c.timing;
  j["sweep"] = {{"p", c.sweep_p}, {"beta1", c.sweep_beta1}, {"rho1", c.sweep_rho1}};
  return j;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig from_json(const json& j) {
  const ExperimentConfig defaults;
  const json known = to_json(defaults);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key: " + key);
  }
  ExperimentConfig c;
  try {
    read(j, "scenario", c.scenario);
    read(j, "relation", c.relation);
    read(j, "p", c.p);
    read(j, "degrees", c.degrees);
    read(j, "nx", c.nx);
    read(j, "ny", c.ny);
    read(j, "domain", c.domain);
    read(j, "gamma", c.gamma);
    read(j, "beta1", c.beta1);
    read(j, "rho1", c.rho1);
    read(j, "c1sq", c.c1sq);
    read(j, "alpha", c.alpha);
    read(j, "c_aspect", c.c_aspect);
    read(j, "c_tune", c.c_tune);
    read(j, "dyadic_rule", c.dyadic_rule);
    read(j, "grading_bound", c.grading_bound);
    read(j, "stage", c.stage);
    read(j, "sweeps", c.sweeps);
    read(j, "inner_iterations", c.inner_iterations);
    read(j, "direct_limit", c.direct_limit);
    read(j, "lanczos_tol", c.lanczos_tol);
    read(j, "lanczos_max_it", c.lanczos_max_it);
    read(j, "run_pcg", c.run_pcg);
    read(j, "pcg_tol", c.pcg_tol);
    read(j, "pcg_max_it", c.pcg_max_it);
    read(j, "seed", c.seed);
    read(j, "timing", c.timing);
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      for (const auto& [key, value] : s.items()) {
        if (key != "p" && key != "beta1" && key != "rho1") throw std::invalid_argument("unknown sweep axis: " + key);
      }
      read(s, "p", c.sweep_p);
      read(s, "beta1", c.sweep_beta1);
      read(s, "rho1", c.sweep_rho1);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  validate_config(c);
  return c;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json j = to_json(config);
  if (key.rfind("sweep.", 0) == 0) {
    j["sweep"][key.substr(6)] = value;
  } else {
    if (!j.contains(key)) throw std::invalid_argument("unknown config key: " + key);
    j[key] = value;
  }
  config = from_json(j);
}

int related_degree(const std::string& relation, int p) {
  if (relation == "equal") return p;
  if (relation == "plus2") return p + 2;
  if (relation == "x1.5") {
    if (p % 2 != 0) throw std::invalid_argument("relation x1.5 needs an even p");
    return 3 * p / 2;
  }
  if (relation == "x1.75") {
    if (p % 4 != 0) throw std::invalid_argument("relation x1.75 needs p divisible by 4");
    return 7 * p / 4;
  }
  if (relation == "x2") return 2 * p;
  throw std::invalid_argument("unknown degree relation: " + relation);
}

void validate_config(const ExperimentConfig& c) {
  if (c.scenario != "checkerboard" && c.scenario != "adaptation" && c.scenario != "custom") {
    throw std::invalid_argument("unknown scenario: " + c.scenario);
  }
  if (c.p < 1) throw std::invalid_argument("p must be >= 1");
  for (int p : c.sweep_p) {
    if (p < 1) throw std::invalid_argument("sweep p values must be >= 1");
    if (c.scenario == "checkerboard") related_degree(c.relation, p);
  }
  if (c.scenario == "checkerboard") related_degree(c.relation, c.p);
  if (c.nx < 1 || c.ny < 1) throw std::invalid_argument("patch grid must be at least 1x1");
  if (c.scenario == "custom" && static_cast<int>(c.degrees.size()) != c.nx * c.ny) {
    throw std::invalid_argument("custom scenario needs nx*ny degrees");
  }
  if (!(c.gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (!(c.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (c.dyadic_rule != "largest" && c.dyadic_rule != "smallest") throw std::invalid_argument("dyadic_rule must be largest or smallest");
  static const char* stages[] = {"stage1-exact", "stage2-exact", "stage2-substructured", "combined",
                                 "combined-substructured"};
  bool ok = false;
  for (const char* s : stages) ok = ok || c.stage == s;
  if (!ok) throw std::invalid_argument("unknown stage: " + c.stage);
  if (c.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  if (c.inner_iterations < 1) throw std::invalid_argument("inner_iterations must be >= 1");
}

Scenario build_scenario(const ExperimentConfig& c) {
  validate_config(c);
  std::vector<Degree> deg(static_cast<std::size_t>(c.nx * c.ny));
  int q = c.p;
  for (int j = 0; j < c.ny; ++j) {
    for (int i = 0; i < c.nx; ++i) {
      int d;
      if (c.scenario == "checkerboard") {
        q = related_degree(c.relation, c.p);
        d = (i + j) % 2 == 0 ? c.p : q;
      } else if (c.scenario == "adaptation") {
        // Rings around the origin patch; the increment doubles with each ring.
        const int ring = std::max(i, j);
        d = c.p + std::max(1, c.p / 4) * ((1 << ring) - 1);
        q = std::max(q, d);
      } else {
        d = c.degrees[i + c.nx * j];
        if (d < 1) throw std::invalid_argument("custom degrees must be >= 1");
        q = std::max(q, d);
      }
      deg[i + c.nx * j] = {d, d};
    }
  }
  if (c.scenario == "custom") q = *std::max_element(c.degrees.begin(), c.degrees.end());
  Box domain{Interval(c.domain[0], c.domain[1]), Interval(c.domain[2], c.domain[3])};
  Mesh mesh = make_tensor_mesh(domain, c.nx, c.ny, deg);
  GradingBounds bounds{c.grading_bound, c.grading_bound, c.grading_bound};
  validate_grading(mesh, bounds);
  return {std::move(mesh), q};
}

ResultRow run_point(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRow row;
  row.scenario = c.scenario;
  row.p = c.p;
  row.stage = c.stage;
  row.gamma = c.gamma;
  row.beta1 = c.beta1;
  row.rho1 = c.rho1;
  row.c1sq = c.c1sq;
  row.alpha = c.alpha;
  row.c_aspect = c.c_aspect;
  row.c_tune = c.c_tune;
  row.sweeps = c.stage.find("substructured") != std::string::npos ? c.sweeps : 0;
  row.seed = c.seed;
  try {
    const Scenario sc = build_scenario(c);
    row.q = sc.q;
    StackOptions opt;
    opt.weights = {c.beta1, c.rho1, c.c1sq, c.gamma};
    opt.alpha = c.alpha;
    opt.c_aspect = c.c_aspect;
    opt.c_tune = c.c_tune;
    opt.sweeps = c.sweeps;
    opt.inner_iterations = c.inner_iterations;
    opt.direct_limit = c.direct_limit;
    opt.dyadic_rule = c.dyadic_rule == "smallest" ? ReferenceRule::kSmallest : ReferenceRule::kLargest;
    opt.b2 = c.stage.find("substructured") != std::string::npos ? B2Mode::kSubstructured : B2Mode::kExact;

    const double pi = std::numbers::pi;
    auto f = [pi](double x, double y) { return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };

    std::shared_ptr<LinearOperator> a_op, c_op;
    Eigen::VectorXd rhs;
    if (c.stage.rfind("stage2", 0) == 0) {
      const DofMap dg = build_dofmap(sc.mesh, SpaceKind::kSeDg);
      auto secg = std::make_shared<DofMap>(build_dofmap(sc.mesh, SpaceKind::kSeCg));
      const StageTwoParts parts = build_stage_two(sc.mesh, *secg, opt);
      a_op = std::make_shared<MatrixOperator>(assemble_conforming(sc.mesh, *secg));
      c_op = parts.preconditioner;
      rhs = secg->global_prolongation().transpose() * assemble_rhs_ni(sc.mesh, dg, f);
      row.ndof_dg = dg.num_dofs();
      row.ndof_cg = secg->num_dofs();
      row.ndof_dfe = parts.dfe->num_dofs();
      // The transfer holds references into secg and the parts; keep them alive for this scope.
      const SpectrumEstimate est = estimate_condition(*a_op, *c_op, c.lanczos_tol, c.lanczos_max_it, c.seed);
      row.kappa = est.kappa;
      row.lambda_min = est.lambda_min;
      row.lambda_max = est.lambda_max;
      if (!est.converged) row.error = "lanczos did not converge";
      if (c.run_pcg) row.pcg_iters = pcg(*a_op, *c_op, rhs, c.pcg_tol, c.pcg_max_it).iterations;
    } else {
      opt.inner = c.stage == "stage1-exact" ? StageOneInner::kAuto : StageOneInner::kStageTwo;
      const PreconditionerStack st = compose_two_stage(sc.mesh, opt);
      a_op = std::make_shared<MatrixOperator>(*st.a);
      c_op = st.preconditioner;
      rhs = assemble_rhs_ni(sc.mesh, *st.dg, f);
      row.ndof_dg = st.dg->num_dofs();
      row.ndof_cg = st.secg->num_dofs();
      row.ndof_dfe = st.stage_two.dfe ? st.stage_two.dfe->num_dofs() : 0;
      const SpectrumEstimate est = estimate_condition(*a_op, *c_op, c.lanczos_tol, c.lanczos_max_it, c.seed);
      row.kappa = est.kappa;
      row.lambda_min = est.lambda_min;
      row.lambda_max = est.lambda_max;
      if (!est.converged) row.error = "lanczos did not converge";
      if (c.run_pcg) row.pcg_iters = pcg(*a_op, *c_op, rhs, c.pcg_tol, c.pcg_max_it).iterations;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.kappa = row.lambda_min = row.lambda_max = std::nan("");
  }
  row.wall_ms = c.timing ? elapsed_ms(t0) : 0.0;
  return row;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& c) {
  const std::vector<int> ps = c.sweep_p.empty() ? std::vector<int>{c.p} : c.sweep_p;
  const std::vector<double> bs = c.sweep_beta1.empty() ? std::vector<double>{c.beta1} : c.sweep_beta1;
  const std::vector<double> rs = c.sweep_rho1.empty() ? std::vector<double>{c.rho1} : c.sweep_rho1;
  std::vector<ExperimentConfig> out;
  for (int p : ps) {
    for (double b : bs) {
      for (double r : rs) {
        ExperimentConfig point = c;
        point.p = p;
        point.beta1 = b;
        point.rho1 = r;
        point.sweep_p.clear();
        point.sweep_beta1.clear();
        point.sweep_rho1.clear();
        out.push_back(std::move(point));
      }
    }
  }
  return out;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& c, int threads) {
  const auto points = expand_sweep(c);
  std::vector<ResultRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = run_point(points[i]);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string csv_header() {
  return "scenario,p,q,stage,gamma,beta1,rho1,c1sq,alpha,c_aspect,c_tune,sweeps,kappa,lambda_min,lambda_max,"
         "ndof_dg,ndof_cg,ndof_dfe,pcg_iters,seed,wall_ms";
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.p << ',' << r.q << ',' << r.stage << ',' << fmt("%g", r.gamma) << ','
        << fmt("%g", r.beta1) << ',' << fmt("%g", r.rho1) << ',' << fmt("%g", r.c1sq) << ',' << fmt("%g", r.alpha)
        << ',' << fmt("%g", r.c_aspect) << ',' << fmt("%g", r.c_tune) << ',' << r.sweeps << ','
        << fmt("%.6g", r.kappa) << ',' << fmt("%.6g", r.lambda_min) << ',' << fmt("%.6g", r.lambda_max) << ','
        << r.ndof_dg << ',' << r.ndof_cg << ',' << r.ndof_dfe << ',' << r.pcg_iters << ',' << r.seed << ','
        << fmt("%.1f", r.wall_ms) << '\n';
  }
  return out.str();
}

std::string format_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["scenario"] = r.scenario;
    j["p"] = r.p;
    j["q"] = r.q;
    j["stage"] = r.stage;
    j["gamma"] = r.gamma;
    j["beta1"] = r.beta1;
    j["rho1"] = r.rho1;
    j["c1sq"] = r.c1sq;
    j["alpha"] = r.alpha;
    j["c_aspect"] = r.c_aspect;
    j["c_tune"] = r.c_tune;
    j["sweeps"] = r.sweeps;
    j["kappa"] = r.kappa;
    j["lambda_min"] = r.lambda_min;
    j["lambda_max"] = r.lambda_max;
    j["ndof_dg"] = r.ndof_dg;
    j["ndof_cg"] = r.ndof_cg;
    j["ndof_dfe"] = r.ndof_dfe;
    j["pcg_iters"] = r.pcg_iters;
    j["seed"] = r.seed;
    j["wall_ms"] = r.wall_ms;
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<ResultRow> parse_json_rows(const std::string& text) {
  std::vector<ResultRow> rows;
  for (const auto& j : json::parse(text)) {
    ResultRow r;
    r.scenario = j.at("scenario");
    r.p = j.at("p");
    r.q = j.at("q");
    r.stage = j.at("stage");
    r.gamma = j.at("gamma");
    r.beta1 = j.at("beta1");
    r.rho1 = j.at("rho1");
    r.c1sq = j.at("c1sq");
    r.alpha = j.at("alpha");
    r.c_aspect = j.at("c_aspect");
    r.c_tune = j.at("c_tune");
    r.sweeps = j.at("sweeps");
    auto num = [&](const char* k) { return j.at(k).is_null() ? std::nan("") : j.at(k).get<double>(); };
    r.kappa = num("kappa");
    r.lambda_min = num("lambda_min");
    r.lambda_max = num("lambda_max");
    r.ndof_dg = j.at("ndof_dg");
    r.ndof_cg = j.at("ndof_cg");
    r.ndof_dfe = j.at("ndof_dfe");
    r.pcg_iters = j.at("pcg_iters");
    r.seed = j.at("seed");
    r.wall_ms = j.at("wall_ms");
    if (j.contains("error")) r.error = j.at("error");
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path, const std::string& format) {
  if (rows.empty()) throw std::invalid_argument("emit_results: no rows");
  std::string text;
  if (format == "csv") {
    text = format_csv(rows);
  } else if (format == "json") {
    text = format_json(rows);
  } else {
    throw std::invalid_argument("unknown output format: " + format);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace sedg
