// Batch runner for the preconditioner experiments.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sedg/experiment.hpp"
#include "sedg/grid.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& out,
        const std::string& format, int threads, long long seed) {
  sedg::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = sedg::parse_config(read_file(config_path));
  for (const auto& o : overrides) sedg::apply_override(cfg, o);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  sedg::validate_config(cfg);

  const auto rows = sedg::run_sweep(cfg, threads);
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      std::fprintf(stderr, "point p=%d beta1=%g rho1=%g failed: %s\n", r.p, r.beta1, r.rho1, r.error.c_str());
    }
  }
  if (out.empty() || out == "-") {
    std::cout << (format == "json" ? sedg::format_json(rows) : sedg::format_csv(rows));
  } else {
    sedg::emit_results(rows, out, format);
  }
  return failed == 0 ? 0 : 1;
}

int dump_dyadic(int p, double alpha, const std::string& rule, double a, double b) {
  const auto r = rule == "smallest" ? sedg::ReferenceRule::kSmallest : sedg::ReferenceRule::kLargest;
  const auto family = sedg::build_nested_family(p, sedg::Interval(-1.0, 1.0), alpha, r);
  const auto part = family.at(p).mapped_to(sedg::Interval(a, b));
  for (double x : part.breakpoint_values()) std::printf("%.17g\n", x);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condition number experiments for the two-stage SE-DG preconditioner"};
  app.require_subcommand(0, 1);

  std::string config_path, out, format = "csv";
  std::vector<std::string> overrides;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  long long seed = -1;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config key, key=value (repeatable; sweep.p=[4,8])");
  app.add_option("--out", out, "output file, stdout when omitted");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Lanczos start vector seed")->check(CLI::NonNegativeNumber);

  auto* dyadic = app.add_subcommand("dyadic", "print the breakpoints of a dyadic partition D_p");
  int dp = 8;
  double dalpha = 1.2, da = -1.0, db = 1.0;
  std::string drule = "largest";
  dyadic->add_option("-p", dp, "degree")->required()->check(CLI::PositiveNumber);
  dyadic->add_option("--alpha", dalpha, "splitting threshold")->check(CLI::PositiveNumber);
  dyadic->add_option("--rule", drule, "reference cell rule")->check(CLI::IsMember({"largest", "smallest"}));
  dyadic->add_option("--from", da, "left end");
  dyadic->add_option("--to", db, "right end");

  CLI11_PARSE(app, argc, argv);
  try {
    if (dyadic->parsed()) return dump_dyadic(dp, dalpha, drule, da, db);
    return run(config_path, overrides, out, format, threads, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
