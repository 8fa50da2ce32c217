#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evostmt/errors.hpp"
#include "evostmt/rewrite.hpp"
#include "evostmt/runio.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_command(const std::string& config_path, const std::string& problems_path,
                const std::string& backend, int parallelism, const std::string& out_dir) {
  evostmt::AppConfig config = evostmt::load_app_config(config_path);
  auto problems = evostmt::load_problems(problems_path);
  evostmt::RunOptions options{backend, parallelism, out_dir};
  evostmt::RunSummary summary = evostmt::cmd_run(config, problems, options);
  std::cout << "completed " << summary.problems_completed << "/" << summary.problems_total
            << " problems; events under " << out_dir << "/events\n";
  for (const auto& pid : summary.failed_problem_ids)
    std::cerr << "problem failed: " << pid << "\n";
  return summary.problems_completed == summary.problems_total ? 0 : 1;
}

int metrics_command(const std::string& run_dir, int t, const std::string& out_path,
                    const std::string& csv_dir) {
  evostmt::MetricsOptions options{t, out_path, csv_dir};
  auto report = evostmt::cmd_metrics(run_dir, options);
  std::cout << "CH@" << report["t"] << " = " << report["ch"].get<double>() << ", SH@"
            << report["t"] << " = " << report["sh"].get<double>()
            << ", Gini = " << report["gini"].get<double>()
            << ", Top-10% = " << report["top10_share"].get<double>() << "\n";
  if (!out_path.empty()) std::cout << "report written to " << out_path << "\n";
  return 0;
}

int prove_command(const std::string& run_dir, const std::string& config_path, int budget,
                  const std::string& backend, const std::string& out_path,
                  const std::string& problems_path, bool oracle) {
  evostmt::AppConfig config = evostmt::load_app_config(config_path);
  evostmt::ProveOptions options;
  options.budget = budget;
  options.backend = backend;
  options.report_path = out_path;
  options.problems_path = problems_path;
  options.oracle = oracle;
  auto report = evostmt::cmd_prove(run_dir, config, options);
  std::cout << "pass@" << budget << " = " << report["pass_at"] << "/" << report["n"]
            << ", complete@" << budget << " = " << report["complete_at"] << "/" << report["n"]
            << ", theorem-complete@" << budget << " = " << report["theorem_complete_at"] << "/"
            << report["n"] << " (attempted " << report["attempted"] << ")\n";
  return 0;
}

int evolast_command(const std::string& file_path, int n, bool verify, std::uint64_t seed,
                    int max_steps) {
  evostmt::StatementFile original = evostmt::parse_file(read_file(file_path));
  for (int i = 0; i < n; ++i) {
    auto variant = evostmt::evolast_variant(original, seed + static_cast<std::uint64_t>(i),
                                            max_steps);
    std::cout << "-- variant " << (i + 1);
    if (!variant) {
      std::cout << ": no rewrite site\n";
      continue;
    }
    if (verify) {
      bool goal_ok = evostmt::expr_equal(original.goal, variant->goal) ||
                     evostmt::equiv_oracle(original.goal, variant->goal);
      bool binders_ok = true;
      for (std::size_t b = 0; b < original.binders.size(); ++b) {
        const auto& t1 = original.binders[b].type;
        const auto& t2 = variant->binders[b].type;
        // Reordering may have moved groups; verify as a multiset.
        bool found = false;
        for (std::size_t c = 0; c < variant->binders.size() && !found; ++c) {
          const auto& vb = variant->binders[c];
          if (vb.kind != original.binders[b].kind ||
              vb.names.size() != original.binders[b].names.size())
            continue;
          if ((!t1 && !vb.type) ||
              (t1 && vb.type &&
               (evostmt::expr_equal(t1, vb.type) || evostmt::equiv_oracle(t1, vb.type))))
            found = true;
        }
        (void)t2;
        binders_ok = binders_ok && found;
      }
      std::cout << (goal_ok && binders_ok ? " (equivalent)" : " (NOT equivalent)");
    }
    std::cout << "\n" << evostmt::print_file(*variant);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted evolutionary search over formal theorem statements"};
  app.require_subcommand(1);

  std::string config_path, problems_path, backend = "sim", out_dir, run_dir, out_path, csv_dir;
  int parallelism = 1, t = 0, budget = 64, n_variants = 3, max_steps = 3;
  bool verify = false, oracle = false;
  std::uint64_t seed = 0;
  std::string file_path;

  auto* run = app.add_subcommand("run", "search every problem under the call budget");
  run->add_option("--config", config_path, "config JSON (defaults apply when omitted)");
  run->add_option("--problems", problems_path, "problems JSONL")->required();
  run->add_option("--backend", backend, "sim | http")->capture_default_str();
  run->add_option("--parallelism", parallelism, "concurrent problems")->capture_default_str();
  run->add_option("--out", out_dir, "run directory")->required();

  auto* metrics = app.add_subcommand("metrics", "compute the report from a run's event logs");
  metrics->add_option("--run", run_dir, "run directory")->required();
  metrics->add_option("--t", t, "truncate each trace to the first t calls");
  metrics->add_option("--out", out_path, "report JSON path");
  metrics->add_option("--csv", csv_dir, "directory for per-budget curve CSVs");

  auto* prove = app.add_subcommand("prove", "round-robin prover attempts over the repertoire");
  prove->add_option("--run", run_dir, "run directory")->required();
  prove->add_option("--config", config_path, "config JSON");
  prove->add_option("--budget", budget, "prover attempts per problem")->capture_default_str();
  prove->add_option("--backend", backend, "sim | http")->capture_default_str();
  prove->add_option("--out", out_path, "report JSON path");
  prove->add_option("--problems", problems_path, "problems JSONL (sim verification / oracle)");
  prove->add_flag("--oracle", oracle, "prove the reference statements directly");

  auto* evolast = app.add_subcommand("evolast", "emit rewrite variants of a statement file");
  evolast->add_option("--file", file_path, "statement file")->required();
  evolast->add_option("--n", n_variants, "number of variants")->capture_default_str();
  evolast->add_option("--seed", seed, "rng seed")->capture_default_str();
  evolast->add_option("--max-steps", max_steps, "rewrite steps per variant")->capture_default_str();
  evolast->add_flag("--verify", verify, "check each variant with the equivalence oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(config_path, problems_path, backend, parallelism, out_dir);
    if (metrics->parsed()) return metrics_command(run_dir, t, out_path, csv_dir);
    if (prove->parsed())
      return prove_command(run_dir, config_path, budget, backend, out_path, problems_path, oracle);
    if (evolast->parsed())
      return evolast_command(file_path, n_variants, verify, seed, max_steps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
