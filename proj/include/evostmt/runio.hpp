#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evostmt/backends.hpp"
#include "evostmt/metrics.hpp"
#include "evostmt/search.hpp"

namespace evostmt {

struct SimSettings {
  double compile_prob = 0.9;
  double semantic_prob = 0.5;
  double fix_compile_prob = 0.8;
  double fix_semantic_prob = 0.6;
  double mutation_rate = 0.5;
  double prover_complete_prob = 0.6;
  double prover_pass_only_prob = 0.3;
  std::vector<std::string> extra_symbols;
};

struct HttpSettings {
  std::string base_url_env = "EVOSTMT_API_BASE";
  std::string api_key_env = "EVOSTMT_API_KEY";
  std::string compiler_url_env = "EVOSTMT_COMPILER_URL";
  std::string generator_model = "generator";
  std::string judge_model = "judge";
  std::string prover_model = "prover";
  int max_tokens = 4096;
  int max_retries = 2;
  int timeout_seconds = 120;
};

struct AppConfig {
  std::string run_id;  // derived from the seed when not set
  SearchConfig search;
  SimSettings sim;
  HttpSettings http;
};

// Key-value JSON document; unspecified fields keep their defaults. Throws
// ConfigInvalid on out-of-range values.
AppConfig load_app_config(const std::string& path);
SearchConfig load_config(const std::string& path);

struct SimOverrides {
  std::optional<double> compile_prob;
  std::optional<double> semantic_prob;
  std::optional<double> fix_compile_prob;
  std::optional<double> fix_semantic_prob;
  std::optional<double> mutation_rate;
  std::map<std::string, double> compile_prob_by_mode;
  std::map<std::string, double> semantic_prob_by_mode;
};

struct ProblemRecord {
  std::string problem_id;
  std::string informal_text;
  std::vector<std::string> reference_statements;
  std::vector<std::string> preseeds;
  SimOverrides sim;
};

// One JSON record per line; duplicate ids and malformed records raise
// SchemaError with the offending line number.
std::vector<ProblemRecord> load_problems(const std::string& path);

nlohmann::json event_to_json(const RunEvent& e);
RunEvent event_from_json(const nlohmann::json& j);
std::vector<ProblemTrace> load_traces(const std::string& run_dir);

// Assembled simulated backend set for a dataset.
struct SimBackendSet {
  std::unique_ptr<SimGenerator> generator;
  std::unique_ptr<SimCompiler> compiler;
  std::unique_ptr<SimJudge> judge;
  Backends backends() const {
    return Backends{generator.get(), compiler.get(), judge.get()};
  }
};

SimBackendSet build_sim_backends(const std::vector<ProblemRecord>& problems,
                                 const SimSettings& settings);

struct RunOptions {
  std::string backend = "sim";  // sim | http
  int parallelism = 1;
  std::string out_dir;
};

struct RunSummary {
  int problems_total = 0;
  int problems_completed = 0;
  std::vector<std::string> failed_problem_ids;
  std::vector<RunLog> logs;  // in problem order
};

// Runs every problem (up to `parallelism` at a time), streams one JSONL event
// log per problem under <out>/events/, writes <out>/manifest.json. Sibling
// problems never abort each other.
RunSummary cmd_run(const AppConfig& config, const std::vector<ProblemRecord>& problems,
                   const RunOptions& options);

struct MetricsOptions {
  int t = 0;  // 0: use the manifest budget
  std::string report_path;
  std::string csv_dir;  // optional per-budget curve + summary CSVs
};

nlohmann::json cmd_metrics(const std::string& run_dir, const MetricsOptions& options);

struct ProveOptions {
  int budget = 64;
  std::string backend = "sim";  // sim | http
  std::string report_path;
  std::string problems_path;  // needed for sim verification and oracle mode
  bool oracle = false;        // prove the reference statements directly
};

nlohmann::json cmd_prove(const std::string& run_dir, const AppConfig& config,
                         const ProveOptions& options);

}  // namespace evostmt
