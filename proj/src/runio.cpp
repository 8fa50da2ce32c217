#include "evostmt/runio.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "evostmt/errors.hpp"
#include "evostmt/rewrite.hpp"

namespace evostmt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("path", "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigInvalid("path", path + " is not valid JSON");
  return j;
}

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

GenMode mode_from_name(const std::string& name) {
  if (name == "seed") return GenMode::Seed;
  if (name == "full") return GenMode::Full;
  if (name == "diff") return GenMode::Diff;
  if (name == "cross") return GenMode::Cross;
  if (name == "compile_repair") return GenMode::CompileRepair;
  if (name == "semantic_repair") return GenMode::SemanticRepair;
  throw ConfigInvalid("mode", "unknown generator mode: " + name);
}

}  // namespace

AppConfig load_app_config(const std::string& path) {
  AppConfig cfg;
  json j = path.empty() ? json::object() : read_json_file(path);

  if (j.contains("search")) {
    const json& s = j.at("search");
    maybe_get(s, "budget", cfg.search.budget);
    maybe_get(s, "islands", cfg.search.islands);
    maybe_get(s, "capacity", cfg.search.capacity);
    maybe_get(s, "lambda", cfg.search.lambda);
    maybe_get(s, "beta", cfg.search.beta);
    maybe_get(s, "eps_mad", cfg.search.eps_mad);
    if (s.contains("operator_probs")) {
      const json& p = s.at("operator_probs");
      if (!p.is_array() || p.size() != 3)
        throw ConfigInvalid("operator_probs", "expected [full, diff, cross]");
      cfg.search.op_full = p.at(0).get<double>();
      cfg.search.op_diff = p.at(1).get<double>();
      cfg.search.op_cross = p.at(2).get<double>();
    }
    maybe_get(s, "max_patch_attempts", cfg.search.max_patch_attempts);
    maybe_get(s, "repair_max_attempts", cfg.search.repair_max_attempts);
    maybe_get(s, "repair_temperature", cfg.search.repair_temperature);
    maybe_get(s, "proposal_temperature", cfg.search.proposal_temperature);
    maybe_get(s, "archive_inspirations", cfg.search.archive_inspirations);
    maybe_get(s, "topk_inspirations", cfg.search.topk_inspirations);
    maybe_get(s, "cross_k", cfg.search.cross_k);
    maybe_get(s, "migration_interval", cfg.search.migration_interval);
    maybe_get(s, "migration_rate", cfg.search.migration_rate);
    maybe_get(s, "elitism_top", cfg.search.elitism_top);
    maybe_get(s, "seedbank_size", cfg.search.seedbank_size);
    maybe_get(s, "evolast_enabled", cfg.search.evolast_enabled);
    maybe_get(s, "evolast_max_steps", cfg.search.evolast_max_steps);
    maybe_get(s, "rng_seed", cfg.search.rng_seed);
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    maybe_get(s, "compile_prob", cfg.sim.compile_prob);
    maybe_get(s, "semantic_prob", cfg.sim.semantic_prob);
    maybe_get(s, "fix_compile_prob", cfg.sim.fix_compile_prob);
    maybe_get(s, "fix_semantic_prob", cfg.sim.fix_semantic_prob);
    maybe_get(s, "mutation_rate", cfg.sim.mutation_rate);
    maybe_get(s, "prover_complete_prob", cfg.sim.prover_complete_prob);
    maybe_get(s, "prover_pass_only_prob", cfg.sim.prover_pass_only_prob);
    maybe_get(s, "extra_symbols", cfg.sim.extra_symbols);
  }
  if (j.contains("http")) {
    const json& h = j.at("http");
    maybe_get(h, "base_url_env", cfg.http.base_url_env);
    maybe_get(h, "api_key_env", cfg.http.api_key_env);
    maybe_get(h, "compiler_url_env", cfg.http.compiler_url_env);
    maybe_get(h, "generator_model", cfg.http.generator_model);
    maybe_get(h, "judge_model", cfg.http.judge_model);
    maybe_get(h, "prover_model", cfg.http.prover_model);
    maybe_get(h, "max_tokens", cfg.http.max_tokens);
    maybe_get(h, "max_retries", cfg.http.max_retries);
    maybe_get(h, "timeout_seconds", cfg.http.timeout_seconds);
  }
  maybe_get(j, "run_id", cfg.run_id);
  if (cfg.run_id.empty()) cfg.run_id = "run-" + hex64(cfg.search.rng_seed);
  cfg.search.validate();
  return cfg;
}

SearchConfig load_config(const std::string& path) { return load_app_config(path).search; }

std::vector<ProblemRecord> load_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(0, "cannot open " + path);
  std::vector<ProblemRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line_no, "not a JSON object");
    ProblemRecord rec;
    if (!j.contains("problem_id") || !j.at("problem_id").is_string())
      throw SchemaError(line_no, "missing problem_id");
    rec.problem_id = j.at("problem_id").get<std::string>();
    if (!seen.insert(rec.problem_id).second)
      throw SchemaError(line_no, "duplicate problem_id " + rec.problem_id);
    if (!j.contains("informal_text") || !j.at("informal_text").is_string())
      throw SchemaError(line_no, "missing informal_text");
    rec.informal_text = j.at("informal_text").get<std::string>();
    maybe_get(j, "reference_statements", rec.reference_statements);
    maybe_get(j, "preseeds", rec.preseeds);
    if (j.contains("sim_profile")) {
      const json& s = j.at("sim_profile");
      auto opt = [&](const char* key, std::optional<double>& slot) {
        if (s.contains(key)) slot = s.at(key).get<double>();
      };
      opt("compile_prob", rec.sim.compile_prob);
      opt("semantic_prob", rec.sim.semantic_prob);
      opt("fix_compile_prob", rec.sim.fix_compile_prob);
      opt("fix_semantic_prob", rec.sim.fix_semantic_prob);
      opt("mutation_rate", rec.sim.mutation_rate);
      if (s.contains("compile_prob_by_mode"))
        rec.sim.compile_prob_by_mode =
            s.at("compile_prob_by_mode").get<std::map<std::string, double>>();
      if (s.contains("semantic_prob_by_mode"))
        rec.sim.semantic_prob_by_mode =
            s.at("semantic_prob_by_mode").get<std::map<std::string, double>>();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

json event_to_json(const RunEvent& e) {
  return json{
      {"run_id", e.run_id},
      {"problem_id", e.problem_id},
      {"call_index", e.call_index},
      {"kind", call_kind_name(e.kind)},
      {"provenance", provenance_name(e.provenance)},
      {"operator_mode", e.operator_mode},
      {"compile_ok", e.compile_ok},
      {"semantic_ok", e.semantic_ok},
      {"score", e.score},
      {"canonical_key", e.canonical_key},
      {"statement_text", e.statement_text},
      {"error_type", e.error_type},
      {"judge_rationale", e.judge_rationale},
      {"parent_id", e.parent_id},
      {"island", e.island},
      {"generation", e.generation},
      {"timestamp", e.timestamp},
  };
}

RunEvent event_from_json(const json& j) {
  RunEvent e;
  e.run_id = j.value("run_id", "");
  e.problem_id = j.value("problem_id", "");
  e.call_index = j.value("call_index", 0);
  e.kind = call_kind_from_name(j.value("kind", "seed"));
  e.provenance = provenance_from_name(j.value("provenance", "seed"));
  e.operator_mode = j.value("operator_mode", "");
  e.compile_ok = j.value("compile_ok", false);
  e.semantic_ok = j.value("semantic_ok", false);
  e.score = j.value("score", 0);
  e.canonical_key = j.value("canonical_key", "");
  e.statement_text = j.value("statement_text", "");
  e.error_type = j.value("error_type", "");
  e.judge_rationale = j.value("judge_rationale", "");
  e.parent_id = j.value("parent_id", -1);
  e.island = j.value("island", -1);
  e.generation = j.value("generation", 0);
  e.timestamp = j.value("timestamp", 0);
  return e;
}

std::vector<ProblemTrace> load_traces(const std::string& run_dir) {
  fs::path events_dir = fs::path(run_dir) / "events";
  if (!fs::exists(events_dir)) throw MissingLogs(run_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(events_dir))
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  if (files.empty()) throw MissingLogs(run_dir);
  std::sort(files.begin(), files.end());
  std::vector<ProblemTrace> traces;
  for (const auto& file : files) {
    ProblemTrace trace;
    std::ifstream in(file);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw SchemaError(line_no, "bad event line in " + file.string());
      trace.events.push_back(event_from_json(j));
    }
    if (trace.events.empty()) continue;
    trace.problem_id = trace.events.front().problem_id;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      if (trace.events[i].call_index != static_cast<int>(i) + 1)
        throw SchemaError(i + 1, "non-contiguous call_index in " + file.string());
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

SimBackendSet build_sim_backends(const std::vector<ProblemRecord>& problems,
                                 const SimSettings& settings) {
  std::vector<std::string> all_refs;
  for (const auto& p : problems)
    all_refs.insert(all_refs.end(), p.reference_statements.begin(),
                    p.reference_statements.end());
  std::set<std::string> symbols = harvest_symbols(all_refs);
  for (const auto& s : settings.extra_symbols) symbols.insert(s);

  SimProfile default_profile;
  default_profile.compile_prob = settings.compile_prob;
  default_profile.semantic_prob = settings.semantic_prob;
  default_profile.fix_compile_prob = settings.fix_compile_prob;
  default_profile.fix_semantic_prob = settings.fix_semantic_prob;
  default_profile.mutation_rate = settings.mutation_rate;

  SimBackendSet set;
  set.generator = std::make_unique<SimGenerator>(symbols, default_profile);
  set.compiler = std::make_unique<SimCompiler>(symbols);
  set.judge = std::make_unique<SimJudge>();

  for (const auto& p : problems) {
    SimProfile profile = default_profile;
    profile.reference_texts = p.reference_statements;
    profile.distractor_texts = make_distractors(p.reference_statements, symbols);
    if (p.sim.compile_prob) profile.compile_prob = *p.sim.compile_prob;
    if (p.sim.semantic_prob) profile.semantic_prob = *p.sim.semantic_prob;
    if (p.sim.fix_compile_prob) profile.fix_compile_prob = *p.sim.fix_compile_prob;
    if (p.sim.fix_semantic_prob) profile.fix_semantic_prob = *p.sim.fix_semantic_prob;
    if (p.sim.mutation_rate) profile.mutation_rate = *p.sim.mutation_rate;
    for (const auto& [mode, prob] : p.sim.compile_prob_by_mode)
      profile.compile_prob_by_mode[mode_from_name(mode)] = prob;
    for (const auto& [mode, prob] : p.sim.semantic_prob_by_mode)
      profile.semantic_prob_by_mode[mode_from_name(mode)] = prob;
    set.generator->register_profile(p.problem_id, std::move(profile));

    std::vector<StatementFile> refs;
    for (const auto& text : p.reference_statements) {
      try {
        refs.push_back(parse_file(text));
      } catch (const std::exception&) {
      }
    }
    set.judge->register_problem(p.problem_id, std::move(refs));
  }
  return set;
}

namespace {

std::string env_or_empty(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v ? v : "";
}

struct HttpBackendSet {
  std::unique_ptr<HttpGenerator> generator;
  std::unique_ptr<HttpCompiler> compiler;
  std::unique_ptr<HttpJudge> judge;
};

HttpBackendSet build_http_backends(const AppConfig& config) {
  std::string base = env_or_empty(config.http.base_url_env);
  if (base.empty())
    throw ConfigInvalid(config.http.base_url_env, "environment variable not set");
  std::string compiler_url = env_or_empty(config.http.compiler_url_env);
  if (compiler_url.empty())
    throw ConfigInvalid(config.http.compiler_url_env, "environment variable not set");
  HttpEndpoint gen_ep;
  gen_ep.base_url = base;
  gen_ep.api_key = env_or_empty(config.http.api_key_env);
  gen_ep.model = config.http.generator_model;
  gen_ep.max_tokens = config.http.max_tokens;
  gen_ep.max_retries = config.http.max_retries;
  gen_ep.timeout_seconds = config.http.timeout_seconds;
  HttpEndpoint judge_ep = gen_ep;
  judge_ep.model = config.http.judge_model;
  HttpBackendSet set;
  set.generator = std::make_unique<HttpGenerator>(gen_ep);
  set.compiler = std::make_unique<HttpCompiler>(compiler_url, "/compile", config.http.max_retries);
  set.judge = std::make_unique<HttpJudge>(judge_ep);
  return set;
}

}  // namespace

RunSummary cmd_run(const AppConfig& config, const std::vector<ProblemRecord>& problems,
                   const RunOptions& options) {
  config.search.validate();
  if (options.out_dir.empty()) throw ConfigInvalid("out_dir", "must be set");
  fs::create_directories(fs::path(options.out_dir) / "events");

  SimBackendSet sim_set;
  HttpBackendSet http_set;
  Backends backends;
  if (options.backend == "sim") {
    sim_set = build_sim_backends(problems, config.sim);
    backends = sim_set.backends();
  } else if (options.backend == "http") {
    http_set = build_http_backends(config);
    backends = Backends{http_set.generator.get(), http_set.compiler.get(), http_set.judge.get()};
  } else {
    throw ConfigInvalid("backend", "expected sim or http");
  }

  {
    json manifest = {
        {"run_id", config.run_id},
        {"backend", options.backend},
        {"budget", config.search.budget},
        {"rng_seed", config.search.rng_seed},
        {"n_problems", problems.size()},
        {"problem_ids", json::array()},
        {"config",
         {{"islands", config.search.islands},
          {"capacity", config.search.capacity},
          {"lambda", config.search.lambda},
          {"beta", config.search.beta},
          {"eps_mad", config.search.eps_mad},
          {"operator_probs", {config.search.op_full, config.search.op_diff, config.search.op_cross}},
          {"repair_max_attempts", config.search.repair_max_attempts},
          {"repair_temperature", config.search.repair_temperature},
          {"archive_inspirations", config.search.archive_inspirations},
          {"topk_inspirations", config.search.topk_inspirations},
          {"cross_k", config.search.cross_k},
          {"migration_interval", config.search.migration_interval},
          {"migration_rate", config.search.migration_rate},
          {"elitism_top", config.search.elitism_top},
          {"seedbank_size", config.search.seedbank_size},
          {"evolast_enabled", config.search.evolast_enabled},
          {"evolast_max_steps", config.search.evolast_max_steps}}},
    };
    for (const auto& p : problems) manifest["problem_ids"].push_back(p.problem_id);
    std::ofstream out(fs::path(options.out_dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
  }

  RunSummary summary;
  summary.problems_total = static_cast<int>(problems.size());
  summary.logs.resize(problems.size());
  std::vector<int> status(problems.size(), 0);  // 0 pending, 1 ok, 2 failed
  std::vector<std::string> errors(problems.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= problems.size()) return;
      const ProblemRecord& rec = problems[i];
      fs::path log_path = fs::path(options.out_dir) / "events" / (rec.problem_id + ".jsonl");
      std::ofstream log_file(log_path);
      try {
        Problem problem{rec.problem_id, rec.informal_text, rec.preseeds};
        EventSink sink = [&log_file](const RunEvent& e) {
          log_file << event_to_json(e).dump() << "\n";
          log_file.flush();  // prefix stays valid if the run is interrupted
        };
        summary.logs[i] = run_problem(problem, config.search, backends, config.run_id, sink);
        status[i] = 1;
      } catch (const std::exception& e) {
        status[i] = 2;
        errors[i] = e.what();
      }
    }
  };

  int parallelism = std::max(1, options.parallelism);
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < parallelism; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (status[i] == 1) ++summary.problems_completed;
    else summary.failed_problem_ids.push_back(problems[i].problem_id);
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Metrics report

nlohmann::json cmd_metrics(const std::string& run_dir, const MetricsOptions& options) {
  std::vector<ProblemTrace> traces = load_traces(run_dir);
  int budget = options.t;
  if (budget <= 0) {
    fs::path manifest_path = fs::path(run_dir) / "manifest.json";
    if (fs::exists(manifest_path)) {
      json manifest = read_json_file(manifest_path.string());
      budget = manifest.value("budget", 0);
    }
    if (budget <= 0)
      for (const auto& tr : traces)
        budget = std::max(budget, static_cast<int>(tr.events.size()));
  }

  json per_problem = json::array();
  std::vector<double> s_counts;
  std::vector<ProblemTrace> truncated;
  double ch_sum = 0, sh_sum = 0, fy_sum = 0, sd_sum = 0, sy_sum = 0;
  long div_total = 0;
  for (const auto& trace : traces) {
    int t = std::min(budget, static_cast<int>(trace.events.size()));
    ProblemTrace prefix;
    prefix.problem_id = trace.problem_id;
    prefix.events.assign(trace.events.begin(), trace.events.begin() + t);
    PerCallMetrics m = t > 0 ? per_call_metrics(prefix, t) : PerCallMetrics{};
    auto hit = first_hit(prefix);
    json row = {
        {"problem_id", trace.problem_id}, {"events", t},
        {"ch", m.ch},                     {"sh", m.sh},
        {"fy", m.fy},                     {"sd", m.sd},
        {"sy", m.sy},                     {"div", m.div},
        {"first_hit", hit ? json(*hit) : json(nullptr)},
    };
    per_problem.push_back(std::move(row));
    s_counts.push_back(m.div);
    ch_sum += m.ch ? 1 : 0;
    sh_sum += m.sh ? 1 : 0;
    fy_sum += m.fy;
    sd_sum += m.sd;
    sy_sum += m.sy;
    div_total += m.div;
    truncated.push_back(std::move(prefix));
  }
  const double n = static_cast<double>(traces.size());
  BudgetAudit audit = budget_audit(truncated);
  json report = {
      {"t", budget},
      {"n_problems", traces.size()},
      {"ch", n > 0 ? ch_sum / n : 0.0},
      {"sh", n > 0 ? sh_sum / n : 0.0},
      {"fy_mean", n > 0 ? fy_sum / n : 0.0},
      {"sd_mean", n > 0 ? sd_sum / n : 0.0},
      {"sy_mean", n > 0 ? sy_sum / n : 0.0},
      {"div_total", div_total},
      {"gini", gini(s_counts)},
      {"top10_share", top_share(s_counts)},
      {"budget_audit",
       {{"gen", audit.gen},
        {"crep", audit.crep},
        {"srep", audit.srep},
        {"total", audit.total},
        {"judge_calls", audit.judge_calls},
        {"evolast_judge", audit.evolast_judge}}},
      {"per_problem", per_problem},
  };

  if (!options.csv_dir.empty()) {
    fs::create_directories(options.csv_dir);
    std::ofstream curves(fs::path(options.csv_dir) / "curves.csv");
    curves << "t,ch,sh,gini,top10_share,fy_mean,sd_mean,sy_mean\n";
    for (int t = 1; t <= budget; ++t) {
      double ch = 0, sh = 0, fy = 0, sd = 0, sy = 0;
      std::vector<double> counts;
      for (const auto& trace : traces) {
        int tt = std::min(t, static_cast<int>(trace.events.size()));
        if (tt == 0) {
          counts.push_back(0);
          continue;
        }
        PerCallMetrics m = per_call_metrics(trace, tt);
        ch += m.ch ? 1 : 0;
        sh += m.sh ? 1 : 0;
        fy += m.fy;
        sd += m.sd;
        sy += m.sy;
        counts.push_back(m.div);
      }
      curves << t << ',' << (n > 0 ? ch / n : 0) << ',' << (n > 0 ? sh / n : 0) << ','
             << gini(counts) << ',' << top_share(counts) << ',' << (n > 0 ? fy / n : 0) << ','
             << (n > 0 ? sd / n : 0) << ',' << (n > 0 ? sy / n : 0) << "\n";
    }
    std::ofstream summary(fs::path(options.csv_dir) / "summary.csv");
    summary << "ch,sh,gini,top10_share\n";
    summary << report["ch"].get<double>() << ',' << report["sh"].get<double>() << ','
            << report["gini"].get<double>() << ',' << report["top10_share"].get<double>() << "\n";
  }

  if (!options.report_path.empty()) {
    std::ofstream out(options.report_path);
    out << report.dump(2) << "\n";
  }
  return report;
}

// ---------------------------------------------------------------------------
// Prover harness

nlohmann::json cmd_prove(const std::string& run_dir, const AppConfig& config,
                         const ProveOptions& options) {
  std::vector<ProblemRecord> problems;
  if (!options.problems_path.empty()) problems = load_problems(options.problems_path);

  std::vector<ProblemTrace> traces;
  std::vector<std::string> problem_ids;
  if (options.oracle) {
    if (problems.empty())
      throw ConfigInvalid("problems_path", "oracle mode needs the problems file");
    for (const auto& p : problems) problem_ids.push_back(p.problem_id);
  } else {
    traces = load_traces(run_dir);
    for (const auto& tr : traces) problem_ids.push_back(tr.problem_id);
  }

  std::unique_ptr<ProverBackend> prover;
  std::unique_ptr<CompilerBackend> verifier;
  if (options.backend == "sim") {
    if (problems.empty())
      throw ConfigInvalid("problems_path", "sim prover verification needs the problems file");
    std::vector<std::string> all_refs;
    for (const auto& p : problems)
      all_refs.insert(all_refs.end(), p.reference_statements.begin(),
                      p.reference_statements.end());
    std::set<std::string> symbols = harvest_symbols(all_refs);
    for (const auto& s : config.sim.extra_symbols) symbols.insert(s);
    prover = std::make_unique<SimProver>(config.sim.prover_complete_prob,
                                         config.sim.prover_pass_only_prob,
                                         config.search.rng_seed);
    verifier = std::make_unique<SimCompiler>(symbols, /*require_placeholder=*/false);
  } else if (options.backend == "http") {
    std::string base = env_or_empty(config.http.base_url_env);
    std::string compiler_url = env_or_empty(config.http.compiler_url_env);
    if (base.empty()) throw ConfigInvalid(config.http.base_url_env, "environment variable not set");
    if (compiler_url.empty())
      throw ConfigInvalid(config.http.compiler_url_env, "environment variable not set");
    HttpEndpoint ep;
    ep.base_url = base;
    ep.api_key = env_or_empty(config.http.api_key_env);
    ep.model = config.http.prover_model;
    ep.max_tokens = config.http.max_tokens;
    ep.max_retries = config.http.max_retries;
    ep.timeout_seconds = config.http.timeout_seconds;
    prover = std::make_unique<HttpProver>(ep);
    verifier = std::make_unique<HttpCompiler>(compiler_url, "/compile", config.http.max_retries);
  } else {
    throw ConfigInvalid("backend", "expected sim or http");
  }

  std::string attempts_path = options.report_path.empty()
                                  ? (fs::path(run_dir) / "attempts.jsonl").string()
                                  : options.report_path + ".attempts.jsonl";
  std::ofstream attempts_out(attempts_path);

  std::vector<ProverAttempt> attempts;
  for (std::size_t pi = 0; pi < problem_ids.size(); ++pi) {
    const std::string& pid = problem_ids[pi];
    std::vector<std::string> statements;
    if (options.oracle) {
      const auto& refs = problems[pi].reference_statements;
      if (!refs.empty()) statements.push_back(refs.front());  // one per problem
    } else {
      for (const auto& entry : repertoire_for_proving(traces[pi]))
        statements.push_back(entry.statement_text);
    }
    if (statements.empty()) continue;  // zero attempts, counts as a failure
    auto schedule = rr64_schedule(static_cast<int>(statements.size()), options.budget);
    for (const auto& [stmt_idx, sample_idx] : schedule) {
      ProverAttempt attempt;
      attempt.problem_id = pid;
      attempt.statement_index = stmt_idx;
      attempt.sample_index = sample_idx;
      std::string response;
      try {
        response = prover->prove(pid, statements[static_cast<std::size_t>(stmt_idx)], stmt_idx,
                                 sample_idx);
      } catch (const std::exception&) {
        response.clear();  // failed attempt
      }
      attempt.output_text = response;
      auto block = extract_code_block(response);
      if (block) {
        bool accepted = false;
        try {
          accepted = verifier->compile(*block).ok;
        } catch (const std::exception&) {
        }
        ProofClassification cls = classify_proof_output(*block);
        attempt.pass = accepted;
        attempt.complete = accepted && cls.complete;
        attempt.theorem_complete = attempt.complete && cls.theorem_complete;
        attempt.sorry_count = cls.sorry_count;
      } else {
        attempt.sorry_count = classify_proof_output(response).sorry_count;
      }
      char attempt_id[64];
      std::snprintf(attempt_id, sizeof(attempt_id), "rr64__s%02d_g%d", sample_idx, stmt_idx);
      attempts_out << json{{"problem_id", attempt.problem_id},
                           {"attempt_id", attempt_id},
                           {"statement_index", attempt.statement_index},
                           {"sample_index", attempt.sample_index},
                           {"pass", attempt.pass},
                           {"complete", attempt.complete},
                           {"theorem_complete", attempt.theorem_complete},
                           {"sorry_count", attempt.sorry_count}}
                       .dump()
                   << "\n";
      attempts.push_back(std::move(attempt));
    }
  }

  ProofUtility pu = proof_utility(attempts, problem_ids);
  json report = {
      {"mode", options.oracle ? "oracle" : "repertoire"},
      {"budget", options.budget},
      {"n", pu.n},
      {"attempted", pu.attempted},
      {"pass_at", pu.pass_count},
      {"complete_at", pu.complete_count},
      {"theorem_complete_at", pu.theorem_complete_count},
      {"attempts_file", attempts_path},
  };
  if (!options.report_path.empty()) {
    std::ofstream out(options.report_path);
    out << report.dump(2) << "\n";
    std::ofstream csv(options.report_path + ".csv");
    csv << "pass_at,complete_at,theorem_complete_at,attempted,n\n";
    csv << pu.pass_count << ',' << pu.complete_count << ',' << pu.theorem_complete_count << ','
        << pu.attempted << ',' << pu.n << "\n";
  }
  return report;
}

}  // namespace evostmt
