#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evostmt/rng.hpp"
#include "evostmt/statement.hpp"

namespace evostmt {

enum class GenMode { Seed, Full, Diff, Cross, CompileRepair, SemanticRepair };
const char* gen_mode_name(GenMode m);

struct GeneratorRequest {
  GenMode mode = GenMode::Seed;
  std::string problem_id;
  std::string informal_text;
  std::string parent_text;  // {code_content} / {original_code}
  std::vector<std::string> inspirations;
  std::string compile_error_type;
  std::string compile_error_msg;
  std::string critic_feedback;
  std::string performance_metrics;
  std::string text_feedback_section;
  double temperature = 0.7;
  std::uint64_t rng_seed = 0;
};

struct CompileResult {
  bool ok = false;
  std::string error_type;
  std::string error_msg;
};

struct JudgeResult {
  bool ok = false;
  std::string rationale;
};

// Prompt templates; the defaults carry the deployed generation, repair, judge
// and prover prompts verbatim.
struct PromptTemplates {
  std::string seed;
  std::string patch_skeleton;
  std::vector<std::string> full_addenda;  // one sampled per full-mode call
  std::string diff_prefix;
  std::string cross_prefix;
  std::string cross_context;
  std::string compile_repair;
  std::string semantic_repair;
  std::string judge;
  std::string prover;

  static const PromptTemplates& defaults();
};

// Byte-exact placeholder substitution; the full-mode addendum is sampled
// uniformly per call from req.rng_seed. Throws MissingPlaceholder when a
// mode-required field is absent.
std::string render_prompt(const GeneratorRequest& req,
                          const PromptTemplates& templates = PromptTemplates::defaults());
std::string render_judge_prompt(const std::string& informal, const std::string& lean_statement,
                                const PromptTemplates& templates = PromptTemplates::defaults());
std::string render_prover_prompt(const std::string& lean_file,
                                 const PromptTemplates& templates = PromptTemplates::defaults());

// Contents of the first fenced block tagged lean or lean4; nullopt when the
// response has none (treated upstream as a failed call).
std::optional<std::string> extract_code_block(const std::string& response);

// ---------------------------------------------------------------------------
// Backend interfaces

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual std::string generate(const GeneratorRequest& req) = 0;
};

class CompilerBackend {
 public:
  virtual ~CompilerBackend() = default;
  virtual CompileResult compile(const std::string& file_text) = 0;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual JudgeResult judge(const std::string& problem_id, const std::string& informal,
                            const std::string& file_text) = 0;
};

class ProverBackend {
 public:
  virtual ~ProverBackend() = default;
  // Raw model response for one attempt; sample_index distinguishes retries.
  virtual std::string prove(const std::string& problem_id, const std::string& file_text,
                            int statement_index, int sample_index) = 0;
};

struct Backends {
  GeneratorBackend* generator = nullptr;
  CompilerBackend* compiler = nullptr;
  JudgeBackend* judge = nullptr;
};

// ---------------------------------------------------------------------------
// Deterministic simulated backends

CompileResult sim_compile(const std::string& file_text, const std::set<std::string>& symbols,
                          bool require_placeholder_proof = true);

JudgeResult sim_judge_file(const std::vector<StatementFile>& references,
                           const std::string& file_text);

struct SimProfile {
  std::vector<std::string> reference_texts;
  std::vector<std::string> distractor_texts;  // compilable, judge-rejected
  double compile_prob = 0.9;
  double semantic_prob = 0.5;
  std::map<GenMode, double> compile_prob_by_mode;
  std::map<GenMode, double> semantic_prob_by_mode;
  double fix_compile_prob = 0.8;
  double fix_semantic_prob = 0.6;
  double mutation_rate = 0.5;  // chance of a key-changing sound rewrite on emission

  double compile_prob_for(GenMode m) const;
  double semantic_prob_for(GenMode m) const;
};

std::string sim_generate(const GeneratorRequest& req, const SimProfile& profile,
                         const std::set<std::string>& symbols);

class SimCompiler : public CompilerBackend {
 public:
  SimCompiler(std::set<std::string> symbols, bool require_placeholder = true)
      : symbols_(std::move(symbols)), require_placeholder_(require_placeholder) {}
  CompileResult compile(const std::string& file_text) override {
    return sim_compile(file_text, symbols_, require_placeholder_);
  }
  const std::set<std::string>& symbols() const { return symbols_; }

 private:
  std::set<std::string> symbols_;
  bool require_placeholder_;
};

class SimJudge : public JudgeBackend {
 public:
  void register_problem(const std::string& problem_id, std::vector<StatementFile> references) {
    registry_[problem_id] = std::move(references);
  }
  JudgeResult judge(const std::string& problem_id, const std::string& informal,
                    const std::string& file_text) override;

 private:
  std::map<std::string, std::vector<StatementFile>> registry_;
};

class SimGenerator : public GeneratorBackend {
 public:
  SimGenerator(std::set<std::string> symbols, SimProfile default_profile)
      : symbols_(std::move(symbols)), default_profile_(std::move(default_profile)) {}
  void register_profile(const std::string& problem_id, SimProfile profile) {
    profiles_[problem_id] = std::move(profile);
  }
  const SimProfile& profile_for(const std::string& problem_id) const {
    auto it = profiles_.find(problem_id);
    return it == profiles_.end() ? default_profile_ : it->second;
  }
  std::string generate(const GeneratorRequest& req) override {
    return sim_generate(req, profile_for(req.problem_id), symbols_);
  }

 private:
  std::set<std::string> symbols_;
  SimProfile default_profile_;
  std::map<std::string, SimProfile> profiles_;
};

class SimProver : public ProverBackend {
 public:
  SimProver(double complete_prob, double pass_only_prob, std::uint64_t seed)
      : complete_prob_(complete_prob), pass_only_prob_(pass_only_prob), seed_(seed) {}
  std::string prove(const std::string& problem_id, const std::string& file_text,
                    int statement_index, int sample_index) override;

 private:
  double complete_prob_;
  double pass_only_prob_;
  std::uint64_t seed_;
};

// Builds compilable-but-inconsistent variants of the references (dropped
// unused hypotheses, flipped connectives/relations), verified rejected by the
// simulated judge; pads with neutral synthetic statements when none survive.
std::vector<std::string> make_distractors(const std::vector<std::string>& reference_texts,
                                          const std::set<std::string>& symbols);

// Base symbol table plus every free identifier of the given statements.
std::set<std::string> harvest_symbols(const std::vector<std::string>& statement_texts);

// ---------------------------------------------------------------------------
// HTTP chat-completion adapters

struct HttpEndpoint {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model;
  int max_tokens = 4096;
  int max_retries = 2;
  int timeout_seconds = 120;
};

// One chat-completion call; retries transport errors and 5xx responses up to
// max_retries, then throws BackendFailure.
std::string http_backend_call(const HttpEndpoint& endpoint, const std::string& prompt,
                              double temperature, int max_retries);

class HttpGenerator : public GeneratorBackend {
 public:
  explicit HttpGenerator(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string generate(const GeneratorRequest& req) override {
    return http_backend_call(endpoint_, render_prompt(req), req.temperature,
                             endpoint_.max_retries);
  }

 private:
  HttpEndpoint endpoint_;
};

class HttpCompiler : public CompilerBackend {
 public:
  HttpCompiler(std::string base_url, std::string path = "/compile", int max_retries = 2)
      : base_url_(std::move(base_url)), path_(std::move(path)), max_retries_(max_retries) {}
  CompileResult compile(const std::string& file_text) override;

 private:
  std::string base_url_;
  std::string path_;
  int max_retries_;
};

class HttpJudge : public JudgeBackend {
 public:
  explicit HttpJudge(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  JudgeResult judge(const std::string& problem_id, const std::string& informal,
                    const std::string& file_text) override;

 private:
  HttpEndpoint endpoint_;
};

class HttpProver : public ProverBackend {
 public:
  explicit HttpProver(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string prove(const std::string& problem_id, const std::string& file_text,
                    int statement_index, int sample_index) override {
    (void)problem_id;
    (void)statement_index;
    (void)sample_index;
    return http_backend_call(endpoint_, render_prover_prompt(file_text), 1.0,
                             endpoint_.max_retries);
  }

 private:
  HttpEndpoint endpoint_;
};

}  // namespace evostmt
