#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evostmt/rng.hpp"

namespace evostmt {

enum class CallKind { Seed, Patch, CompileRepair, SemanticRepair };
const char* call_kind_name(CallKind k);
CallKind call_kind_from_name(const std::string& s);

enum class Provenance { Seed, Full, Diff, Cross, CompileRepairOut, SemanticRepairOut, Evolast };
const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& s);

// One debited generator call and its evaluated representative candidate.
struct RunEvent {
  std::string run_id;
  std::string problem_id;
  int call_index = 0;  // 1-based, contiguous
  CallKind kind = CallKind::Seed;
  Provenance provenance = Provenance::Seed;
  std::string operator_mode;  // seed | full | diff | cross | compile_repair | semantic_repair
  bool compile_ok = false;
  bool semantic_ok = false;
  int score = 0;
  std::string canonical_key;  // digest; empty when the candidate never parsed
  std::string statement_text;
  std::string error_type;
  std::string judge_rationale;
  int parent_id = -1;
  int island = -1;
  int generation = 0;
  int timestamp = 0;  // deterministic per-problem event ordinal
};

struct ProblemTrace {
  std::string problem_id;
  std::vector<RunEvent> events;  // ordered by call_index, contiguous from 1
};

struct PerCallMetrics {
  double fy = 0.0;   // fraction of calls that compile
  bool ch = false;   // at least one compilable candidate
  bool sh = false;   // at least one compilable & judge-consistent candidate
  double sd = 0.0;   // semantic density among compilable candidates (0 when none)
  double sy = 0.0;   // semantic yield per call
  int div = 0;       // deduplicated semantic successes
};

PerCallMetrics per_call_metrics(const ProblemTrace& trace, int t);

// Gini coefficient of nonnegative counts; eps floors the denominator only.
double gini(const std::vector<double>& counts, double eps = 1e-9);

// Share of the ceil(fraction*N) largest counts (ties to the lower index).
double top_share(const std::vector<double>& counts, double fraction = 0.10);

// Smallest call index with a semantic success; nullopt encodes ">T".
std::optional<int> first_hit(const ProblemTrace& trace);

struct BudgetAudit {
  long gen = 0;    // seed + patch entries
  long crep = 0;
  long srep = 0;
  long total = 0;
  long judge_calls = 0;    // compilable representatives reaching the judge
  long evolast_judge = 0;  // the evolast-provenance subset
};

BudgetAudit budget_audit(const std::vector<ProblemTrace>& traces);

// Round-robin allocation of B prover attempts over M statements.
std::vector<std::pair<int, int>> rr64_schedule(int num_statements, int budget = 64);

struct ProverAttempt {
  std::string problem_id;
  int statement_index = 0;
  int sample_index = 0;
  std::string output_text;
  bool pass = false;
  bool complete = false;
  bool theorem_complete = false;
  int sorry_count = 0;
};

struct ProofUtility {
  int pass_count = 0;
  int complete_count = 0;
  int theorem_complete_count = 0;
  int attempted = 0;  // problems with at least one attempt
  int n = 0;
};

// Per problem each indicator is 1 iff any attempt satisfies it; problems with
// zero attempts contribute 0.
ProofUtility proof_utility(const std::vector<ProverAttempt>& attempts,
                           const std::vector<std::string>& problem_ids);

struct RepertoireEntry {
  int call_index = 0;
  std::string canonical_key;
  std::string statement_text;
};

// Semantic successes deduplicated by canonical key (earliest kept), ordered by
// call index, truncated at cap.
std::vector<RepertoireEntry> repertoire_for_proving(const ProblemTrace& trace, int cap = 64);

struct BootstrapCi {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

BootstrapCi paired_bootstrap_ci(const std::vector<double>& a, const std::vector<double>& b,
                                int reps, double level, Rng& rng);

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;
};

// Two-sided exact binomial sign test (minimum-likelihood tail summation);
// all-ties reports p = 1.0.
SignTest exact_sign_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace evostmt
