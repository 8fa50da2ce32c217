#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evostmt/backends.hpp"
#include "evostmt/metrics.hpp"
#include "evostmt/rng.hpp"
#include "evostmt/statement.hpp"

namespace evostmt {

struct SearchConfig {
  int budget = 100;  // hard generator-call cap per problem
  int islands = 2;
  int capacity = 40;
  double lambda = 10.0;
  double beta = 0.05;  // beta = -1 turns the usage penalty off (u_i == 1)
  double eps_mad = 1e-9;
  double op_full = 0.5;
  double op_diff = 0.3;
  double op_cross = 0.2;
  int max_patch_attempts = 1;  // one proposal call per iteration
  int repair_max_attempts = 2; // compile + semantic repairs per proposal chain
  double repair_temperature = 0.7;
  double proposal_temperature = 1.0;
  int archive_inspirations = 4;
  int topk_inspirations = 2;
  int cross_k = 1;
  int migration_interval = 10;
  double migration_rate = 0.1;
  int elitism_top = 1;
  int seedbank_size = 16;
  bool evolast_enabled = true;
  int evolast_max_steps = 3;
  std::uint64_t rng_seed = 0;

  void validate() const;  // throws ConfigInvalid
};

int gated_score(bool compile_ok, bool semantic_ok);

// Even-length median is the mean of the middle two; MAD is the median of
// absolute deviations from the median.
std::pair<double, double> median_and_mad(const std::vector<double>& values);

// p_i proportional to sigmoid(lambda * (s_i - median)/max(MAD, eps)) / (1 + (1+beta) n_i).
std::vector<double> parent_weights(const std::vector<double>& scores,
                                   const std::vector<double>& usages, double lambda,
                                   double beta, double eps);

struct Candidate {
  int id = -1;
  StatementFile file;       // meaningful only when parsed
  bool parsed = false;
  std::string raw_text;     // enforced printed form when parseable
  std::string canonical_text;
  bool compile_ok = false;
  bool semantic_ok = false;
  std::string judge_rationale;
  std::string error_type;
  std::string error_msg;
  int score = 0;
  int usage_count = 0;
  int island = -1;
  int generation = 0;
  Provenance provenance = Provenance::Seed;
  int parent_id = -1;
  int call_index = 0;       // debited call that produced it; evolast inherits
  bool archived = false;

  std::string canonical_digest() const;
};

struct Archive {
  int capacity = 40;
  std::vector<std::vector<int>> islands;  // candidate ids
  std::set<std::string> keys;             // canonical texts of live members

  explicit Archive(int num_islands = 1, int cap = 40)
      : capacity(cap), islands(static_cast<std::size_t>(num_islands)) {}
  std::size_t total_size() const;
  bool contains_key(const std::string& canonical_text) const { return keys.count(canonical_text) > 0; }
};

// Uniform over islands with at least one member; throws EmptyArchive.
int sample_island(const Archive& archive, Rng& rng);

// Usage-penalized parent pick within one island.
int sample_parent(const Archive& archive, const std::vector<Candidate>& candidates,
                  int island, const SearchConfig& config, Rng& rng);

struct InspirationContext {
  std::vector<int> archive_ids;  // uniform without replacement, parent excluded
  std::vector<int> topk_ids;     // highest score, ties to the earlier call
};

InspirationContext sample_context(const Archive& archive, const std::vector<Candidate>& candidates,
                                  int island, int parent_id, const SearchConfig& config, Rng& rng);

// Feasibility-gated, duplicate-rejecting insert with lowest-score/oldest
// non-elite eviction at capacity.
bool insert_archive(Archive& archive, std::vector<Candidate>& candidates, int cand_id,
                    int elitism_top);

// Moves floor(rate * island_size) non-elite generation>0 members per island
// when generation is a multiple of the interval.
int maybe_migrate(Archive& archive, std::vector<Candidate>& candidates, int generation,
                  const SearchConfig& config, Rng& rng);

struct LedgerEntry {
  int call_index = 0;
  CallKind kind = CallKind::Seed;
  int representative_id = -1;
};

struct BudgetLedger {
  int limit = 0;
  std::vector<LedgerEntry> entries;
};

struct Problem {
  std::string id;
  std::string informal;
  std::vector<std::string> preseeds;
};

struct RunLog {
  std::string problem_id;
  std::vector<RunEvent> events;
  BudgetLedger ledger;
  std::vector<Candidate> candidates;
  long judge_invocations = 0;
  long evolast_judge_invocations = 0;
};

using EventSink = std::function<void(const RunEvent&)>;

// The per-problem loop: seedbank, islands, usage-penalized selection,
// full/diff/cross proposals, bounded compile/semantic repair, duplicate- and
// failure-triggered call-free fallback, strict budget accounting. Every
// debited call appends exactly one event.
RunLog run_problem(const Problem& problem, const SearchConfig& config, const Backends& backends,
                   const std::string& run_id, const EventSink& sink = nullptr);

}  // namespace evostmt
