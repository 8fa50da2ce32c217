#include <doctest.h>

#include <set>

#include "evostmt/runio.hpp"
#include "evostmt/search.hpp"
#include "helpers.hpp"

using namespace evostmt;

namespace {

const char* kRef =
    "import Mathlib\ntheorem shape (a b : Nat) (h : a < b) : a <= b /\\ (P0 \\/ P1) := by sorry\n";

ProblemRecord make_record(const std::string& id, bool with_refs, double compile_prob,
                          double semantic_prob, double mutation_rate = 0.5) {
  ProblemRecord rec;
  rec.problem_id = id;
  rec.informal_text = "if a is less than b then a is at most b, and one of the cases holds";
  if (with_refs) rec.reference_statements = {kRef};
  rec.sim.compile_prob = compile_prob;
  rec.sim.semantic_prob = semantic_prob;
  rec.sim.mutation_rate = mutation_rate;
  return rec;
}

RunLog run_one(const ProblemRecord& rec, SearchConfig cfg, const SimSettings& settings = {}) {
  auto set = build_sim_backends({rec}, settings);
  Problem problem{rec.problem_id, rec.informal_text, rec.preseeds};
  return run_problem(problem, cfg, set.backends(), "test-run");
}

void check_invariants(const RunLog& log, int budget) {
  CHECK(static_cast<int>(log.ledger.entries.size()) == budget);
  CHECK(log.events.size() == log.ledger.entries.size());
  std::set<std::string> keys;
  long judged = 0, evolast_judged = 0;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const RunEvent& e = log.events[i];
    CHECK(e.call_index == static_cast<int>(i) + 1);
    CHECK(e.score == gated_score(e.compile_ok, e.semantic_ok));
    if (e.semantic_ok) CHECK(e.compile_ok);  // judge only fires behind the gate
    if (e.compile_ok) {
      ++judged;
      if (e.provenance == Provenance::Evolast) ++evolast_judged;
    }
  }
  CHECK(log.judge_invocations == judged);
  CHECK(log.evolast_judge_invocations == evolast_judged);
  CHECK(evolast_judged <= judged);
  for (const Candidate& c : log.candidates) {
    CHECK(c.score == gated_score(c.compile_ok, c.semantic_ok));
    if (c.archived) {
      CHECK(c.compile_ok);
      CHECK(keys.insert(c.canonical_text).second);  // globally unique keys
    }
  }
}

}  // namespace

TEST_CASE("run_problem: zero budget yields an empty log") {
  SearchConfig cfg;
  cfg.budget = 0;
  RunLog log = run_one(make_record("p", true, 1.0, 1.0), cfg);
  CHECK(log.events.empty());
  CHECK(log.ledger.entries.empty());
}

TEST_CASE("run_problem: seeded run fills the budget exactly and keeps invariants") {
  SearchConfig cfg;
  cfg.budget = 100;
  cfg.rng_seed = 42;
  RunLog log = run_one(make_record("p", true, 0.6, 0.5), cfg);
  check_invariants(log, 100);
  long gen = 0, crep = 0, srep = 0;
  for (const auto& entry : log.ledger.entries) {
    switch (entry.kind) {
      case CallKind::Seed:
      case CallKind::Patch: ++gen; break;
      case CallKind::CompileRepair: ++crep; break;
      case CallKind::SemanticRepair: ++srep; break;
    }
    CHECK(entry.representative_id >= 0);
  }
  CHECK(gen + crep + srep == 100);
  CHECK(crep > 0);  // failures occur at compile_prob 0.6
}

TEST_CASE("run_problem: determinism of the full event stream") {
  SearchConfig cfg;
  cfg.budget = 60;
  cfg.rng_seed = 7;
  ProblemRecord rec = make_record("p", true, 0.7, 0.4);
  RunLog a = run_one(rec, cfg);
  RunLog b = run_one(rec, cfg);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i)
    CHECK(event_to_json(a.events[i]).dump() == event_to_json(b.events[i]).dump());
}

TEST_CASE("run_problem: degenerate generator degrades to duplicates and fallbacks") {
  SearchConfig cfg;
  cfg.budget = 40;
  cfg.rng_seed = 3;
  cfg.islands = 1;  // the duplicate check is island-local
  // mutation off: the generator emits the same reference text on every call
  RunLog log = run_one(make_record("p", true, 1.0, 1.0, 0.0), cfg);
  check_invariants(log, 40);
  bool first_insert_seen = false;
  for (const RunEvent& e : log.events) {
    if (e.kind == CallKind::Seed && e.compile_ok) {
      first_insert_seen = true;
      continue;
    }
    if (!first_insert_seen || e.kind != CallKind::Patch) continue;
    // every later proposal is an exact duplicate: the representative is either
    // the call-free fallback or the degraded duplicate original
    bool fallback = e.provenance == Provenance::Evolast;
    bool degraded = !e.compile_ok && e.error_type == "duplicate";
    CHECK((fallback || degraded));
  }
}

TEST_CASE("run_problem: budget boundary suppresses the trailing repair call") {
  SearchConfig cfg;
  cfg.budget = 17;  // seedbank 16 + exactly one loop call
  cfg.seedbank_size = 16;
  cfg.rng_seed = 11;
  // Judge always rejects (no references) but compilation succeeds: the one
  // patch call would trigger a semantic repair, which the cap forbids.
  RunLog log = run_one(make_record("p", false, 1.0, 0.0), cfg);
  CHECK(static_cast<int>(log.ledger.entries.size()) == 17);
  CHECK(log.ledger.entries.back().kind == CallKind::Patch);
}

TEST_CASE("run_problem: preseeds are ingested and debited") {
  SearchConfig cfg;
  cfg.budget = 10;
  cfg.seedbank_size = 4;
  cfg.rng_seed = 5;
  ProblemRecord rec = make_record("p", true, 1.0, 1.0);
  rec.preseeds = {kRef, "not even lean", kRef};
  RunLog log = run_one(rec, cfg);
  check_invariants(log, 10);
  CHECK(log.events[0].kind == CallKind::Seed);
  CHECK(log.events[0].compile_ok);
  CHECK_FALSE(log.events[1].compile_ok);  // malformed preseed consumed a call
  CHECK(log.events[2].compile_ok);
}

TEST_CASE("run_problem: empty reference set never produces a semantic hit") {
  SearchConfig cfg;
  cfg.budget = 50;
  cfg.rng_seed = 9;
  RunLog log = run_one(make_record("p", false, 0.9, 0.9), cfg);
  for (const RunEvent& e : log.events) CHECK_FALSE(e.semantic_ok);
}

TEST_CASE("run_problem: disabling the fallback removes evolast provenance") {
  SearchConfig cfg;
  cfg.budget = 60;
  cfg.rng_seed = 13;
  cfg.evolast_enabled = false;
  RunLog log = run_one(make_record("p", true, 0.5, 0.5, 0.0), cfg);
  for (const RunEvent& e : log.events) CHECK(e.provenance != Provenance::Evolast);
}

TEST_CASE("run_problem: sample-mode configuration spends everything on generation") {
  SearchConfig cfg;
  cfg.budget = 80;
  cfg.rng_seed = 17;
  cfg.repair_max_attempts = 0;
  RunLog log = run_one(make_record("p", true, 0.5, 0.5), cfg);
  check_invariants(log, 80);
  for (const auto& entry : log.ledger.entries) {
    CHECK(entry.kind != CallKind::CompileRepair);
    CHECK(entry.kind != CallKind::SemanticRepair);
  }
}

TEST_CASE("run_problem: empty seedbank keeps seeding until the archive opens") {
  SearchConfig cfg;
  cfg.budget = 30;
  cfg.seedbank_size = 2;
  cfg.rng_seed = 23;
  ProblemRecord rec = make_record("p", true, 1.0, 0.5);
  rec.sim.compile_prob_by_mode["seed"] = 0.15;  // most seeds fail to compile
  RunLog log = run_one(rec, cfg);
  check_invariants(log, 30);
  // every call before the first feasible candidate must be a seed call
  bool feasible_seen = false;
  for (const RunEvent& e : log.events) {
    if (!feasible_seen && e.call_index > 2) CHECK(e.kind == CallKind::Seed);
    if (e.compile_ok) feasible_seen = true;
    if (feasible_seen) break;
  }
  CHECK(feasible_seen);
}

TEST_CASE("run_problem: usage penalty spreads parents (directional)") {
  ProblemRecord rec = make_record("p", true, 1.0, 0.0, 1.0);
  auto distinct_parents = [&](double beta, std::uint64_t seed) {
    SearchConfig cfg;
    cfg.budget = 60;
    cfg.islands = 1;
    cfg.beta = beta;
    cfg.rng_seed = seed;
    RunLog log = run_one(rec, cfg);
    std::set<int> parents;
    for (const RunEvent& e : log.events)
      if (e.kind == CallKind::Patch && e.parent_id >= 0) parents.insert(e.parent_id);
    return static_cast<double>(parents.size());
  };
  double with_penalty = 0, without_penalty = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    with_penalty += distinct_parents(0.05, seed);
    without_penalty += distinct_parents(-1.0, seed);
  }
  CHECK(with_penalty > without_penalty);
}

TEST_CASE("run_problem: evolast strictly increases diversity on the duplicate-heavy profile") {
  ProblemRecord rec = make_record("p", true, 1.0, 1.0, 0.0);  // duplicates on every patch
  auto div_at_end = [&](bool evolast_on, std::uint64_t seed) {
    SearchConfig cfg;
    cfg.budget = 50;
    cfg.rng_seed = seed;
    cfg.evolast_enabled = evolast_on;
    RunLog log = run_one(rec, cfg);
    ProblemTrace trace;
    trace.problem_id = "p";
    trace.events = log.events;
    return per_call_metrics(trace, 50).div;
  };
  int on = 0, off = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    on += div_at_end(true, seed);
    off += div_at_end(false, seed);
  }
  CHECK(on > off);
}
