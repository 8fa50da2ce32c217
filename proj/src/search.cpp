#include "evostmt/search.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "evostmt/errors.hpp"
#include "evostmt/rewrite.hpp"

namespace evostmt {

void SearchConfig::validate() const {
  if (budget < 0) throw ConfigInvalid("budget", "must be >= 0");
  if (islands < 1) throw ConfigInvalid("islands", "must be >= 1");
  if (capacity < 1) throw ConfigInvalid("capacity", "must be >= 1");
  if (eps_mad <= 0) throw ConfigInvalid("eps_mad", "must be > 0");
  if (beta < -1.0) throw ConfigInvalid("beta", "must be >= -1");
  if (op_full < 0 || op_diff < 0 || op_cross < 0)
    throw ConfigInvalid("operator_probs", "must be nonnegative");
  if (std::abs(op_full + op_diff + op_cross - 1.0) > 1e-9)
    throw ConfigInvalid("operator_probs", "must sum to 1");
  if (max_patch_attempts != 1)
    throw ConfigInvalid("max_patch_attempts", "one proposal call per iteration is supported");
  if (repair_max_attempts < 0) throw ConfigInvalid("repair_max_attempts", "must be >= 0");
  if (archive_inspirations < 0) throw ConfigInvalid("archive_inspirations", "must be >= 0");
  if (topk_inspirations < 0) throw ConfigInvalid("topk_inspirations", "must be >= 0");
  if (cross_k < 1) throw ConfigInvalid("cross_k", "must be >= 1");
  if (migration_interval < 1) throw ConfigInvalid("migration_interval", "must be >= 1");
  if (migration_rate < 0 || migration_rate > 1)
    throw ConfigInvalid("migration_rate", "must be in [0,1]");
  if (elitism_top < 0) throw ConfigInvalid("elitism_top", "must be >= 0");
  if (seedbank_size < 0) throw ConfigInvalid("seedbank_size", "must be >= 0");
  if (evolast_max_steps < 1) throw ConfigInvalid("evolast_max_steps", "must be >= 1");
}

int gated_score(bool compile_ok, bool semantic_ok) {
  return (compile_ok ? 1 : 0) * (1 + (semantic_ok ? 1 : 0));
}

std::pair<double, double> median_and_mad(const std::vector<double>& values) {
  if (values.empty()) throw EmptyPopulation();
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  };
  double med = median_of(values);
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::abs(v - med));
  return {med, median_of(std::move(dev))};
}

std::vector<double> parent_weights(const std::vector<double>& scores,
                                   const std::vector<double>& usages, double lambda,
                                   double beta, double eps) {
  if (scores.empty() || scores.size() != usages.size()) throw EmptyPopulation();
  auto [med, mad] = median_and_mad(scores);
  double d = std::max(mad, eps);
  auto sigmoid = [](double x) {
    // exp(-x) saturates to inf for very negative x; 1/(1+inf) underflows to 0,
    // which is the intended limit.
    return 1.0 / (1.0 + std::exp(-x));
  };
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double z = (scores[i] - med) / d;
    double u = 1.0 / (1.0 + (1.0 + beta) * usages[i]);
    w[i] = sigmoid(lambda * z) * u;
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::string Candidate::canonical_digest() const {
  return canonical_text.empty() ? std::string() : hex64(fnv1a64(canonical_text));
}

std::size_t Archive::total_size() const {
  std::size_t n = 0;
  for (const auto& isl : islands) n += isl.size();
  return n;
}

int sample_island(const Archive& archive, Rng& rng) {
  std::vector<int> nonempty;
  for (int i = 0; i < static_cast<int>(archive.islands.size()); ++i)
    if (!archive.islands[static_cast<std::size_t>(i)].empty()) nonempty.push_back(i);
  if (nonempty.empty()) throw EmptyArchive();
  return nonempty[rng.uniform_index(nonempty.size())];
}

int sample_parent(const Archive& archive, const std::vector<Candidate>& candidates,
                  int island, const SearchConfig& config, Rng& rng) {
  const auto& members = archive.islands[static_cast<std::size_t>(island)];
  if (members.empty()) throw EmptyArchive();
  std::vector<double> scores, usages;
  scores.reserve(members.size());
  usages.reserve(members.size());
  for (int id : members) {
    scores.push_back(candidates[static_cast<std::size_t>(id)].score);
    usages.push_back(candidates[static_cast<std::size_t>(id)].usage_count);
  }
  std::vector<double> p = parent_weights(scores, usages, config.lambda, config.beta, config.eps_mad);
  return members[rng.pick_weighted(p)];
}

namespace {

// Highest score first, earlier call on ties.
void sort_by_rank(std::vector<int>& ids, const std::vector<Candidate>& candidates) {
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    const Candidate& ca = candidates[static_cast<std::size_t>(a)];
    const Candidate& cb = candidates[static_cast<std::size_t>(b)];
    if (ca.score != cb.score) return ca.score > cb.score;
    return ca.call_index < cb.call_index;
  });
}

std::set<int> island_elites(const Archive& archive, const std::vector<Candidate>& candidates,
                            int elitism_top) {
  std::set<int> elites;
  for (const auto& members : archive.islands) {
    std::vector<int> sorted(members.begin(), members.end());
    sort_by_rank(sorted, candidates);
    for (int i = 0; i < elitism_top && i < static_cast<int>(sorted.size()); ++i)
      elites.insert(sorted[static_cast<std::size_t>(i)]);
  }
  return elites;
}

}  // namespace

InspirationContext sample_context(const Archive& archive, const std::vector<Candidate>& candidates,
                                  int island, int parent_id, const SearchConfig& config,
                                  Rng& rng) {
  InspirationContext ctx;
  std::vector<int> others;
  for (int id : archive.islands[static_cast<std::size_t>(island)])
    if (id != parent_id) others.push_back(id);
  std::vector<int> shuffled = others;
  rng.shuffle(shuffled);
  for (int i = 0; i < config.archive_inspirations && i < static_cast<int>(shuffled.size()); ++i)
    ctx.archive_ids.push_back(shuffled[static_cast<std::size_t>(i)]);
  std::vector<int> ranked = others;
  sort_by_rank(ranked, candidates);
  for (int i = 0; i < config.topk_inspirations && i < static_cast<int>(ranked.size()); ++i)
    ctx.topk_ids.push_back(ranked[static_cast<std::size_t>(i)]);
  return ctx;
}

bool insert_archive(Archive& archive, std::vector<Candidate>& candidates, int cand_id,
                    int elitism_top) {
  Candidate& cand = candidates[static_cast<std::size_t>(cand_id)];
  if (!cand.compile_ok || cand.canonical_text.empty()) return false;
  if (archive.contains_key(cand.canonical_text)) return false;
  if (cand.island < 0 || cand.island >= static_cast<int>(archive.islands.size())) return false;

  if (archive.total_size() >= static_cast<std::size_t>(archive.capacity)) {
    std::set<int> elites = island_elites(archive, candidates, elitism_top);
    int victim = -1;
    for (const auto& members : archive.islands) {
      for (int id : members) {
        if (elites.count(id)) continue;
        if (victim < 0) {
          victim = id;
          continue;
        }
        const Candidate& cv = candidates[static_cast<std::size_t>(victim)];
        const Candidate& ci = candidates[static_cast<std::size_t>(id)];
        if (ci.score < cv.score || (ci.score == cv.score && ci.call_index < cv.call_index))
          victim = id;
      }
    }
    if (victim < 0) return false;  // every member is an elite
    Candidate& cv = candidates[static_cast<std::size_t>(victim)];
    auto& members = archive.islands[static_cast<std::size_t>(cv.island)];
    members.erase(std::find(members.begin(), members.end(), victim));
    archive.keys.erase(cv.canonical_text);
    cv.archived = false;
  }

  archive.islands[static_cast<std::size_t>(cand.island)].push_back(cand_id);
  archive.keys.insert(cand.canonical_text);
  cand.archived = true;
  return true;
}

int maybe_migrate(Archive& archive, std::vector<Candidate>& candidates, int generation,
                  const SearchConfig& config, Rng& rng) {
  const int k = static_cast<int>(archive.islands.size());
  if (k < 2) return 0;
  if (generation <= 0 || generation % config.migration_interval != 0) return 0;
  std::set<int> elites = island_elites(archive, candidates, config.elitism_top);
  struct Move {
    int id;
    int to;
  };
  std::vector<Move> moves;
  for (int i = 0; i < k; ++i) {
    const auto& members = archive.islands[static_cast<std::size_t>(i)];
    int quota = static_cast<int>(std::floor(config.migration_rate *
                                            static_cast<double>(members.size())));
    if (quota <= 0) continue;
    std::vector<int> eligible;
    for (int id : members) {
      const Candidate& c = candidates[static_cast<std::size_t>(id)];
      if (c.generation > 0 && !elites.count(id)) eligible.push_back(id);
    }
    rng.shuffle(eligible);
    for (int j = 0; j < quota && j < static_cast<int>(eligible.size()); ++j) {
      int target = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k - 1)));
      if (target >= i) ++target;
      moves.push_back({eligible[static_cast<std::size_t>(j)], target});
    }
  }
  for (const Move& m : moves) {
    Candidate& c = candidates[static_cast<std::size_t>(m.id)];
    auto& from = archive.islands[static_cast<std::size_t>(c.island)];
    from.erase(std::find(from.begin(), from.end(), m.id));
    archive.islands[static_cast<std::size_t>(m.to)].push_back(m.id);
    c.island = m.to;
  }
  return static_cast<int>(moves.size());
}

// ---------------------------------------------------------------------------
// The per-problem loop

namespace {

std::string collapse_ws_local(const std::string& s) {
  std::string out;
  bool in_space = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

struct Enforced {
  std::string text;
  bool protocol_failed = false;
  std::string error_msg;
  std::optional<StatementFile> file;
};

// Placeholder proof enforced in every mode; diff mode restores the parent
// preamble verbatim; multiple declarations are a protocol failure.
Enforced enforce_protocol(const std::string& block, const StatementFile* parent_file,
                          bool diff_mode) {
  Enforced out;
  out.text = block;
  try {
    StatementFile f = parse_file(block);
    f.proof_body = "by sorry";
    if (diff_mode && parent_file) f.preamble = parent_file->preamble;
    out.file = f;
    out.text = print_file(f);
  } catch (const MultipleDeclarations&) {
    out.protocol_failed = true;
    out.error_msg = "more than one theorem/lemma declaration";
  } catch (const std::exception&) {
    // Leave the text as-is; the compile gate will classify it.
  }
  return out;
}

class ProblemRun {
 public:
  ProblemRun(const Problem& problem, const SearchConfig& config, const Backends& backends,
             std::string run_id, const EventSink& sink)
      : problem_(problem),
        config_(config),
        backends_(backends),
        run_id_(std::move(run_id)),
        sink_(sink),
        rng_(problem_seed(config.rng_seed, problem.id)),
        archive_(config.islands, config.capacity) {
    log_.problem_id = problem.id;
    log_.ledger.limit = config.budget;
  }

  RunLog run() {
    seed_phase();
    while (t() < config_.budget) {
      ++generation_;
      iteration();
      maybe_migrate(archive_, log_.candidates, generation_, config_, rng_);
    }
    return std::move(log_);
  }

 private:
  int t() const { return static_cast<int>(log_.ledger.entries.size()); }

  int debit(CallKind kind) {
    int index = t() + 1;
    log_.ledger.entries.push_back({index, kind, -1});
    return index;
  }

  // One evaluated representative per debited call.
  void emit(const Candidate& rep, CallKind kind, const std::string& operator_mode) {
    log_.ledger.entries.back().representative_id = rep.id;
    RunEvent e;
    e.run_id = run_id_;
    e.problem_id = problem_.id;
    e.call_index = rep.call_index;
    e.kind = kind;
    e.provenance = rep.provenance;
    e.operator_mode = operator_mode;
    e.compile_ok = rep.compile_ok;
    e.semantic_ok = rep.semantic_ok;
    e.score = rep.score;
    e.canonical_key = rep.canonical_digest();
    e.statement_text = rep.raw_text;
    e.error_type = rep.error_type;
    e.judge_rationale = rep.judge_rationale;
    e.parent_id = rep.parent_id;
    e.island = rep.island;
    e.generation = rep.generation;
    e.timestamp = static_cast<int>(log_.events.size()) + 1;
    log_.events.push_back(e);
    if (sink_) sink_(e);
  }

  Candidate make_candidate(Provenance prov, int parent_id, int island, int call_index) {
    Candidate c;
    c.id = static_cast<int>(log_.candidates.size());
    c.provenance = prov;
    c.parent_id = parent_id;
    c.island = island;
    c.call_index = call_index;
    c.generation = generation_;
    return c;
  }

  // Compile gate, then judge behind the gate; fills flags and score. A
  // precomputed compile result avoids re-running an external compiler.
  void gate_and_judge(Candidate& c, const CompileResult* precomputed = nullptr) {
    CompileResult cr;
    if (precomputed) {
      cr = *precomputed;
    } else {
      try {
        cr = backends_.compiler->compile(c.raw_text);
      } catch (const std::exception& e) {
        cr = {false, "backend", e.what()};
      }
    }
    c.compile_ok = cr.ok;
    c.error_type = cr.error_type;
    c.error_msg = cr.error_msg;
    if (!c.parsed) {
      try {
        c.file = parse_file(c.raw_text);
        c.parsed = true;
      } catch (const std::exception&) {
      }
    }
    if (c.parsed) {
      c.canonical_text = canonicalize(c.file).key;
    } else if (c.compile_ok) {
      // An external compiler may accept files outside the local grammar.
      c.canonical_text = collapse_ws_local(c.raw_text);
    }
    if (c.compile_ok) {
      ++log_.judge_invocations;
      if (c.provenance == Provenance::Evolast) ++log_.evolast_judge_invocations;
      try {
        JudgeResult jr = backends_.judge->judge(problem_.id, problem_.informal, c.raw_text);
        c.semantic_ok = jr.ok;
        c.judge_rationale = jr.rationale;
      } catch (const std::exception& e) {
        c.semantic_ok = false;
        c.judge_rationale = std::string("judge unavailable: ") + e.what();
      }
    }
    c.score = gated_score(c.compile_ok, c.semantic_ok);
  }

  int commit(Candidate c) {
    int id = c.id;
    log_.candidates.push_back(std::move(c));
    if (log_.candidates[static_cast<std::size_t>(id)].compile_ok)
      insert_archive(archive_, log_.candidates, id, config_.elitism_top);
    return id;
  }

  Candidate failed_candidate(Provenance prov, int parent_id, int island, int call_index,
                             std::string text, std::string error_type, std::string error_msg) {
    Candidate c = make_candidate(prov, parent_id, island, call_index);
    c.raw_text = std::move(text);
    c.error_type = std::move(error_type);
    c.error_msg = std::move(error_msg);
    try {
      c.file = parse_file(c.raw_text);
      c.parsed = true;
      c.canonical_text = canonicalize(c.file).key;
    } catch (const std::exception&) {
    }
    c.score = 0;
    return c;
  }

  std::optional<std::string> call_generator(GeneratorRequest req, std::string* error) {
    std::string response;
    try {
      response = backends_.generator->generate(req);
    } catch (const std::exception& e) {
      *error = e.what();
      return std::nullopt;
    }
    auto block = extract_code_block(response);
    if (!block) {
      *error = "response carried no lean code block";
      return std::nullopt;
    }
    return block;
  }

  // --- seed phase -----------------------------------------------------------

  void seed_one(const std::string* preseed) {
    int call_index = debit(CallKind::Seed);
    std::string text;
    std::string error;
    bool failed = false;
    if (preseed) {
      text = *preseed;
    } else {
      GeneratorRequest req;
      req.mode = GenMode::Seed;
      req.problem_id = problem_.id;
      req.informal_text = problem_.informal;
      req.temperature = config_.proposal_temperature;
      req.rng_seed = rng_.fork_seed();
      auto block = call_generator(std::move(req), &error);
      if (!block) failed = true;
      else text = *block;
    }
    if (failed) {
      Candidate c = failed_candidate(Provenance::Seed, -1, -1, call_index, "", "backend", error);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))], CallKind::Seed, "seed");
      return;
    }
    Enforced enforced = enforce_protocol(text, nullptr, false);
    if (enforced.protocol_failed) {
      Candidate c = failed_candidate(Provenance::Seed, -1, -1, call_index, text, "protocol",
                                     enforced.error_msg);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))], CallKind::Seed, "seed");
      return;
    }
    Candidate c = make_candidate(Provenance::Seed, -1, -1, call_index);
    c.raw_text = enforced.text;
    if (enforced.file) {
      c.file = *enforced.file;
      c.parsed = true;
    }
    gate_and_judge(c);
    if (c.compile_ok) {
      c.island = next_seed_island_ % config_.islands;  // round-robin by feasibility order
      ++next_seed_island_;
    }
    emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))], CallKind::Seed, "seed");
  }

  void seed_phase() {
    std::size_t preseed_count = problem_.preseeds.size();
    for (int i = 0; i < config_.seedbank_size && t() < config_.budget; ++i) {
      const std::string* preseed =
          static_cast<std::size_t>(i) < preseed_count ? &problem_.preseeds[static_cast<std::size_t>(i)] : nullptr;
      seed_one(preseed);
    }
    for (std::size_t i = static_cast<std::size_t>(config_.seedbank_size); i < preseed_count && t() < config_.budget; ++i)
      seed_one(&problem_.preseeds[i]);
    // The loop needs a nonempty archive; keep seeding on the same budget.
    while (archive_.total_size() == 0 && t() < config_.budget) seed_one(nullptr);
  }

  // --- main loop ------------------------------------------------------------

  GenMode pick_operator() {
    std::size_t i = rng_.pick_weighted({config_.op_full, config_.op_diff, config_.op_cross});
    return i == 0 ? GenMode::Full : i == 1 ? GenMode::Diff : GenMode::Cross;
  }

  std::string performance_summary(const Candidate& c) const {
    std::ostringstream os;
    os << "compile_ok=" << (c.compile_ok ? 1 : 0) << ", semantic_ok=" << (c.semantic_ok ? 1 : 0)
       << ", score=" << c.score;
    return os.str();
  }

  bool duplicate_in_island(const std::string& canonical_text, int island) const {
    for (int id : archive_.islands[static_cast<std::size_t>(island)])
      if (log_.candidates[static_cast<std::size_t>(id)].canonical_text == canonical_text)
        return true;
    return false;
  }

  void evolast_fallback(const Candidate& parent, int island, int call_index, CallKind kind,
                        const std::string& operator_mode, const std::string& failing_text,
                        const std::string& fail_error_type, const std::string& fail_error_msg) {
    if (config_.evolast_enabled && parent.parsed) {
      auto variant = evolast_variant(parent.file, rng_.fork_seed(), config_.evolast_max_steps);
      if (variant) {
        Candidate rep = make_candidate(Provenance::Evolast, parent.id, island, call_index);
        rep.file = *variant;
        rep.parsed = true;
        rep.raw_text = print_file(*variant);
        gate_and_judge(rep);  // no semantic repair for fallback representatives
        emit(log_.candidates[static_cast<std::size_t>(commit(std::move(rep)))], kind, operator_mode);
        return;
      }
    }
    Provenance prov = operator_mode == "full" ? Provenance::Full
                      : operator_mode == "diff" ? Provenance::Diff
                      : operator_mode == "cross" ? Provenance::Cross
                      : operator_mode == "compile_repair" ? Provenance::CompileRepairOut
                                                          : Provenance::Seed;
    Candidate c = failed_candidate(prov, parent.id, island, call_index, failing_text,
                                   fail_error_type, fail_error_msg);
    emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))], kind, operator_mode);
  }

  // One bounded semantic-repair call for a compilable, judge-rejected candidate.
  void semantic_repair(int failing_id, int island, int& repairs_used) {
    const Candidate& failing = log_.candidates[static_cast<std::size_t>(failing_id)];
    GeneratorRequest req;
    req.mode = GenMode::SemanticRepair;
    req.problem_id = problem_.id;
    req.informal_text = problem_.informal;
    req.parent_text = failing.raw_text;
    req.critic_feedback =
        failing.judge_rationale.empty() ? "the statement does not match the claim" : failing.judge_rationale;
    req.temperature = config_.repair_temperature;
    req.rng_seed = rng_.fork_seed();
    int call_index = debit(CallKind::SemanticRepair);
    ++repairs_used;
    std::string error;
    auto block = call_generator(std::move(req), &error);
    if (!block) {
      Candidate c = failed_candidate(Provenance::SemanticRepairOut, failing_id, island, call_index,
                                     "", "backend", error);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))],
           CallKind::SemanticRepair, "semantic_repair");
      return;
    }
    Enforced enforced = enforce_protocol(*block, nullptr, false);
    if (enforced.protocol_failed) {
      Candidate c = failed_candidate(Provenance::SemanticRepairOut, failing_id, island, call_index,
                                     *block, "protocol", enforced.error_msg);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))],
           CallKind::SemanticRepair, "semantic_repair");
      return;
    }
    Candidate c = make_candidate(Provenance::SemanticRepairOut, failing_id, island, call_index);
    c.raw_text = enforced.text;
    if (enforced.file) {
      c.file = *enforced.file;
      c.parsed = true;
    }
    gate_and_judge(c);  // the original compilable candidate stays archived
    emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))],
         CallKind::SemanticRepair, "semantic_repair");
  }

  // Evaluates a protocol-enforced proposal or repair output; returns the
  // committed candidate id when it compiled, -1 otherwise.
  int process_compiled(Enforced&& enforced, Provenance prov, int parent_id, int island,
                       int call_index, CallKind kind, const std::string& operator_mode,
                       bool allow_semantic_repair, int& repairs_used,
                       const CompileResult* precomputed = nullptr) {
    Candidate c = make_candidate(prov, parent_id, island, call_index);
    c.raw_text = enforced.text;
    if (enforced.file) {
      c.file = *enforced.file;
      c.parsed = true;
    }
    gate_and_judge(c, precomputed);
    bool compiled = c.compile_ok;
    bool semantic = c.semantic_ok;
    int id = commit(std::move(c));
    emit(log_.candidates[static_cast<std::size_t>(id)], kind, operator_mode);
    if (compiled && !semantic && allow_semantic_repair &&
        repairs_used < config_.repair_max_attempts && t() < config_.budget) {
      semantic_repair(id, island, repairs_used);
    }
    return compiled ? id : -1;
  }

  void compile_repair(const std::string& failing_text, const std::string& error_type,
                      const std::string& error_msg, int parent_id, int island,
                      int& repairs_used) {
    GeneratorRequest req;
    req.mode = GenMode::CompileRepair;
    req.problem_id = problem_.id;
    req.informal_text = problem_.informal;
    req.parent_text = failing_text;
    req.compile_error_type = error_type.empty() ? "unknown" : error_type;
    req.compile_error_msg = error_msg;
    req.temperature = config_.repair_temperature;
    req.rng_seed = rng_.fork_seed();
    int call_index = debit(CallKind::CompileRepair);
    ++repairs_used;
    std::string error;
    auto block = call_generator(std::move(req), &error);
    if (!block) {
      Candidate c = failed_candidate(Provenance::CompileRepairOut, parent_id, island, call_index,
                                     "", "backend", error);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))],
           CallKind::CompileRepair, "compile_repair");
      return;
    }
    Enforced enforced = enforce_protocol(*block, nullptr, false);
    if (enforced.protocol_failed) {
      Candidate c = failed_candidate(Provenance::CompileRepairOut, parent_id, island, call_index,
                                     *block, "protocol", enforced.error_msg);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))],
           CallKind::CompileRepair, "compile_repair");
      return;
    }
    process_compiled(std::move(enforced), Provenance::CompileRepairOut, parent_id, island,
                     call_index, CallKind::CompileRepair, "compile_repair",
                     /*allow_semantic_repair=*/true, repairs_used);
  }

  void iteration() {
    int island = sample_island(archive_, rng_);
    int parent_id = sample_parent(archive_, log_.candidates, island, config_, rng_);
    log_.candidates[static_cast<std::size_t>(parent_id)].usage_count += 1;
    InspirationContext ctx =
        sample_context(archive_, log_.candidates, island, parent_id, config_, rng_);
    GenMode op = pick_operator();
    // Copy: commits below may reallocate the candidate store.
    const Candidate parent = log_.candidates[static_cast<std::size_t>(parent_id)];
    const char* op_name = gen_mode_name(op);

    GeneratorRequest req;
    req.mode = op;
    req.problem_id = problem_.id;
    req.informal_text = problem_.informal;
    req.parent_text = parent.raw_text;
    req.performance_metrics = performance_summary(parent);
    if (!parent.judge_rationale.empty())
      req.text_feedback_section =
          "\nJudge feedback (Accuracy Confirmation):\n" + parent.judge_rationale;
    if (op == GenMode::Cross) {
      std::vector<int> pool = ctx.archive_ids;
      pool.insert(pool.end(), ctx.topk_ids.begin(), ctx.topk_ids.end());
      for (int k = 0; k < config_.cross_k; ++k) {
        if (pool.empty()) {
          req.inspirations.push_back(parent.raw_text);
        } else {
          req.inspirations.push_back(
              log_.candidates[pool[rng_.uniform_index(pool.size())]].raw_text);
        }
      }
    }
    req.temperature = config_.proposal_temperature;
    req.rng_seed = rng_.fork_seed();

    int call_index = debit(CallKind::Patch);
    int repairs_used = 0;
    std::string error;
    auto block = call_generator(std::move(req), &error);
    if (!block) {
      Provenance prov = op == GenMode::Full ? Provenance::Full
                        : op == GenMode::Diff ? Provenance::Diff
                                              : Provenance::Cross;
      Candidate c =
          failed_candidate(prov, parent_id, island, call_index, "", "backend", error);
      emit(log_.candidates[static_cast<std::size_t>(commit(std::move(c)))], CallKind::Patch, op_name);
      return;
    }

    Enforced enforced =
        enforce_protocol(*block, parent.parsed ? &parent.file : nullptr, op == GenMode::Diff);
    if (enforced.protocol_failed) {
      // Treated as a compile failure: fallback representative + bounded repair.
      evolast_fallback(parent, island, call_index, CallKind::Patch, op_name, *block, "protocol",
                       enforced.error_msg);
      if (repairs_used < config_.repair_max_attempts && t() < config_.budget)
        compile_repair(*block, "protocol", enforced.error_msg, parent_id, island, repairs_used);
      return;
    }

    if (enforced.file) {
      std::string key = canonicalize(*enforced.file).key;
      if (duplicate_in_island(key, island)) {
        evolast_fallback(parent, island, call_index, CallKind::Patch, op_name, enforced.text,
                         "duplicate", "exact duplicate under canonicalization");
        return;  // duplicates get the call-free fallback only, no repair chain
      }
    }

    CompileResult cr;
    try {
      cr = backends_.compiler->compile(enforced.text);
    } catch (const std::exception& e) {
      cr = {false, "backend", e.what()};
    }
    if (cr.ok) {
      Provenance prov = op == GenMode::Full ? Provenance::Full
                        : op == GenMode::Diff ? Provenance::Diff
                                              : Provenance::Cross;
      process_compiled(std::move(enforced), prov, parent_id, island, call_index, CallKind::Patch,
                       op_name, /*allow_semantic_repair=*/true, repairs_used, &cr);
      return;
    }
    evolast_fallback(parent, island, call_index, CallKind::Patch, op_name, enforced.text,
                     cr.error_type, cr.error_msg);
    if (repairs_used < config_.repair_max_attempts && t() < config_.budget)
      compile_repair(enforced.text, cr.error_type, cr.error_msg, parent_id, island, repairs_used);
  }

  const Problem& problem_;
  const SearchConfig& config_;
  const Backends& backends_;
  std::string run_id_;
  const EventSink& sink_;
  Rng rng_;
  Archive archive_;
  RunLog log_;
  int generation_ = 0;
  int next_seed_island_ = 0;
};

}  // namespace

RunLog run_problem(const Problem& problem, const SearchConfig& config, const Backends& backends,
                   const std::string& run_id, const EventSink& sink) {
  config.validate();
  ProblemRun run(problem, config, backends, run_id, sink);
  return run.run();
}

}  // namespace evostmt
