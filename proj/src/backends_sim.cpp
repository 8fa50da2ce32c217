#include <algorithm>
#include <cctype>

#include "evostmt/backends.hpp"
#include "evostmt/errors.hpp"
#include "evostmt/rewrite.hpp"

namespace evostmt {

namespace {

std::string collapse_ws(const std::string& s) {
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

// First whole-word occurrence of `word` in `text`, or npos.
std::size_t find_word(const std::string& text, const std::string& word, std::size_t from = 0) {
  auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
  };
  std::size_t pos = from;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_ident(text[pos - 1]);
    std::size_t end = pos + word.size();
    bool right_ok = end >= text.size() || !is_ident(text[end]);
    if (left_ok && right_ok) return pos;
    pos = end;
  }
  return std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulated compiler

CompileResult sim_compile(const std::string& file_text, const std::set<std::string>& symbols,
                          bool require_placeholder_proof) {
  StatementFile f;
  try {
    f = parse_file(file_text);
  } catch (const MultipleDeclarations&) {
    return {false, "protocol", "more than one theorem/lemma declaration"};
  } catch (const NoDeclaration&) {
    return {false, "parse", "no theorem/lemma declaration"};
  } catch (const ParseError& e) {
    return {false, "parse", e.what()};
  }
  if (require_placeholder_proof && collapse_ws(f.proof_body) != "by sorry")
    return {false, "protocol", "proof body must be the placeholder 'by sorry'"};
  for (const auto& id : free_identifiers(f)) {
    if (!symbols.count(id))
      return {false, "unknown_identifier", "unknown identifier '" + id + "'"};
  }
  return {true, "", ""};
}

// ---------------------------------------------------------------------------
// Simulated judge

namespace {

bool types_compatible(const ExprPtr& a, const ExprPtr& b) {
  if (!a && !b) return true;
  if (!a || !b) return false;
  if (expr_equal(a, b)) return true;
  try {
    return equiv_oracle(a, b);
  } catch (const OracleTooLarge&) {
    return false;
  }
}

// Greedy order-insensitive matching of binder groups by (kind, arity, type).
bool binder_multiset_match(const StatementFile& cand, const StatementFile& ref) {
  if (cand.binders.size() != ref.binders.size()) return false;
  std::vector<bool> used(ref.binders.size(), false);
  for (const auto& b : cand.binders) {
    bool matched = false;
    for (std::size_t j = 0; j < ref.binders.size(); ++j) {
      if (used[j]) continue;
      const auto& rb = ref.binders[j];
      if (rb.kind != b.kind || rb.names.size() != b.names.size()) continue;
      if (!types_compatible(b.type, rb.type)) continue;
      used[j] = true;
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace

JudgeResult sim_judge_file(const std::vector<StatementFile>& references,
                           const std::string& file_text) {
  if (references.empty())
    return {false, "no reference statement matches (none registered)"};
  StatementFile f;
  try {
    f = parse_file(file_text);
  } catch (const std::exception& e) {
    return {false, std::string("statement does not parse: ") + e.what()};
  }
  CanonicalKey key = canonicalize(f);
  for (const auto& ref : references) {
    if (canonicalize(ref) == key) return {true, "exact match under canonicalization"};
  }
  for (const auto& ref : references) {
    if (!binder_multiset_match(f, ref)) continue;
    bool goal_ok = expr_equal(f.goal, ref.goal);
    if (!goal_ok) {
      try {
        goal_ok = equiv_oracle(f.goal, ref.goal);
      } catch (const OracleTooLarge&) {
        goal_ok = false;
      }
    }
    if (goal_ok) return {true, "goal equivalent to a reference with matching hypotheses"};
  }
  const auto& r0 = references.front();
  if (f.binders.size() != r0.binders.size()) {
    return {false, "binder count differs: statement has " + std::to_string(f.binders.size()) +
                       " group(s), reference has " + std::to_string(r0.binders.size())};
  }
  if (!binder_multiset_match(f, r0))
    return {false, "binder types differ from the reference hypotheses"};
  return {false, "goal differs from every reference statement"};
}

JudgeResult SimJudge::judge(const std::string& problem_id, const std::string& informal,
                            const std::string& file_text) {
  (void)informal;
  auto it = registry_.find(problem_id);
  if (it == registry_.end()) throw UnknownProblem(problem_id);
  return sim_judge_file(it->second, file_text);
}

// ---------------------------------------------------------------------------
// Simulated generator

double SimProfile::compile_prob_for(GenMode m) const {
  auto it = compile_prob_by_mode.find(m);
  return it == compile_prob_by_mode.end() ? compile_prob : it->second;
}

double SimProfile::semantic_prob_for(GenMode m) const {
  auto it = semantic_prob_by_mode.find(m);
  return it == semantic_prob_by_mode.end() ? semantic_prob : it->second;
}

namespace {

std::string fenced(const std::string& body) {
  std::string text = body;
  if (text.empty() || text.back() != '\n') text += '\n';
  return "Here is the Lean 4 file.\n\n```lean\n" + text + "```\n";
}

std::string synthetic_statement(const std::set<std::string>& symbols, std::uint64_t n) {
  // Neutral compilable filler used when a profile has no pool at all.
  std::string sym = symbols.count("True") ? "True" : *symbols.begin();
  return "import Mathlib\ntheorem filler_" + std::to_string(n) + " : " + sym + " -> " + sym +
         " := by sorry\n";
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.uniform_index(pool.size())];
}

std::string maybe_rewrite(const std::string& text, double rate, Rng& rng) {
  if (!rng.bernoulli(rate)) return text;
  std::uint64_t seed = rng.fork_seed();
  int steps = 1 + static_cast<int>(rng.uniform_index(2));
  try {
    StatementFile f = parse_file(text);
    auto v = evolast_variant(f, seed, steps);
    if (v) return print_file(*v);
  } catch (const std::exception&) {
  }
  return text;
}

std::string inject_defect(const std::string& text, Rng& rng) {
  switch (rng.uniform_index(3)) {
    case 0: {
      // Unknown identifier, reversible by stripping the marker suffix.
      try {
        StatementFile f = parse_file(text);
        auto frees = free_identifiers(f);
        if (!frees.empty()) {
          const std::string& victim = frees[rng.uniform_index(frees.size())];
          std::size_t pos = find_word(text, victim);
          if (pos != std::string::npos) {
            std::string out = text;
            out.replace(pos, victim.size(), victim + "_undef");
            return out;
          }
        }
      } catch (const std::exception&) {
      }
      [[fallthrough]];
    }
    case 1: {
      // Break the ':=' so the file no longer parses.
      std::size_t pos = text.find(":=");
      if (pos != std::string::npos) {
        std::string out = text;
        out.replace(pos, 2, "=");
        return out;
      }
      return text + "(";
    }
    default:
      return text + "\ntheorem extra_decl : True := by sorry\n";
  }
}

std::string strip_undef_markers(const std::string& text) {
  std::string out = text;
  std::size_t pos = 0;
  while ((pos = out.find("_undef", pos)) != std::string::npos) out.erase(pos, 6);
  return out;
}

}  // namespace

std::string sim_generate(const GeneratorRequest& req, const SimProfile& profile,
                         const std::set<std::string>& symbols) {
  Rng rng(req.rng_seed);
  std::vector<std::string> compilable_pool = profile.reference_texts;
  compilable_pool.insert(compilable_pool.end(), profile.distractor_texts.begin(),
                         profile.distractor_texts.end());
  if (compilable_pool.empty()) compilable_pool.push_back(synthetic_statement(symbols, 0));

  switch (req.mode) {
    case GenMode::CompileRepair: {
      if (rng.bernoulli(profile.fix_compile_prob)) {
        if (req.compile_error_type == "unknown_identifier") {
          std::string fixed = strip_undef_markers(req.parent_text);
          if (fixed != req.parent_text) return fenced(fixed);
        }
        return fenced(maybe_rewrite(pick(compilable_pool, rng), profile.mutation_rate, rng));
      }
      return fenced(req.parent_text);  // repair failed, still broken
    }
    case GenMode::SemanticRepair: {
      if (!profile.reference_texts.empty() && rng.bernoulli(profile.fix_semantic_prob))
        return fenced(maybe_rewrite(pick(profile.reference_texts, rng), profile.mutation_rate, rng));
      if (!profile.distractor_texts.empty())
        return fenced(maybe_rewrite(pick(profile.distractor_texts, rng), profile.mutation_rate, rng));
      return fenced(pick(compilable_pool, rng));
    }
    default: {
      if (!rng.bernoulli(profile.compile_prob_for(req.mode)))
        return fenced(inject_defect(pick(compilable_pool, rng), rng));
      if (!profile.reference_texts.empty() && rng.bernoulli(profile.semantic_prob_for(req.mode)))
        return fenced(maybe_rewrite(pick(profile.reference_texts, rng), profile.mutation_rate, rng));
      if (!profile.distractor_texts.empty())
        return fenced(maybe_rewrite(pick(profile.distractor_texts, rng), profile.mutation_rate, rng));
      return fenced(maybe_rewrite(pick(compilable_pool, rng), profile.mutation_rate, rng));
    }
  }
}

// ---------------------------------------------------------------------------
// Simulated prover

std::string SimProver::prove(const std::string& problem_id, const std::string& file_text,
                             int statement_index, int sample_index) {
  std::uint64_t h = fnv1a64(problem_id, seed_);
  h = fnv1a64(file_text, h);
  h ^= (static_cast<std::uint64_t>(statement_index) << 32) ^
       static_cast<std::uint64_t>(sample_index);
  Rng rng(h);
  StatementFile f;
  try {
    f = parse_file(file_text);
  } catch (const std::exception&) {
    return "The statement could not be interpreted.";
  }
  double roll = rng.uniform_real();
  if (roll < complete_prob_) {
    f.proof_body = "by trivial";
    return "### Proof\n\n```lean4\n" + print_file(f) + "```\n";
  }
  if (roll < complete_prob_ + pass_only_prob_) {
    f.proof_body = "by\n  have step : True := by sorry\n  sorry";
    return "### Partial proof\n\n```lean4\n" + print_file(f) + "```\n";
  }
  return "No proof found within the attempt.";
}

// ---------------------------------------------------------------------------
// Pool construction helpers

std::set<std::string> harvest_symbols(const std::vector<std::string>& statement_texts) {
  std::set<std::string> symbols = {
      "True",  "False", "Nat",  "Int",   "Real",  "Rat",      "Prop", "Type",
      "Group", "Ring",  "Fact", "Field", "Finset", "Function", "Set",
  };
  for (const auto& text : statement_texts) {
    try {
      StatementFile f = parse_file(text);
      for (const auto& id : free_identifiers(f)) symbols.insert(id);
    } catch (const std::exception&) {
    }
  }
  return symbols;
}

std::vector<std::string> make_distractors(const std::vector<std::string>& reference_texts,
                                          const std::set<std::string>& symbols) {
  std::vector<StatementFile> refs;
  for (const auto& text : reference_texts) {
    try {
      refs.push_back(parse_file(text));
    } catch (const std::exception&) {
    }
  }
  std::vector<std::string> out;
  auto keep_if_rejected = [&](StatementFile cand) {
    std::string text = print_file(cand);
    CompileResult c = sim_compile(text, symbols);
    if (!c.ok) return;
    if (sim_judge_file(refs, text).ok) return;
    out.push_back(std::move(text));
  };

  struct Flipper {
    static ExprPtr flip_first(const ExprPtr& e, bool& done) {
      if (!e || done) return e;
      auto copy = std::make_shared<Expr>(*e);
      if (e->kind == ExprKind::Connective &&
          (e->conn == ConnKind::And || e->conn == ConnKind::Or) &&
          !expr_equal(e->children[0], e->children[1])) {
        copy->conn = e->conn == ConnKind::And ? ConnKind::Or : ConnKind::And;
        done = true;
        return copy;
      }
      if (e->kind == ExprKind::Relation && (e->rel == RelKind::Lt || e->rel == RelKind::Le)) {
        copy->rel = e->rel == RelKind::Lt ? RelKind::Le : RelKind::Lt;
        done = true;
        return copy;
      }
      for (auto& c : copy->children) {
        c = flip_first(c, done);
        if (done) break;
      }
      return copy;
    }
  };

  for (const auto& ref : refs) {
    // Drop a hypothesis whose names are unused elsewhere.
    for (std::size_t i = 0; i < ref.binders.size(); ++i) {
      bool used = false;
      for (const auto& n : ref.binders[i].names) {
        if (expr_mentions_name(ref.goal, n)) used = true;
        for (std::size_t j = 0; j < ref.binders.size(); ++j)
          if (j != i && ref.binders[j].type && expr_mentions_name(ref.binders[j].type, n))
            used = true;
      }
      if (used) continue;
      StatementFile cand = ref;
      cand.binders.erase(cand.binders.begin() + static_cast<std::ptrdiff_t>(i));
      keep_if_rejected(std::move(cand));
    }
    // Flip one connective or relation in the goal.
    bool done = false;
    ExprPtr flipped = Flipper::flip_first(ref.goal, done);
    if (done) {
      StatementFile cand = ref;
      cand.goal = flipped;
      keep_if_rejected(std::move(cand));
    }
  }
  if (out.empty() && !refs.empty()) {
    StatementFile cand = refs.front();
    cand.binders.clear();
    cand.goal = Expr::arrow(Expr::atom("False"), Expr::atom("True"));
    keep_if_rejected(std::move(cand));
  }
  if (out.empty()) {
    std::string sym = symbols.count("True") ? "True" : *symbols.begin();
    out.push_back("import Mathlib\ntheorem offtopic : " + sym + " \\/ " + sym +
                  " := by sorry\n");
  }
  return out;
}

}  // namespace evostmt
