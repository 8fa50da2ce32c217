#pragma once

#include <string>
#include <vector>

#include "evostmt/rng.hpp"
#include "evostmt/statement.hpp"

namespace evostmt::testutil {

// Random quantifier-free boolean expression over at most 4 propositional
// atoms (P0..P3) and 3 integer atoms (a,b,c). Composite children carry
// explicit parens so the printed text re-parses to the same tree.
inline ExprPtr wrap_composite(ExprPtr e) {
  switch (e->kind) {
    case ExprKind::Connective:
    case ExprKind::Relation:
    case ExprKind::Arrow:
    case ExprKind::Quantifier:
      return Expr::paren(std::move(e));
    default:
      return e;
  }
}

inline ExprPtr random_int_term(Rng& rng) {
  static const char* ints[] = {"a", "b", "c"};
  if (rng.bernoulli(0.3)) return Expr::opaque(std::to_string(rng.uniform_index(3)));
  return Expr::atom(ints[rng.uniform_index(3)]);
}

inline ExprPtr random_expr(Rng& rng, int depth) {
  if (depth <= 0 || rng.bernoulli(0.25)) {
    if (rng.bernoulli(0.5)) {
      static const char* props[] = {"P0", "P1", "P2", "P3"};
      return Expr::atom(props[rng.uniform_index(4)]);
    }
    static const RelKind rels[] = {RelKind::Eq, RelKind::Ne, RelKind::Lt,
                                   RelKind::Le, RelKind::Gt, RelKind::Ge};
    return Expr::relation(rels[rng.uniform_index(6)], random_int_term(rng), random_int_term(rng));
  }
  switch (rng.uniform_index(5)) {
    case 0:
      return Expr::connective(ConnKind::And, {wrap_composite(random_expr(rng, depth - 1)),
                                              wrap_composite(random_expr(rng, depth - 1))});
    case 1:
      return Expr::connective(ConnKind::Or, {wrap_composite(random_expr(rng, depth - 1)),
                                             wrap_composite(random_expr(rng, depth - 1))});
    case 2:
      return Expr::connective(ConnKind::Iff, {wrap_composite(random_expr(rng, depth - 1)),
                                              wrap_composite(random_expr(rng, depth - 1))});
    case 3:
      return Expr::arrow(wrap_composite(random_expr(rng, depth - 1)),
                         wrap_composite(random_expr(rng, depth - 1)));
    default:
      return Expr::connective(ConnKind::Not, {wrap_composite(random_expr(rng, depth - 1))});
  }
}

// Statement file with 0-3 binder groups and a random goal; hypothesis names
// h0,h1,... are deliberately unused so reorder sites exist.
inline StatementFile random_file(Rng& rng, int max_depth = 4) {
  StatementFile f;
  if (rng.bernoulli(0.8)) f.preamble.push_back("import Mathlib");
  if (rng.bernoulli(0.3)) f.preamble.push_back("open Classical");
  f.decl_name = "t" + std::to_string(rng.uniform_index(1000));
  int groups = static_cast<int>(rng.uniform_index(4));
  for (int i = 0; i < groups; ++i) {
    Binder b;
    b.kind = rng.bernoulli(0.7) ? BinderKind::Explicit : BinderKind::Implicit;
    b.names = {"h" + std::to_string(i)};
    b.type = rng.bernoulli(0.5) ? random_expr(rng, 2) : Expr::atom("Prop");
    f.binders.push_back(std::move(b));
  }
  f.goal = random_expr(rng, max_depth);
  f.proof_body = "by sorry";
  return f;
}

inline std::string reference_statement(const std::string& prop_a, const std::string& prop_b) {
  return "import Mathlib\ntheorem ref (h1 : " + prop_a + ") : " + prop_a + " /\\ " + prop_b +
         " := by sorry\n";
}

}  // namespace evostmt::testutil

#include <algorithm>

#include "evostmt/rewrite.hpp"

namespace evostmt::testutil {

struct SoundnessStats {
  long cases = 0;
  long equivalence_failures = 0;
  long locality_failures = 0;
  long binder_set_failures = 0;
};

// Applies every enumerated site of freshly generated files until n_cases
// applications have been checked against the truth-table oracle, plus the
// locality and bound-name invariants.
inline SoundnessStats run_rewrite_soundness(long n_cases, std::uint64_t seed) {
  Rng rng(seed);
  SoundnessStats stats;
  while (stats.cases < n_cases) {
    StatementFile f = testutil::random_file(rng, 5);
    auto sites = enumerate_sites(f);
    for (const auto& site : sites) {
      if (stats.cases >= n_cases) break;
      StatementFile g = apply_rewrite(f, site);
      ++stats.cases;

      bool equivalent = true;
      if (site.rule == RuleId::HypReorder) {
        equivalent = expr_equal(f.goal, g.goal);
      } else if (site.in_goal) {
        equivalent = equiv_oracle(f.goal, g.goal);
      } else {
        equivalent = equiv_oracle(f.binders[static_cast<std::size_t>(site.binder_index)].type,
                                  g.binders[static_cast<std::size_t>(site.binder_index)].type);
      }
      if (!equivalent) ++stats.equivalence_failures;

      bool local = f.preamble == g.preamble && f.proof_body == g.proof_body &&
                   f.decl_name == g.decl_name;
      if (site.rule == RuleId::HypReorder) {
        local = local && expr_equal(f.goal, g.goal);
      } else if (site.in_goal) {
        for (std::size_t b = 0; b < f.binders.size(); ++b)
          local = local && binder_equal(f.binders[b], g.binders[b]);
      } else {
        local = local && expr_equal(f.goal, g.goal);
        for (std::size_t b = 0; b < f.binders.size(); ++b)
          if (b != static_cast<std::size_t>(site.binder_index))
            local = local && binder_equal(f.binders[b], g.binders[b]);
      }
      if (!local) ++stats.locality_failures;

      auto before = bound_names(f);
      auto after = bound_names(g);
      std::sort(before.begin(), before.end());
      std::sort(after.begin(), after.end());
      if (before != after) ++stats.binder_set_failures;
    }
  }
  return stats;
}

}  // namespace evostmt::testutil
