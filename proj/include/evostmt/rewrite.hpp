#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evostmt/rng.hpp"
#include "evostmt/statement.hpp"

namespace evostmt {

// Conservative, semantics-intended AST rewrites over binder types and the
// goal; the preamble and proof body are never touched.
enum class RuleId {
  AndComm, OrComm, AndAssoc, OrAssoc, AndOrDistrib, OrAndDistrib,
  IffSymm, EqSymm, RelDualLtGt, RelDualLeGe, HypReorder,
};

const char* rule_name(RuleId r);

struct RewriteSite {
  bool in_goal = true;      // false: inside binders[binder_index].type
  int binder_index = -1;    // also the left group index for HypReorder
  std::vector<int> path;    // child indices from the located root expression
  RuleId rule = RuleId::AndComm;
  int variant = 0;          // disambiguates multiple matches of one rule at a node
};

// Complete pre-order enumeration of applicable (rule, path) pairs.
std::vector<RewriteSite> enumerate_sites(const StatementFile& f);

// Applies exactly one rewrite; everything outside the addressed node prints
// byte-identically. Throws SiteInvalid when the site no longer matches.
StatementFile apply_rewrite(const StatementFile& f, const RewriteSite& site);

// Up to max_steps uniformly sampled rewrites, re-enumerated after each step.
// nullopt when the file admits no rewrite site at all.
std::optional<StatementFile> evolast_variant(const StatementFile& f, std::uint64_t seed,
                                             int max_steps);

struct IntDomain {
  int lo = -2;
  int hi = 2;
};

// Brute-force semantic equivalence over every assignment: booleans to
// propositional atoms, integers from the domain to relation operands.
// Distinct compound operands count as independent atoms. Throws
// OracleTooLarge past the assignment cap.
bool equiv_oracle(const ExprPtr& e1, const ExprPtr& e2, IntDomain domain = {},
                  std::size_t max_assignments = 1u << 20);

}  // namespace evostmt
