#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evostmt {

// Expression tree for the Lean-subset statement grammar. Identifiers,
// application, the logical connectives/relations/quantifiers, arrows and
// parentheses are structural; any other token run survives as an opaque leaf.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Atom, Application, Quantifier, Arrow, Connective, Relation, Paren, Opaque };
enum class ConnKind { And, Or, Iff, Not };
enum class RelKind { Eq, Ne, Lt, Le, Gt, Ge };
enum class QuantKind { Forall, Exists };
enum class BinderKind { Explicit, Implicit, Instance };

struct Binder {
  BinderKind kind = BinderKind::Explicit;
  std::vector<std::string> names;  // may be empty only for anonymous instance binders
  ExprPtr type;                    // null for untyped quantifier binders
};

struct Expr {
  ExprKind kind;
  std::string text;              // Atom / Opaque payload
  std::vector<ExprPtr> children; // Application: head + args; Arrow/Relation: lhs,rhs;
                                 // Connective: operands; Paren: child; Quantifier: body
  ConnKind conn = ConnKind::And;
  RelKind rel = RelKind::Eq;
  QuantKind quant = QuantKind::Forall;
  Binder qbinder;                // Quantifier only

  static ExprPtr atom(std::string name);
  static ExprPtr opaque(std::string raw);
  static ExprPtr application(std::vector<ExprPtr> items);
  static ExprPtr connective(ConnKind k, std::vector<ExprPtr> ops);
  static ExprPtr relation(RelKind k, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr arrow(ExprPtr lhs, ExprPtr rhs);
  static ExprPtr paren(ExprPtr child);
  static ExprPtr quantifier(QuantKind q, Binder b, ExprPtr body);
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool binder_equal(const Binder& a, const Binder& b);

// Single space between tokens, parens exactly at Paren nodes, ASCII operators.
std::string print_expr(const ExprPtr& e);
std::string print_binder(const Binder& b);

struct StatementFile {
  std::vector<std::string> preamble;  // raw header lines, verbatim
  std::string decl_keyword = "theorem";
  std::string decl_name;
  std::vector<Binder> binders;
  ExprPtr goal;
  std::string proof_body;  // raw text after ":=", trimmed
};

bool file_equal(const StatementFile& a, const StatementFile& b);

StatementFile parse_file(const std::string& text);
std::string print_file(const StatementFile& f);

struct CanonicalKey {
  std::string key;  // canonicalized text; equal keys define exact duplicates
  bool operator==(const CanonicalKey& o) const { return key == o.key; }
  std::string digest() const;  // 16-hex FNV-1a, used in event logs
};

// Invariant under whitespace runs, the declaration name, and systematic
// alpha-renaming of binder-introduced names to v0, v1, ... in binding order.
CanonicalKey canonicalize(const StatementFile& f);

struct ProofClassification {
  int sorry_count = 0;
  bool complete = false;          // sorry_count == 0
  bool theorem_complete = false;  // complete and an explicit theorem/lemma present
  bool has_theorem = false;
};

// Textual properties only; the pass verdict comes from the external verifier.
ProofClassification classify_proof_output(const std::string& text);

// Any Atom with this exact name anywhere in the tree (shadowing ignored).
bool expr_mentions_name(const ExprPtr& e, const std::string& name);

// Identifier atoms not introduced by binders or quantifiers, first-seen order.
std::vector<std::string> free_identifiers(const StatementFile& f);

// All binder-introduced names, declaration binders first, then goal quantifiers.
std::vector<std::string> bound_names(const StatementFile& f);

}  // namespace evostmt
