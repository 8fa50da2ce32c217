#include "evostmt/rewrite.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "evostmt/errors.hpp"

namespace evostmt {

const char* rule_name(RuleId r) {
  switch (r) {
    case RuleId::AndComm: return "and_comm";
    case RuleId::OrComm: return "or_comm";
    case RuleId::AndAssoc: return "and_assoc";
    case RuleId::OrAssoc: return "or_assoc";
    case RuleId::AndOrDistrib: return "and_or_distrib";
    case RuleId::OrAndDistrib: return "or_and_distrib";
    case RuleId::IffSymm: return "iff_symm";
    case RuleId::EqSymm: return "eq_symm";
    case RuleId::RelDualLtGt: return "rel_dual_lt_gt";
    case RuleId::RelDualLeGe: return "rel_dual_le_ge";
    case RuleId::HypReorder: return "hyp_reorder";
  }
  return "?";
}

namespace {

ExprPtr strip_parens(ExprPtr e) {
  while (e && e->kind == ExprKind::Paren) e = e->children[0];
  return e;
}

// Freshly built composite operands get explicit parens so the printed text
// re-parses to the constructed structure.
ExprPtr wrap(ExprPtr e) {
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

bool is_conn(const ExprPtr& e, ConnKind k) {
  return e && e->kind == ExprKind::Connective && e->conn == k && e->children.size() == 2;
}

// Child navigation; quantifier nodes expose the body as step 0 and the binder
// type as step 1.
ExprPtr nav_child(const ExprPtr& e, int step) {
  if (e->kind == ExprKind::Quantifier && step == 1) return e->qbinder.type;
  if (step >= 0 && static_cast<std::size_t>(step) < e->children.size())
    return e->children[static_cast<std::size_t>(step)];
  return nullptr;
}

int nav_arity(const ExprPtr& e) {
  if (e->kind == ExprKind::Quantifier) return e->qbinder.type ? 2 : 1;
  return static_cast<int>(e->children.size());
}

ExprPtr replace_child(const ExprPtr& e, int step, ExprPtr child) {
  auto copy = std::make_shared<Expr>(*e);
  if (e->kind == ExprKind::Quantifier && step == 1) {
    copy->qbinder.type = std::move(child);
  } else {
    copy->children[static_cast<std::size_t>(step)] = std::move(child);
  }
  return copy;
}

bool rule_matches(RuleId rule, int variant, const ExprPtr& n) {
  switch (rule) {
    case RuleId::AndComm:
      return variant == 0 && is_conn(n, ConnKind::And);
    case RuleId::OrComm:
      return variant == 0 && is_conn(n, ConnKind::Or);
    case RuleId::AndAssoc:
      if (!is_conn(n, ConnKind::And)) return false;
      return variant == 0 ? is_conn(strip_parens(n->children[1]), ConnKind::And)
                          : is_conn(strip_parens(n->children[0]), ConnKind::And);
    case RuleId::OrAssoc:
      if (!is_conn(n, ConnKind::Or)) return false;
      return variant == 0 ? is_conn(strip_parens(n->children[1]), ConnKind::Or)
                          : is_conn(strip_parens(n->children[0]), ConnKind::Or);
    case RuleId::AndOrDistrib:
      if (!is_conn(n, ConnKind::And)) return false;
      return variant == 0 ? is_conn(strip_parens(n->children[1]), ConnKind::Or)
                          : is_conn(strip_parens(n->children[0]), ConnKind::Or);
    case RuleId::OrAndDistrib:
      if (!is_conn(n, ConnKind::Or)) return false;
      return variant == 0 ? is_conn(strip_parens(n->children[1]), ConnKind::And)
                          : is_conn(strip_parens(n->children[0]), ConnKind::And);
    case RuleId::IffSymm:
      return variant == 0 && is_conn(n, ConnKind::Iff);
    case RuleId::EqSymm:
      return variant == 0 && n->kind == ExprKind::Relation &&
             (n->rel == RelKind::Eq || n->rel == RelKind::Ne);
    case RuleId::RelDualLtGt:
      return variant == 0 && n->kind == ExprKind::Relation &&
             (n->rel == RelKind::Lt || n->rel == RelKind::Gt);
    case RuleId::RelDualLeGe:
      return variant == 0 && n->kind == ExprKind::Relation &&
             (n->rel == RelKind::Le || n->rel == RelKind::Ge);
    case RuleId::HypReorder:
      return false;  // binder-level, handled separately
  }
  return false;
}

ExprPtr rule_produce(RuleId rule, int variant, const ExprPtr& n) {
  switch (rule) {
    case RuleId::AndComm:
      return Expr::connective(ConnKind::And, {n->children[1], n->children[0]});
    case RuleId::OrComm:
      return Expr::connective(ConnKind::Or, {n->children[1], n->children[0]});
    case RuleId::AndAssoc:
    case RuleId::OrAssoc: {
      ConnKind k = rule == RuleId::AndAssoc ? ConnKind::And : ConnKind::Or;
      if (variant == 0) {
        ExprPtr a = n->children[0];
        ExprPtr inner = strip_parens(n->children[1]);
        return Expr::connective(
            k, {wrap(Expr::connective(k, {a, inner->children[0]})), inner->children[1]});
      }
      ExprPtr inner = strip_parens(n->children[0]);
      ExprPtr c = n->children[1];
      return Expr::connective(
          k, {inner->children[0], wrap(Expr::connective(k, {inner->children[1], c}))});
    }
    case RuleId::AndOrDistrib:
    case RuleId::OrAndDistrib: {
      ConnKind outer = rule == RuleId::AndOrDistrib ? ConnKind::And : ConnKind::Or;
      ConnKind result = rule == RuleId::AndOrDistrib ? ConnKind::Or : ConnKind::And;
      if (variant == 0) {
        ExprPtr a = n->children[0];
        ExprPtr inner = strip_parens(n->children[1]);
        return Expr::connective(result,
                                {wrap(Expr::connective(outer, {a, inner->children[0]})),
                                 wrap(Expr::connective(outer, {a, inner->children[1]}))});
      }
      ExprPtr inner = strip_parens(n->children[0]);
      ExprPtr c = n->children[1];
      return Expr::connective(result,
                              {wrap(Expr::connective(outer, {inner->children[0], c})),
                               wrap(Expr::connective(outer, {inner->children[1], c}))});
    }
    case RuleId::IffSymm:
      return Expr::connective(ConnKind::Iff, {n->children[1], n->children[0]});
    case RuleId::EqSymm:
      return Expr::relation(n->rel, n->children[1], n->children[0]);
    case RuleId::RelDualLtGt:
      return Expr::relation(n->rel == RelKind::Lt ? RelKind::Gt : RelKind::Lt,
                            n->children[1], n->children[0]);
    case RuleId::RelDualLeGe:
      return Expr::relation(n->rel == RelKind::Le ? RelKind::Ge : RelKind::Le,
                            n->children[1], n->children[0]);
    case RuleId::HypReorder:
      break;
  }
  return n;
}

const RuleId kExprRules[] = {
    RuleId::AndComm, RuleId::OrComm, RuleId::AndAssoc, RuleId::OrAssoc,
    RuleId::AndOrDistrib, RuleId::OrAndDistrib, RuleId::IffSymm,
    RuleId::EqSymm, RuleId::RelDualLtGt, RuleId::RelDualLeGe,
};

void enumerate_expr(const ExprPtr& e, bool in_goal, int binder_index,
                    std::vector<int>& path, std::vector<RewriteSite>& out) {
  if (!e) return;
  for (RuleId rule : kExprRules) {
    for (int variant = 0; variant < 2; ++variant) {
      if (rule_matches(rule, variant, e)) {
        out.push_back({in_goal, binder_index, path, rule, variant});
      }
    }
  }
  int arity = nav_arity(e);
  for (int i = 0; i < arity; ++i) {
    path.push_back(i);
    enumerate_expr(nav_child(e, i), in_goal, binder_index, path, out);
    path.pop_back();
  }
}

bool groups_independent(const Binder& a, const Binder& b) {
  for (const auto& n : a.names)
    if (b.type && expr_mentions_name(b.type, n)) return false;
  for (const auto& n : b.names)
    if (a.type && expr_mentions_name(a.type, n)) return false;
  return true;
}

ExprPtr rewrite_at(const ExprPtr& root, const std::vector<int>& path, std::size_t depth,
                   RuleId rule, int variant) {
  if (depth == path.size()) {
    if (!rule_matches(rule, variant, root))
      throw SiteInvalid(std::string(rule_name(rule)) + " no longer applies");
    return rule_produce(rule, variant, root);
  }
  int step = path[depth];
  ExprPtr child = root ? nav_child(root, step) : nullptr;
  if (!child) throw SiteInvalid("path leads outside the expression");
  return replace_child(root, step, rewrite_at(child, path, depth + 1, rule, variant));
}

}  // namespace

std::vector<RewriteSite> enumerate_sites(const StatementFile& f) {
  std::vector<RewriteSite> out;
  std::vector<int> path;
  for (int i = 0; i < static_cast<int>(f.binders.size()); ++i) {
    if (i + 1 < static_cast<int>(f.binders.size()) &&
        groups_independent(f.binders[static_cast<std::size_t>(i)],
                           f.binders[static_cast<std::size_t>(i) + 1])) {
      out.push_back({false, i, {}, RuleId::HypReorder, 0});
    }
    enumerate_expr(f.binders[static_cast<std::size_t>(i)].type, false, i, path, out);
  }
  enumerate_expr(f.goal, true, -1, path, out);
  return out;
}

StatementFile apply_rewrite(const StatementFile& f, const RewriteSite& site) {
  StatementFile out = f;
  if (site.rule == RuleId::HypReorder) {
    std::size_t i = static_cast<std::size_t>(site.binder_index);
    if (site.binder_index < 0 || i + 1 >= f.binders.size())
      throw SiteInvalid("hyp_reorder index out of range");
    if (!groups_independent(f.binders[i], f.binders[i + 1]))
      throw SiteInvalid("binder groups are dependent");
    std::swap(out.binders[i], out.binders[i + 1]);
    return out;
  }
  if (site.in_goal) {
    out.goal = rewrite_at(f.goal, site.path, 0, site.rule, site.variant);
  } else {
    std::size_t i = static_cast<std::size_t>(site.binder_index);
    if (site.binder_index < 0 || i >= f.binders.size())
      throw SiteInvalid("binder index out of range");
    out.binders[i].type = rewrite_at(f.binders[i].type, site.path, 0, site.rule, site.variant);
  }
  return out;
}

std::optional<StatementFile> evolast_variant(const StatementFile& f, std::uint64_t seed,
                                             int max_steps) {
  Rng rng(seed);
  std::vector<RewriteSite> sites = enumerate_sites(f);
  if (sites.empty()) return std::nullopt;
  StatementFile cur = f;
  for (int step = 0; step < max_steps; ++step) {
    if (step > 0) sites = enumerate_sites(cur);
    if (sites.empty()) break;
    const RewriteSite& site = sites[rng.uniform_index(sites.size())];
    cur = apply_rewrite(cur, site);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Truth-table equivalence oracle

namespace {

struct AtomTable {
  std::map<std::string, int> prop;
  std::map<std::string, int> ints;
  bool mixed = false;

  int prop_id(const std::string& key) {
    if (ints.count(key)) mixed = true;
    auto [it, _] = prop.emplace(key, static_cast<int>(prop.size()));
    return it->second;
  }
  int int_id(const std::string& key) {
    if (prop.count(key)) mixed = true;
    auto [it, _] = ints.emplace(key, static_cast<int>(ints.size()));
    return it->second;
  }
};

// Integer literal: an opaque digit run, or the application (- digits).
bool int_literal(const ExprPtr& e, long& value) {
  auto digits = [](const std::string& s, long& v) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = std::strtol(s.c_str(), nullptr, 10);
    return true;
  };
  if (e->kind == ExprKind::Opaque) return digits(e->text, value);
  if (e->kind == ExprKind::Application && e->children.size() == 2 &&
      e->children[0]->kind == ExprKind::Opaque && e->children[0]->text == "-" &&
      e->children[1]->kind == ExprKind::Opaque) {
    if (!digits(e->children[1]->text, value)) return false;
    value = -value;
    return true;
  }
  return false;
}

void classify_atoms(const ExprPtr& raw, AtomTable& table) {
  ExprPtr e = strip_parens(raw);
  switch (e->kind) {
    case ExprKind::Connective:
      for (const auto& c : e->children) classify_atoms(c, table);
      return;
    case ExprKind::Arrow:
      classify_atoms(e->children[0], table);
      classify_atoms(e->children[1], table);
      return;
    case ExprKind::Relation:
      for (const auto& c : e->children) {
        long v;
        ExprPtr op = strip_parens(c);
        if (!int_literal(op, v)) table.int_id(print_expr(op));
      }
      return;
    default:
      table.prop_id(print_expr(e));
      return;
  }
}

struct Assignment {
  const AtomTable* table;
  std::uint64_t prop_mask = 0;
  std::vector<long> int_values;
};

long eval_int(const ExprPtr& raw, const Assignment& a) {
  ExprPtr e = strip_parens(raw);
  long v;
  if (int_literal(e, v)) return v;
  auto it = a.table->ints.find(print_expr(e));
  return a.int_values[static_cast<std::size_t>(it->second)];
}

bool eval_bool(const ExprPtr& raw, const Assignment& a) {
  ExprPtr e = strip_parens(raw);
  switch (e->kind) {
    case ExprKind::Connective:
      switch (e->conn) {
        case ConnKind::And: return eval_bool(e->children[0], a) && eval_bool(e->children[1], a);
        case ConnKind::Or: return eval_bool(e->children[0], a) || eval_bool(e->children[1], a);
        case ConnKind::Iff: return eval_bool(e->children[0], a) == eval_bool(e->children[1], a);
        case ConnKind::Not: return !eval_bool(e->children[0], a);
      }
      return false;
    case ExprKind::Arrow:
      return !eval_bool(e->children[0], a) || eval_bool(e->children[1], a);
    case ExprKind::Relation: {
      long l = eval_int(e->children[0], a);
      long r = eval_int(e->children[1], a);
      switch (e->rel) {
        case RelKind::Eq: return l == r;
        case RelKind::Ne: return l != r;
        case RelKind::Lt: return l < r;
        case RelKind::Le: return l <= r;
        case RelKind::Gt: return l > r;
        case RelKind::Ge: return l >= r;
      }
      return false;
    }
    default: {
      auto it = a.table->prop.find(print_expr(e));
      return (a.prop_mask >> it->second) & 1;
    }
  }
}

}  // namespace

bool equiv_oracle(const ExprPtr& raw1, const ExprPtr& raw2, IntDomain domain,
                  std::size_t max_assignments) {
  ExprPtr e1 = strip_parens(raw1);
  ExprPtr e2 = strip_parens(raw2);
  // Identical quantifier prefixes are descended; the rule set never changes
  // quantifier structure, so equivalence of the open bodies suffices.
  while (e1->kind == ExprKind::Quantifier && e2->kind == ExprKind::Quantifier &&
         e1->quant == e2->quant && e1->qbinder.names == e2->qbinder.names) {
    const ExprPtr& t1 = e1->qbinder.type;
    const ExprPtr& t2 = e2->qbinder.type;
    bool types_ok = (!t1 && !t2) ||
                    (t1 && t2 && (expr_equal(t1, t2) || equiv_oracle(t1, t2, domain, max_assignments)));
    if (!types_ok) break;
    e1 = strip_parens(e1->children[0]);
    e2 = strip_parens(e2->children[0]);
  }

  AtomTable table;
  classify_atoms(e1, table);
  classify_atoms(e2, table);
  if (table.mixed) return false;

  const std::size_t n_prop = table.prop.size();
  const std::size_t n_int = table.ints.size();
  const std::size_t d = static_cast<std::size_t>(domain.hi - domain.lo + 1);
  if (n_prop >= 63) throw OracleTooLarge(max_assignments + 1);
  double space = std::pow(2.0, static_cast<double>(n_prop));
  for (std::size_t i = 0; i < n_int; ++i) space *= static_cast<double>(d);
  if (space > static_cast<double>(max_assignments))
    throw OracleTooLarge(static_cast<std::size_t>(space));

  Assignment a;
  a.table = &table;
  a.int_values.assign(n_int, domain.lo);
  for (std::uint64_t mask = 0; mask < (1ull << n_prop); ++mask) {
    a.prop_mask = mask;
    a.int_values.assign(n_int, domain.lo);
    for (;;) {
      if (eval_bool(e1, a) != eval_bool(e2, a)) return false;
      std::size_t k = 0;
      while (k < n_int) {
        if (a.int_values[k] < domain.hi) {
          ++a.int_values[k];
          break;
        }
        a.int_values[k] = domain.lo;
        ++k;
      }
      if (k == n_int) break;
    }
  }
  return true;
}

}  // namespace evostmt
