#include "evostmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "evostmt/errors.hpp"

namespace evostmt {

const char* call_kind_name(CallKind k) {
  switch (k) {
    case CallKind::Seed: return "seed";
    case CallKind::Patch: return "patch";
    case CallKind::CompileRepair: return "compile_repair";
    case CallKind::SemanticRepair: return "semantic_repair";
  }
  return "?";
}

CallKind call_kind_from_name(const std::string& s) {
  if (s == "seed") return CallKind::Seed;
  if (s == "patch") return CallKind::Patch;
  if (s == "compile_repair") return CallKind::CompileRepair;
  if (s == "semantic_repair") return CallKind::SemanticRepair;
  throw SchemaError(0, "unknown call kind: " + s);
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Seed: return "seed";
    case Provenance::Full: return "full";
    case Provenance::Diff: return "diff";
    case Provenance::Cross: return "cross";
    case Provenance::CompileRepairOut: return "compile_repair";
    case Provenance::SemanticRepairOut: return "semantic_repair";
    case Provenance::Evolast: return "evolast";
  }
  return "?";
}

Provenance provenance_from_name(const std::string& s) {
  if (s == "seed") return Provenance::Seed;
  if (s == "full") return Provenance::Full;
  if (s == "diff") return Provenance::Diff;
  if (s == "cross") return Provenance::Cross;
  if (s == "compile_repair") return Provenance::CompileRepairOut;
  if (s == "semantic_repair") return Provenance::SemanticRepairOut;
  if (s == "evolast") return Provenance::Evolast;
  throw SchemaError(0, "unknown provenance: " + s);
}

PerCallMetrics per_call_metrics(const ProblemTrace& trace, int t) {
  if (t < 1 || static_cast<std::size_t>(t) > trace.events.size())
    throw OutOfRange("t=" + std::to_string(t) + " for trace of length " +
                     std::to_string(trace.events.size()));
  PerCallMetrics m;
  int compiled = 0;
  int sem = 0;
  int sem_feasible = 0;
  std::set<std::string> dedup;
  for (int i = 0; i < t; ++i) {
    const RunEvent& e = trace.events[static_cast<std::size_t>(i)];
    if (e.compile_ok) {
      ++compiled;
      m.ch = true;
      if (e.semantic_ok) {
        ++sem_feasible;
        m.sh = true;
        if (!e.canonical_key.empty()) dedup.insert(e.canonical_key);
      }
    }
    if (e.compile_ok && e.semantic_ok) ++sem;
  }
  m.fy = static_cast<double>(compiled) / t;
  m.sy = static_cast<double>(sem) / t;
  m.sd = compiled == 0 ? 0.0 : static_cast<double>(sem_feasible) / compiled;
  m.div = static_cast<int>(dedup.size());
  return m;
}

double gini(const std::vector<double>& counts, double eps) {
  const std::size_t n = counts.size();
  if (n == 0) return 0.0;
  std::vector<double> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  // sum_{i,j} |s_i - s_j| = 2 * sum_k (2k - n + 1) * s_(k), 0-based sorted order
  double abs_sum = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    abs_sum += (2.0 * static_cast<double>(k) - static_cast<double>(n) + 1.0) * sorted[k];
    total += sorted[k];
  }
  abs_sum *= 2.0;
  return abs_sum / (2.0 * static_cast<double>(n) * total + eps);
}

double top_share(const std::vector<double>& counts, double fraction) {
  const std::size_t n = counts.size();
  if (n == 0) return 0.0;
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  std::size_t take = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)) + 0.5);
  if (take == 0) take = 1;
  if (take > n) take = n;
  double top = 0.0;
  for (std::size_t i = 0; i < take; ++i) top += counts[order[i]];
  return top / total;
}

std::optional<int> first_hit(const ProblemTrace& trace) {
  for (const RunEvent& e : trace.events)
    if (e.compile_ok && e.semantic_ok) return e.call_index;
  return std::nullopt;
}

BudgetAudit budget_audit(const std::vector<ProblemTrace>& traces) {
  BudgetAudit audit;
  for (const auto& trace : traces) {
    for (const RunEvent& e : trace.events) {
      ++audit.total;
      switch (e.kind) {
        case CallKind::Seed:
        case CallKind::Patch: ++audit.gen; break;
        case CallKind::CompileRepair: ++audit.crep; break;
        case CallKind::SemanticRepair: ++audit.srep; break;
      }
      if (e.compile_ok) {
        ++audit.judge_calls;
        if (e.provenance == Provenance::Evolast) ++audit.evolast_judge;
      }
    }
  }
  return audit;
}

std::vector<std::pair<int, int>> rr64_schedule(int num_statements, int budget) {
  std::vector<std::pair<int, int>> out;
  if (num_statements <= 0 || budget < 1) return out;
  out.reserve(static_cast<std::size_t>(budget));
  for (int t = 0; t < budget; ++t)
    out.emplace_back(t % num_statements, t / num_statements);
  return out;
}

ProofUtility proof_utility(const std::vector<ProverAttempt>& attempts,
                           const std::vector<std::string>& problem_ids) {
  ProofUtility pu;
  pu.n = static_cast<int>(problem_ids.size());
  for (const auto& pid : problem_ids) {
    bool any = false, pass = false, complete = false, theorem_complete = false;
    for (const auto& a : attempts) {
      if (a.problem_id != pid) continue;
      any = true;
      pass = pass || a.pass;
      complete = complete || a.complete;
      theorem_complete = theorem_complete || a.theorem_complete;
    }
    if (any) ++pu.attempted;
    pu.pass_count += pass ? 1 : 0;
    pu.complete_count += complete ? 1 : 0;
    pu.theorem_complete_count += theorem_complete ? 1 : 0;
  }
  return pu;
}

std::vector<RepertoireEntry> repertoire_for_proving(const ProblemTrace& trace, int cap) {
  std::vector<RepertoireEntry> out;
  std::set<std::string> seen;
  for (const RunEvent& e : trace.events) {
    if (!(e.compile_ok && e.semantic_ok)) continue;
    if (e.canonical_key.empty() || !seen.insert(e.canonical_key).second) continue;
    out.push_back({e.call_index, e.canonical_key, e.statement_text});
    if (static_cast<int>(out.size()) >= cap) break;
  }
  return out;
}

BootstrapCi paired_bootstrap_ci(const std::vector<double>& a, const std::vector<double>& b,
                                int reps, double level, Rng& rng) {
  if (a.size() != b.size()) throw LengthMismatch();
  if (a.empty()) throw LengthMismatch();
  const std::size_t n = a.size();
  BootstrapCi ci;
  for (std::size_t i = 0; i < n; ++i) {
    ci.mean_a += a[i];
    ci.mean_b += b[i];
  }
  ci.mean_a /= static_cast<double>(n);
  ci.mean_b /= static_cast<double>(n);
  ci.delta = ci.mean_a - ci.mean_b;

  std::vector<double> deltas(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = rng.uniform_index(n);
      sum += a[j] - b[j];
    }
    deltas[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  std::sort(deltas.begin(), deltas.end());
  auto quantile = [&](double q) {
    double idx = q * static_cast<double>(deltas.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, deltas.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return deltas[lo] * (1.0 - frac) + deltas[hi] * frac;
  };
  double alpha = (1.0 - level) / 2.0;
  ci.lo = quantile(alpha);
  ci.hi = quantile(1.0 - alpha);
  return ci;
}

SignTest exact_sign_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw LengthMismatch();
  SignTest st;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++st.wins;
    else if (a[i] < b[i]) ++st.losses;
    else ++st.ties;
  }
  const int n = st.wins + st.losses;
  if (n == 0) {
    st.p_value = 1.0;
    return st;
  }
  // pmf(k) = C(n,k) / 2^n in long double, built by recurrence
  std::vector<long double> pmf(static_cast<std::size_t>(n) + 1);
  pmf[0] = std::pow(0.5L, static_cast<long double>(n));
  for (int k = 1; k <= n; ++k)
    pmf[static_cast<std::size_t>(k)] =
        pmf[static_cast<std::size_t>(k - 1)] * static_cast<long double>(n - k + 1) /
        static_cast<long double>(k);
  const long double observed = pmf[static_cast<std::size_t>(st.wins)];
  long double p = 0.0L;
  for (int k = 0; k <= n; ++k)
    if (pmf[static_cast<std::size_t>(k)] <= observed * (1.0L + 1e-12L))
      p += pmf[static_cast<std::size_t>(k)];
  st.p_value = static_cast<double>(std::min(p, 1.0L));
  return st;
}

}  // namespace evostmt
