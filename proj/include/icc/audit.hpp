#ifndef ICC_AUDIT_HPP
#define ICC_AUDIT_HPP

// Batch re-evaluation of published ICC inferences.
//
// Single-ICC claims are tested one-sided against a reference: the claim's
// rho0 when given, otherwise the Koo band edge implied by the conclusion
// ("good" -> H1: rho > 0.75; "poor" -> H1: rho < 0.5). Difference claims are
// tested two-sided, with r12 = 0 unless the claim supplies it. A claim is
// consistent when its stated direction survives the recalculated test.
//
// Conclusion vocabulary:
//   single:     poor | moderate | good | excellent | above | below
//   difference: r1>r2 | r1<r2 | different | no-difference

#include "icc/difference.hpp"
#include "icc/ingest.hpp"
#include "icc/single.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace icc::audit {

enum class Verdict { consistent, inconsistent, unassessed };

inline std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::consistent: return "consistent";
  case Verdict::inconsistent: return "inconsistent";
  case Verdict::unassessed: return "unassessed";
  }
  return "unassessed";
}

struct ClaimEvaluation {
  io::ClaimRecord claim;
  TestResult test;
  IntervalEstimate interval;          ///< two-sided, at `level`
  std::optional<double> reference;    ///< single claims only
  Verdict verdict = Verdict::unassessed;
  std::string note;
};

struct AuditSummary {
  int recalculated = 0; ///< claims with an assessable conclusion
  int consistent = 0;
  double consistent_rate = 0.0;
};

struct AuditReport {
  std::vector<ClaimEvaluation> evaluations;
  std::vector<io::ClaimReject> rejects;
  AuditSummary summary;
};

namespace detail {

inline ClaimEvaluation evaluate_single(const io::ClaimRecord& c, double alpha, double level) {
  ClaimEvaluation ev{c, {}, {}, std::nullopt, Verdict::unassessed, {}};
  const Design design(c.n, c.k);
  ev.interval = ci_single(c.r, design, level);

  // Direction of the claim and its reference value.
  std::optional<Tail> tail = c.tail;
  std::optional<double> ref = c.rho0;
  if (const auto band = parse_band(c.conclusion)) {
    if (*band == ReliabilityBand::poor) {
      tail = tail.value_or(Tail::less);
      ref = ref.value_or(0.5);
    } else {
      tail = tail.value_or(Tail::greater);
      ref = ref.value_or(band_floor(*band));
    }
  } else if (c.conclusion == "above") {
    tail = Tail::greater;
  } else if (c.conclusion == "below") {
    tail = Tail::less;
  } else if (!c.conclusion.empty()) {
    ev.note = "unrecognised conclusion '" + c.conclusion + "'";
  }

  if (!ref) {
    if (ev.note.empty())
      ev.note = "no reference value; test not performed";
    ev.test = {};
    return ev;
  }
  ev.reference = ref;
  ev.test = test_single(c.r, design, *ref, alpha, tail.value_or(Tail::greater));
  if (!tail || !ev.note.empty() || c.conclusion.empty())
    return ev;
  ev.verdict = ev.test.reject ? Verdict::consistent : Verdict::inconsistent;
  return ev;
}

inline ClaimEvaluation evaluate_difference(const io::ClaimRecord& c, double alpha, double level) {
  ClaimEvaluation ev{c, {}, {}, std::nullopt, Verdict::unassessed, {}};
  const Design design(c.n, c.k);
  const auto cmp = ComparisonDesign::dependent(c.r1, c.r2, design, c.r12.value_or(0.0));
  ev.test = test_difference(cmp, alpha, Tail::two_sided);
  ev.interval = ci_difference(cmp, level);
  if (!c.r12)
    ev.note = "r12 assumed 0, conservative";

  const auto& s = c.conclusion;
  const bool positive = ev.test.statistic > 0.0;
  if (s == "r1>r2" || s == "greater")
    ev.verdict = ev.test.reject && positive ? Verdict::consistent : Verdict::inconsistent;
  else if (s == "r1<r2" || s == "less")
    ev.verdict = ev.test.reject && !positive ? Verdict::consistent : Verdict::inconsistent;
  else if (s == "different")
    ev.verdict = ev.test.reject ? Verdict::consistent : Verdict::inconsistent;
  else if (s == "no-difference" || s == "equal")
    ev.verdict = ev.test.reject ? Verdict::inconsistent : Verdict::consistent;
  else if (!s.empty())
    ev.note = "unrecognised conclusion '" + s + "'";
  return ev;
}

} // namespace detail

/// Re-evaluates every claim; claims that fail at evaluation time are moved to
/// the rejects list with their error identifier.
inline AuditReport run_audit(const io::ClaimBatch& batch, double alpha = 0.05,
                             double level = 0.95) {
  AuditReport report;
  report.rejects = batch.rejects;
  for (const auto& c : batch.records) {
    try {
      report.evaluations.push_back(c.kind == io::ClaimKind::single
                                       ? detail::evaluate_single(c, alpha, level)
                                       : detail::evaluate_difference(c, alpha, level));
    } catch (const Error& e) {
      report.rejects.push_back({c.line, e.id(), e.what()});
    }
  }
  for (const auto& ev : report.evaluations) {
    if (ev.verdict == Verdict::unassessed)
      continue;
    ++report.summary.recalculated;
    if (ev.verdict == Verdict::consistent)
      ++report.summary.consistent;
  }
  if (report.summary.recalculated > 0)
    report.summary.consistent_rate =
        static_cast<double>(report.summary.consistent) / report.summary.recalculated;
  return report;
}

} // namespace icc::audit

#endif // ICC_AUDIT_HPP
