#ifndef ICC_REPORT_HPP
#define ICC_REPORT_HPP

// Structured output shared by the CLI (--format json) and the HTTP service.
// Every document is an envelope
//   {"schema": "icc.v1", "operation": ..., "inputs": {...}, "result": {...},
//    "warnings": [...]}
// Field names inside "result" are part of the versioned schema; see
// docs/api.md. Doubles are written at full round-trip precision.

#include "icc/audit.hpp"
#include "icc/difference.hpp"
#include "icc/power.hpp"
#include "icc/resample.hpp"
#include "icc/single.hpp"

#include "json.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icc::report {

using json = nlohmann::ordered_json;

inline constexpr std::string_view schema_version = "icc.v1";

inline json to_json(const TestResult& t) {
  return {{"statistic", t.statistic},
          {"p_value", t.p_value},
          {"alpha", t.alpha},
          {"tail", to_string(t.tails)},
          {"reject", t.reject}};
}

inline json to_json(const IntervalEstimate& ci) {
  return {{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}};
}

inline json to_json(const VarianceComponents& vc) {
  return {{"msb", vc.msb}, {"msw", vc.msw}, {"sigma2_b", vc.sigma2_b}, {"sigma2_w", vc.sigma2_w}};
}

inline json to_json(const Classification& c) {
  return {{"band", to_string(c.band)}, {"negative", c.negative}};
}

inline json to_json(const IccEstimate& e) {
  json j{{"r", e.r},
         {"n", e.design.n_subjects()},
         {"k", e.design.k_measurements()},
         {"negative", e.negative()}};
  if (e.components)
    j["components"] = to_json(*e.components);
  return j;
}

inline json to_json(const DifferenceResult& d) {
  return {{"theta_hat", d.theta_hat}, {"test", to_json(d.test)}, {"interval", to_json(d.interval)}};
}

inline json to_json(const SampleSizeResult& s) {
  return {{"n_required", s.n_required},
          {"d_z", s.d_z},
          {"variance_coefficient", s.variance_coefficient},
          {"n_exact", s.n_exact}};
}

inline json to_json(std::span<const SensitivityPoint> points) {
  json arr = json::array();
  for (const auto& p : points) {
    json j{{"r12", p.r12}, {"valid", p.valid}};
    if (p.valid) {
      j["statistic"] = p.statistic;
      j["p_value"] = p.p_value;
      j["lower"] = p.lower;
      j["upper"] = p.upper;
    } else {
      j["error"] = p.invalid_reason;
    }
    arr.push_back(std::move(j));
  }
  return {{"points", std::move(arr)}};
}

inline json to_json(const BootstrapResult& b, bool include_replicates) {
  json j{{"estimate", b.estimate},
         {"interval", to_json(b.interval)},
         {"significant", b.significant},
         {"replicate_count", b.replicates.size()},
         {"redraws", b.redraws}};
  if (include_replicates)
    j["replicates"] = b.replicates;
  return j;
}

inline json to_json(const audit::AuditReport& r) {
  json evals = json::array();
  for (const auto& e : r.evaluations) {
    json j{{"line", e.claim.line},
           {"id", e.claim.id},
           {"kind", e.claim.kind == io::ClaimKind::single ? "single" : "difference"},
           {"n", e.claim.n},
           {"k", e.claim.k}};
    if (e.claim.kind == io::ClaimKind::single) {
      j["r"] = e.claim.r;
      j["reference"] = e.reference ? json(*e.reference) : json(nullptr);
    } else {
      j["r1"] = e.claim.r1;
      j["r2"] = e.claim.r2;
      j["r12"] = e.claim.r12.value_or(0.0);
    }
    j["conclusion"] = e.claim.conclusion;
    if (e.claim.kind == io::ClaimKind::difference || e.reference)
      j["test"] = to_json(e.test);
    j["interval"] = to_json(e.interval);
    j["verdict"] = audit::to_string(e.verdict);
    if (!e.note.empty())
      j["note"] = e.note;
    evals.push_back(std::move(j));
  }
  json rejects = json::array();
  for (const auto& rj : r.rejects)
    rejects.push_back({{"line", rj.line}, {"error", rj.id}, {"message", rj.message}});
  return {{"claims", std::move(evals)},
          {"rejects", std::move(rejects)},
          {"summary",
           {{"recalculated", r.summary.recalculated},
            {"consistent", r.summary.consistent},
            {"consistent_rate", r.summary.consistent_rate}}}};
}

inline json envelope(std::string_view operation, json inputs, json result,
                     const std::vector<std::string>& warnings = {}) {
  return {{"schema", schema_version},
          {"operation", operation},
          {"inputs", std::move(inputs)},
          {"result", std::move(result)},
          {"warnings", warnings}};
}

inline json error_body(std::string_view kind, std::string_view id, std::string_view message) {
  return {{"schema", schema_version}, {"error", kind}, {"id", id}, {"message", message}};
}

} // namespace icc::report

#endif // ICC_REPORT_HPP
