#ifndef ICC_API_HPP
#define ICC_API_HPP

// Request validation and dispatch for the JSON interface. `dispatch` is a pure
// function of (endpoint, body): the HTTP server and the CLI both call it, so
// their outputs agree field for field.
//
// Status mapping: 200 success, 400 malformed payload or field-level
// validation failure, 404 unknown endpoint, 422 domain error raised by the
// library (body carries the library's error identifier).

#include "icc/difference.hpp"
#include "icc/error.hpp"
#include "icc/power.hpp"
#include "icc/report.hpp"
#include "icc/resample.hpp"
#include "icc/single.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace icc::api {

using json = report::json;

struct FieldError {
  std::string field;
  std::string message;
};

/// Payload failed validation; carries one entry per offending field.
class ValidationError : public std::exception {
public:
  explicit ValidationError(std::vector<FieldError> errors) : errors_(std::move(errors)) {
    message_ = "invalid request:";
    for (const auto& e : errors_)
      message_ += " " + e.field + ": " + e.message + ";";
  }
  const std::vector<FieldError>& errors() const noexcept { return errors_; }
  const char* what() const noexcept override { return message_.c_str(); }

private:
  std::vector<FieldError> errors_;
  std::string message_;
};

struct Options {
  unsigned bootstrap_workers = 1;
};

struct Response {
  int status = 200;
  json body;
};

/// Typed field access over a request object. Problems are collected rather
/// than thrown so one response can list every bad field; call finish()
/// before using any value.
class Fields {
public:
  explicit Fields(const json& body) : body_(body) {
    if (!body_.is_object())
      errors_.push_back({"$", "request body must be a JSON object"});
  }

  bool has(const char* name) const {
    return body_.is_object() && body_.contains(name) && !body_[name].is_null();
  }

  double number(const char* name) {
    if (!has(name)) {
      errors_.push_back({name, "required"});
      return 0.0;
    }
    return as_number(name, body_[name]);
  }
  double number(const char* name, double fallback) {
    return has(name) ? as_number(name, body_[name]) : echo(name, fallback);
  }

  int integer(const char* name) {
    if (!has(name)) {
      errors_.push_back({name, "required"});
      return 0;
    }
    return as_integer(name, body_[name]);
  }

  bool boolean(const char* name, bool fallback) {
    if (!has(name))
      return echo(name, fallback);
    if (!body_[name].is_boolean()) {
      errors_.push_back({name, "must be a boolean"});
      return fallback;
    }
    return echo(name, body_[name].get<bool>());
  }

  std::string text(const char* name, std::string fallback) {
    if (!has(name))
      return echo(name, std::move(fallback));
    if (!body_[name].is_string()) {
      errors_.push_back({name, "must be a string"});
      return fallback;
    }
    return echo(name, body_[name].get<std::string>());
  }

  std::uint64_t seed(const char* name) {
    if (!has(name)) {
      errors_.push_back({name, "required (bootstrap results must be reproducible)"});
      return 0;
    }
    const auto& v = body_[name];
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      errors_.push_back({name, "must be a non-negative integer"});
      return 0;
    }
    return echo(name, v.get<std::uint64_t>());
  }

  std::vector<double> numbers(const char* name) {
    std::vector<double> out;
    if (!has(name)) {
      errors_.push_back({name, "required"});
      return out;
    }
    const auto& v = body_[name];
    if (!v.is_array()) {
      errors_.push_back({name, "must be an array of numbers"});
      return out;
    }
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        errors_.push_back({name, "must contain only finite numbers"});
        return {};
      }
      out.push_back(x.get<double>());
    }
    inputs_[name] = v;
    return out;
  }

  std::vector<std::size_t> indices(const char* name) {
    std::vector<std::size_t> out;
    if (!has(name) || !body_[name].is_array()) {
      errors_.push_back({name, "required array of region indices"});
      return out;
    }
    for (const auto& x : body_[name]) {
      if (!x.is_number_integer() || (!x.is_number_unsigned() && x.get<std::int64_t>() < 0)) {
        errors_.push_back({name, "must contain non-negative integers"});
        return {};
      }
      out.push_back(x.get<std::size_t>());
    }
    inputs_[name] = body_[name];
    return out;
  }

  /// Rectangular rows-by-columns matrix of finite numbers.
  std::vector<std::vector<double>> matrix(const char* name) {
    std::vector<std::vector<double>> rows;
    if (!has(name) || !body_[name].is_array()) {
      errors_.push_back({name, "required array of rows"});
      return rows;
    }
    for (const auto& row : body_[name]) {
      if (!row.is_array()) {
        errors_.push_back({name, "every row must be an array of numbers"});
        return {};
      }
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
          errors_.push_back({name, "must contain only finite numbers"});
          return {};
        }
        r.push_back(x.get<double>());
      }
      if (!rows.empty() && r.size() != rows.front().size()) {
        errors_.push_back({name, "rows must all have the same length"});
        return {};
      }
      rows.push_back(std::move(r));
    }
    return rows;
  }

  /// subjects x regions x sessions.
  std::vector<std::vector<std::vector<double>>> cube(const char* name) {
    std::vector<std::vector<std::vector<double>>> out;
    if (!has(name) || !body_[name].is_array()) {
      errors_.push_back({name, "required array (subjects x regions x sessions)"});
      return out;
    }
    for (const auto& subj : body_[name]) {
      std::vector<std::vector<double>> grid;
      if (!subj.is_array()) {
        errors_.push_back({name, "every subject must be an array of regions"});
        return {};
      }
      for (const auto& region : subj) {
        std::vector<double> sessions;
        if (!region.is_array()) {
          errors_.push_back({name, "every region must be an array of session values"});
          return {};
        }
        for (const auto& x : region) {
          if (!x.is_number() || !std::isfinite(x.get<double>())) {
            errors_.push_back({name, "must contain only finite numbers"});
            return {};
          }
          sessions.push_back(x.get<double>());
        }
        grid.push_back(std::move(sessions));
      }
      out.push_back(std::move(grid));
    }
    return out;
  }

  void fail(std::string field, std::string message) {
    errors_.push_back({std::move(field), std::move(message)});
  }

  void finish() const {
    if (!errors_.empty())
      throw ValidationError(errors_);
  }

  const json& inputs() const noexcept { return inputs_; }

private:
  template <typename T>
  T echo(const char* name, T value) {
    inputs_[name] = value;
    return value;
  }

  double as_number(const char* name, const json& v) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      errors_.push_back({name, "must be a finite number"});
      return 0.0;
    }
    return echo(name, v.get<double>());
  }

  int as_integer(const char* name, const json& v) {
    if (v.is_number_integer())
      return echo(name, v.get<int>());
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e9)
        return echo(name, static_cast<int>(d));
    }
    errors_.push_back({name, "must be an integer"});
    return 0;
  }

  const json& body_;
  json inputs_ = json::object();
  std::vector<FieldError> errors_;
};

namespace detail {

template <typename T, typename Parse>
T enum_field(Fields& f, const char* name, std::string fallback, Parse&& parse, T def) {
  const auto s = f.text(name, std::move(fallback));
  try {
    return parse(s);
  } catch (const DomainError& e) {
    f.fail(name, e.what());
    return def;
  }
}

inline json single_test(const json& body) {
  Fields f(body);
  const double r = f.number("r");
  const int n = f.integer("n");
  const int k = f.integer("k");
  const double rho0 = f.number("rho0");
  const double alpha = f.number("alpha", 0.05);
  const double level = f.number("level", 0.95);
  const Tail tail = enum_field(f, "tail", "greater", parse_tail, Tail::greater);
  f.finish();
  const Design design(n, k);
  json result{{"test", report::to_json(test_single(r, design, rho0, alpha, tail))},
              {"interval", report::to_json(ci_single(r, design, level))}};
  return report::envelope("single/test", f.inputs(), std::move(result));
}

inline json single_ci(const json& body) {
  Fields f(body);
  const double r = f.number("r");
  const int n = f.integer("n");
  const int k = f.integer("k");
  const double level = f.number("level", 0.95);
  f.finish();
  json result{{"interval", report::to_json(ci_single(r, Design(n, k), level))}};
  return report::envelope("single/ci", f.inputs(), std::move(result));
}

inline json single_classify(const json& body) {
  Fields f(body);
  const double r = f.number("r");
  f.finish();
  const auto c = classify_reliability(r);
  std::vector<std::string> warnings;
  if (c.negative)
    warnings.push_back("negative ICC reported as 'poor'");
  return report::envelope("single/classify", f.inputs(), report::to_json(c), warnings);
}

struct ComparisonRequest {
  std::optional<ComparisonDesign> design;
  std::vector<std::string> warnings;
};

inline ComparisonRequest read_comparison(Fields& f) {
  const double r1 = f.number("r1");
  const double r2 = f.number("r2");
  const int n = f.integer("n");
  const int k = f.integer("k");
  const bool dependent = f.boolean("dependent", true);
  const bool has_r12 = f.has("r12");
  const double r12 = f.number("r12", 0.0);
  if (!dependent && has_r12 && r12 != 0.0)
    f.fail("r12", "must be absent or 0 for independent comparisons");
  f.finish();
  ComparisonRequest req;
  const Design design(n, k);
  if (dependent) {
    req.design = ComparisonDesign::dependent(r1, r2, design, r12);
    if (!has_r12)
      req.warnings.push_back("r12 not supplied; assumed 0, which makes the result conservative");
  } else {
    req.design = ComparisonDesign::independent(r1, r2, design);
  }
  return req;
}

inline json diff_test(const json& body) {
  Fields f(body);
  const double alpha = f.number("alpha", 0.05);
  const double level = f.number("level", 0.95);
  const Tail tail = enum_field(f, "tail", "two-sided", parse_tail, Tail::two_sided);
  auto req = read_comparison(f);
  const auto result = compare(*req.design, alpha, tail, level);
  return report::envelope("diff/test", f.inputs(), report::to_json(result), req.warnings);
}

inline json diff_ci(const json& body) {
  Fields f(body);
  const double level = f.number("level", 0.95);
  auto req = read_comparison(f);
  const auto& c = *req.design;
  json result{{"theta_hat", c.r1() - c.r2()},
              {"interval", report::to_json(ci_difference(c, level))}};
  return report::envelope("diff/ci", f.inputs(), std::move(result), req.warnings);
}

inline json diff_sensitivity(const json& body) {
  Fields f(body);
  const double r1 = f.number("r1");
  const double r2 = f.number("r2");
  const int n = f.integer("n");
  const int k = f.integer("k");
  const double level = f.number("level", 0.95);
  const double alpha = f.number("alpha", 0.05);
  const auto grid = f.numbers("grid");
  f.finish();
  const auto c = ComparisonDesign::dependent(r1, r2, Design(n, k), 0.0);
  const auto points = sensitivity_curve(c, level, grid, alpha);
  std::vector<std::string> warnings;
  for (const auto& p : points)
    if (!p.valid)
      warnings.push_back("r12 = " + std::to_string(p.r12) + " is inconsistent with the inputs (" +
                         p.invalid_reason + ")");
  return report::envelope("diff/sensitivity", f.inputs(), report::to_json(points), warnings);
}

inline json power_single(const json& body) {
  Fields f(body);
  SinglePowerSpec spec;
  spec.rho1 = f.number("rho1");
  spec.rho0 = f.number("rho0");
  spec.k = f.integer("k");
  spec.alpha = f.number("alpha", 0.05);
  spec.power = f.number("power", 0.8);
  spec.sides = enum_field(f, "sides", "two", parse_sides, Sides::two);
  f.finish();
  return report::envelope("power/single", f.inputs(), report::to_json(sample_size_single(spec)));
}

inline DifferencePowerSpec read_difference_spec(Fields& f, Dependence& dep) {
  DifferencePowerSpec spec;
  spec.rho1 = f.number("rho1");
  spec.rho2 = f.number("rho2");
  spec.k = f.integer("k");
  spec.rho12 = f.number("rho12", 0.0);
  spec.alpha = f.number("alpha", 0.05);
  spec.power = f.number("power", 0.8);
  spec.sides = enum_field(f, "sides", "two", parse_sides, Sides::two);
  dep = f.boolean("dependent", true) ? Dependence::dependent : Dependence::independent;
  if (dep == Dependence::independent && spec.rho12 != 0.0)
    f.fail("rho12", "must be absent or 0 for independent designs");
  return spec;
}

inline json power_diff(const json& body) {
  Fields f(body);
  Dependence dep{};
  const auto spec = read_difference_spec(f, dep);
  f.finish();
  return report::envelope("power/diff", f.inputs(),
                          report::to_json(sample_size_difference(spec, dep)));
}

inline json power_at_n(const json& body) {
  Fields f(body);
  Dependence dep{};
  const auto spec = read_difference_spec(f, dep);
  const int n = f.integer("n");
  f.finish();
  json result{{"n", n}, {"power", power_at(spec, n, dep)}};
  return report::envelope("power/at", f.inputs(), std::move(result));
}

inline BootstrapConfig read_bootstrap_config(Fields& f, const Options& opt) {
  BootstrapConfig cfg;
  cfg.replicates = f.has("replicates") ? f.integer("replicates") : 1000;
  cfg.seed = f.seed("seed");
  cfg.level = f.number("level", 0.95);
  cfg.workers = opt.bootstrap_workers;
  return cfg;
}

inline std::vector<std::string> labels(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline json bootstrap_diff(const json& body, const Options& opt) {
  Fields f(body);
  const auto a = f.matrix("instrument1");
  const auto b = f.matrix("instrument2");
  const auto cfg = read_bootstrap_config(f, opt);
  const bool include = f.boolean("include_replicates", false);
  if (a.size() != b.size())
    f.fail("instrument2", "must have the same number of subjects as instrument1");
  f.finish();
  const auto data = PairedMeasurements::from_tables(MeasurementTable::from_rows(a),
                                                    MeasurementTable::from_rows(b));
  const auto result = bootstrap_dependent_difference(data, cfg);
  return report::envelope("bootstrap/diff", f.inputs(), report::to_json(result, include),
                          result.warnings);
}

inline json bootstrap_regions(const json& body, const Options& opt) {
  Fields f(body);
  const auto cube = f.cube("panel");
  const auto ga = f.indices("group_a");
  const auto gb = f.indices("group_b");
  const auto cfg = read_bootstrap_config(f, opt);
  const bool include = f.boolean("include_replicates", false);
  std::size_t regions = 0;
  std::size_t k = 0;
  if (!cube.empty() && !cube.front().empty()) {
    regions = cube.front().size();
    k = cube.front().front().size();
  }
  std::vector<double> values;
  for (const auto& subj : cube) {
    if (subj.size() != regions) {
      f.fail("panel", "every subject must have the same number of regions");
      break;
    }
    for (const auto& reg : subj) {
      if (reg.size() != k) {
        f.fail("panel", "every region must have the same number of sessions");
        break;
      }
      values.insert(values.end(), reg.begin(), reg.end());
    }
  }
  if (cube.size() < 2 && f.has("panel"))
    f.fail("panel", "needs at least 2 subjects");
  f.finish();
  RegionPanel panel(labels("s", cube.size()), labels("region", regions), std::move(values),
                    static_cast<int>(k), ga, gb);
  const auto result = bootstrap_region_groups(panel, cfg);
  return report::envelope("bootstrap/regions", f.inputs(), report::to_json(result, include),
                          result.warnings);
}

} // namespace detail

inline const std::vector<std::string>& endpoints() {
  static const std::vector<std::string> list{
      "/single/test", "/single/ci",    "/single/classify", "/diff/test",
      "/diff/ci",     "/diff/sensitivity", "/power/single", "/power/diff",
      "/power/at",    "/bootstrap/diff", "/bootstrap/regions"};
  return list;
}

inline json health() {
  return {{"status", "ok"}, {"schema", report::schema_version}};
}

/// Evaluates one POST endpoint on a parsed body. Library and validation
/// errors are turned into 422 / 400 responses; anything else propagates.
inline Response dispatch(std::string_view endpoint, const json& body, const Options& opt = {}) {
  try {
    if (endpoint == "/single/test") return {200, detail::single_test(body)};
    if (endpoint == "/single/ci") return {200, detail::single_ci(body)};
    if (endpoint == "/single/classify") return {200, detail::single_classify(body)};
    if (endpoint == "/diff/test") return {200, detail::diff_test(body)};
    if (endpoint == "/diff/ci") return {200, detail::diff_ci(body)};
    if (endpoint == "/diff/sensitivity") return {200, detail::diff_sensitivity(body)};
    if (endpoint == "/power/single") return {200, detail::power_single(body)};
    if (endpoint == "/power/diff") return {200, detail::power_diff(body)};
    if (endpoint == "/power/at") return {200, detail::power_at_n(body)};
    if (endpoint == "/bootstrap/diff") return {200, detail::bootstrap_diff(body, opt)};
    if (endpoint == "/bootstrap/regions") return {200, detail::bootstrap_regions(body, opt)};
    return {404, report::error_body("not-found", "unknown-endpoint",
                                    "no endpoint " + std::string(endpoint))};
  } catch (const ValidationError& e) {
    auto b = report::error_body("validation", "invalid-request", e.what());
    b["fields"] = json::array();
    for (const auto& fe : e.errors())
      b["fields"].push_back({{"field", fe.field}, {"message", fe.message}});
    return {400, std::move(b)};
  } catch (const Error& e) {
    return {422, report::error_body("domain", e.id(), e.what())};
  }
}

/// Same as above on raw body text; unparseable JSON is a 400.
inline Response dispatch_text(std::string_view endpoint, std::string_view body,
                              const Options& opt = {}) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded())
    return {400, report::error_body("validation", "malformed-json", "request body is not valid JSON")};
  return dispatch(endpoint, parsed, opt);
}

} // namespace icc::api

#endif // ICC_API_HPP
