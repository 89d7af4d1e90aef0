// icc: command-line front end for ICC inference and study planning.
//
// Exit status: 0 success, 1 usage error, 2 domain or data error.

#include "icc/api.hpp"
#include "icc/audit.hpp"
#include "icc/difference.hpp"
#include "icc/ingest.hpp"
#include "icc/report.hpp"
#include "icc/resample.hpp"
#include "icc/single.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using icc::report::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_domain = 2;

struct OutputOptions {
  std::string format = "text";
  std::string path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw icc::DataError("unreadable-file", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pvalue(double p) { return p < 0.0001 ? "<0.0001" : fixed4(p); }

std::string percent(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g%%", level * 100.0);
  return buf;
}

std::string render_test(const json& t) {
  return "statistic " + fixed4(t["statistic"].get<double>()) + ", p " +
         pvalue(t["p_value"].get<double>()) + " (" + t["tail"].get<std::string>() +
         ", alpha " + fixed4(t["alpha"].get<double>()) + ") -> " +
         (t["reject"].get<bool>() ? "reject H0" : "retain H0");
}

std::string render_interval(const json& ci) {
  return percent(ci["level"].get<double>()) + " CI [" + fixed4(ci["lower"].get<double>()) + ", " +
         fixed4(ci["upper"].get<double>()) + "]";
}

std::string render_bootstrap(const json& r) {
  return "estimate " + fixed4(r["estimate"].get<double>()) + "\n" +
         render_interval(r["interval"]) + " from " +
         std::to_string(r["replicate_count"].get<std::size_t>()) + " replicates -> " +
         (r["significant"].get<bool>() ? "interval excludes 0 (significant)"
                                       : "interval includes 0 (not significant)") +
         "\n";
}

/// Human-readable rendering of an envelope.
std::string render_text(const json& env) {
  const auto op = env["operation"].get<std::string>();
  const auto& r = env["result"];
  std::string out;
  if (op == "single/test") {
    out = render_test(r["test"]) + "\n" + render_interval(r["interval"]) + "\n";
  } else if (op == "single/ci") {
    out = render_interval(r["interval"]) + "\n";
  } else if (op == "single/classify") {
    out = r["band"].get<std::string>() + (r["negative"].get<bool>() ? " (negative ICC)" : "") + "\n";
  } else if (op == "estimate") {
    const auto& e = r["estimate"];
    out = "ICC " + fixed4(e["r"].get<double>()) + " (N=" + std::to_string(e["n"].get<int>()) +
          ", k=" + std::to_string(e["k"].get<int>()) + ")\n";
    const auto& c = e["components"];
    out += "MSB " + fixed4(c["msb"].get<double>()) + ", MSW " + fixed4(c["msw"].get<double>()) +
           ", sigma2_b " + fixed4(c["sigma2_b"].get<double>()) + ", sigma2_w " +
           fixed4(c["sigma2_w"].get<double>()) + "\n";
    if (r.contains("interval"))
      out += render_interval(r["interval"]) + "\n";
    out += "band " + r["classification"]["band"].get<std::string>() + "\n";
  } else if (op == "diff/test") {
    out = "difference " + fixed4(r["theta_hat"].get<double>()) + "\n" + render_test(r["test"]) +
          "\n" + render_interval(r["interval"]) + "\n";
  } else if (op == "diff/ci") {
    out = "difference " + fixed4(r["theta_hat"].get<double>()) + "\n" +
          render_interval(r["interval"]) + "\n";
  } else if (op == "diff/sensitivity") {
    out = "r12      statistic  p        lower    upper\n";
    for (const auto& p : r["points"]) {
      out += fixed4(p["r12"].get<double>()) + "   ";
      if (p["valid"].get<bool>())
        out += fixed4(p["statistic"].get<double>()) + "     " + pvalue(p["p_value"].get<double>()) +
               "   " + fixed4(p["lower"].get<double>()) + "   " + fixed4(p["upper"].get<double>());
      else
        out += "invalid (" + p["error"].get<std::string>() + ")";
      out += "\n";
    }
  } else if (op == "power/single" || op == "power/diff") {
    out = "N required " + std::to_string(r["n_required"].get<int>()) + " (exact " +
          fixed4(r["n_exact"].get<double>()) + ", d_z " + fixed4(r["d_z"].get<double>()) + ")\n";
  } else if (op == "power/at") {
    out = "power " + fixed4(r["power"].get<double>()) + " at N=" + std::to_string(r["n"].get<int>()) +
          "\n";
  } else if (op == "bootstrap/diff" || op == "bootstrap/regions") {
    out = render_bootstrap(r);
  } else if (op == "audit") {
    for (const auto& c : r["claims"]) {
      out += "line " + std::to_string(c["line"].get<std::size_t>());
      if (!c["id"].get<std::string>().empty())
        out += " [" + c["id"].get<std::string>() + "]";
      out += " " + c["kind"].get<std::string>() + ": ";
      if (c.contains("test"))
        out += "p " + pvalue(c["test"]["p_value"].get<double>()) + ", ";
      out += render_interval(c["interval"]) + " -> " + c["verdict"].get<std::string>();
      if (c.contains("note"))
        out += " (" + c["note"].get<std::string>() + ")";
      out += "\n";
    }
    for (const auto& rj : r["rejects"])
      out += "line " + std::to_string(rj["line"].get<std::size_t>()) + " rejected: " +
             rj["message"].get<std::string>() + "\n";
    const auto& s = r["summary"];
    out += "consistent " + std::to_string(s["consistent"].get<int>()) + " of " +
           std::to_string(s["recalculated"].get<int>()) + " (" +
           percent(s["consistent_rate"].get<double>()) + ")\n";
  } else {
    out = env.dump(2) + "\n";
  }
  for (const auto& w : env["warnings"])
    out += "warning: " + w.get<std::string>() + "\n";
  return out;
}

void emit(const json& env, const OutputOptions& o) {
  const std::string text = o.format == "json" ? env.dump() + "\n" : render_text(env);
  if (o.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.path, std::ios::binary);
  if (!out)
    throw icc::DataError("unwritable-file", "cannot write '" + o.path + "'");
  out << text;
}

/// Runs an API endpoint and surfaces validation / domain failures as the
/// exceptions the CLI maps to exit codes.
json call(std::string_view endpoint, const json& body) {
  const auto res = icc::api::dispatch(endpoint, body);
  if (res.status == 400) {
    std::vector<icc::api::FieldError> errs;
    if (res.body.contains("fields"))
      for (const auto& f : res.body["fields"])
        errs.push_back({"--" + f["field"].get<std::string>(), f["message"].get<std::string>()});
    throw icc::api::ValidationError(errs);
  }
  if (res.status != 200)
    throw icc::Error(res.body["id"].get<std::string>(), res.body["message"].get<std::string>());
  return res.body;
}

icc::api::ValidationError usage_error(std::string field, std::string message) {
  return icc::api::ValidationError(
      std::vector<icc::api::FieldError>{{std::move(field), std::move(message)}});
}

void add_output(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd->add_option("-o,--output", o.path, "Write output to a file instead of stdout");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty())
    out.push_back(cur);
  return out;
}

struct Params {
  double r = 0, r1 = 0, r2 = 0, r12 = 0, rho0 = 0, rho1 = 0, rho2 = 0, rho12 = 0;
  int n = 0, k = 0;
  double alpha = 0.05, level = 0.95, power = 0.8;
  std::string tail, sides = "two";
  bool dependent = false, independent = false;
  std::vector<double> grid;
  double from = 0, to = 0.9, step = 0.1;
  std::string data, data1, data2, claims, mapping, unit1, unit2, group_a, group_b;
  int replicates = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool include_replicates = false;
};

int run(int argc, char** argv) {
  CLI::App app{"Inference and sample-size planning for intraclass correlations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(icc::report::schema_version));

  Params p;
  OutputOptions out;
  std::function<json()> action;

  auto design_opts = [&](CLI::App* c) {
    c->add_option("--n", p.n, "Number of subjects N")->required();
    c->add_option("--k", p.k, "Measurements per subject k")->required();
  };
  auto dependence_flags = [&](CLI::App* c) {
    auto* dep = c->add_flag("--dependent", p.dependent, "Same cohort (default)");
    c->add_flag("--independent", p.independent, "Two independent cohorts")->excludes(dep);
  };

  // single-test
  auto* single_test = app.add_subcommand("single-test", "Test a single ICC against a reference");
  single_test->add_option("--r", p.r, "Sample ICC")->required();
  design_opts(single_test);
  single_test->add_option("--rho0", p.rho0, "Reference ICC")->required();
  single_test->add_option("--alpha", p.alpha)->capture_default_str();
  single_test->add_option("--tail", p.tail, "greater | less | two-sided")->default_str("greater");
  single_test->add_option("--level", p.level, "Level of the reported interval")->capture_default_str();
  add_output(single_test, out);
  single_test->callback([&] {
    action = [&] {
      return call("/single/test", {{"r", p.r}, {"n", p.n}, {"k", p.k}, {"rho0", p.rho0},
                                   {"alpha", p.alpha}, {"level", p.level},
                                   {"tail", p.tail.empty() ? "greater" : p.tail}});
    };
  });

  // single-ci
  auto* single_ci = app.add_subcommand("single-ci", "Confidence interval for a single ICC");
  single_ci->add_option("--r", p.r, "Sample ICC")->required();
  design_opts(single_ci);
  single_ci->add_option("--level", p.level)->capture_default_str();
  add_output(single_ci, out);
  single_ci->callback([&] {
    action = [&] {
      return call("/single/ci", {{"r", p.r}, {"n", p.n}, {"k", p.k}, {"level", p.level}});
    };
  });

  // classify
  auto* classify = app.add_subcommand("classify", "Reliability band of an ICC");
  classify->add_option("--r", p.r, "ICC")->required();
  add_output(classify, out);
  classify->callback([&] { action = [&] { return call("/single/classify", {{"r", p.r}}); }; });

  // estimate
  auto* estimate = app.add_subcommand("estimate", "One-way ICC from a wide-format data file");
  estimate->add_option("--data", p.data, "CSV: subject,m1,...,mk")->required();
  estimate->add_option("--level", p.level)->capture_default_str();
  add_output(estimate, out);
  estimate->callback([&] {
    action = [&] {
      const auto table = icc::io::parse_wide(read_file(p.data));
      const auto e = icc::estimate_icc(table);
      json result{{"estimate", icc::report::to_json(e)},
                  {"classification", icc::report::to_json(icc::classify_reliability(e.r))}};
      std::vector<std::string> warnings;
      if (e.negative())
        warnings.push_back("negative ICC (MSW > MSB) kept as-is");
      try {
        result["interval"] = icc::report::to_json(icc::ci_single(e.r, e.design, p.level));
      } catch (const icc::DomainError& err) {
        warnings.push_back(std::string("no confidence interval: ") + err.what());
      }
      return icc::report::envelope("estimate", {{"data", p.data}, {"level", p.level}}, result,
                                   warnings);
    };
  });

  // compare
  auto* cmp = app.add_subcommand("compare", "Test and interval for the difference of two ICCs");
  cmp->add_option("--r1", p.r1, "First ICC");
  cmp->add_option("--r2", p.r2, "Second ICC");
  cmp->add_option("--n", p.n, "Number of subjects N");
  cmp->add_option("--k", p.k, "Measurements per subject k");
  cmp->add_option("--r12", p.r12, "Interclass correlation (dependent only)");
  cmp->add_option("--data1", p.data1, "Wide CSV for instrument 1 (estimates r1, r12, N, k)");
  cmp->add_option("--data2", p.data2, "Wide CSV for instrument 2")->needs("--data1");
  cmp->get_option("--data1")->needs("--data2");
  dependence_flags(cmp);
  cmp->add_option("--alpha", p.alpha)->capture_default_str();
  cmp->add_option("--level", p.level)->capture_default_str();
  cmp->add_option("--tail", p.tail, "two-sided | greater | less")->default_str("two-sided");
  add_output(cmp, out);
  cmp->callback([&, cmp] {
    action = [&, cmp] {
      json body{{"alpha", p.alpha}, {"level", p.level},
                {"tail", p.tail.empty() ? "two-sided" : p.tail},
                {"dependent", !p.independent}};
      if (!p.data1.empty()) {
        const auto t1 = icc::io::parse_wide(read_file(p.data1));
        const auto t2 = icc::io::parse_wide(read_file(p.data2));
        const auto e1 = icc::estimate_icc(t1);
        const auto e2 = icc::estimate_icc(t2);
        if (e1.design != e2.design)
          throw icc::DataError("unequal-design", "both files must have the same N and k");
        body["r1"] = e1.r;
        body["r2"] = e2.r;
        body["n"] = e1.design.n_subjects();
        body["k"] = e1.design.k_measurements();
        if (!p.independent)
          body["r12"] = cmp->count("--r12") ? p.r12 : icc::estimate_r12(t1, t2);
      } else {
        std::vector<icc::api::FieldError> missing;
        for (const char* o : {"--r1", "--r2", "--n", "--k"})
          if (cmp->count(o) == 0)
            missing.push_back({o, "required (or give --data1/--data2)"});
        if (!missing.empty())
          throw icc::api::ValidationError(missing);
        body["r1"] = p.r1;
        body["r2"] = p.r2;
        body["n"] = p.n;
        body["k"] = p.k;
        if (cmp->count("--r12"))
          body["r12"] = p.r12;
      }
      return call("/diff/test", body);
    };
  });

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "p-value and CI across assumed r12 values");
  sens->add_option("--r1", p.r1)->required();
  sens->add_option("--r2", p.r2)->required();
  design_opts(sens);
  sens->add_option("--grid", p.grid, "Explicit r12 values")->delimiter(',');
  sens->add_option("--from", p.from)->capture_default_str();
  sens->add_option("--to", p.to)->capture_default_str();
  sens->add_option("--step", p.step)->capture_default_str();
  sens->add_option("--alpha", p.alpha)->capture_default_str();
  sens->add_option("--level", p.level)->capture_default_str();
  add_output(sens, out);
  sens->callback([&] {
    action = [&] {
      std::vector<double> grid = p.grid;
      if (grid.empty()) {
        if (!(p.step > 0.0))
          throw usage_error("--step", "must be positive");
        for (int i = 0;; ++i) {
          const double g = p.from + i * p.step;
          if (g > p.to + 1e-12)
            break;
          grid.push_back(std::round(g * 1e12) / 1e12);
        }
      }
      return call("/diff/sensitivity", {{"r1", p.r1}, {"r2", p.r2}, {"n", p.n}, {"k", p.k},
                                        {"level", p.level}, {"alpha", p.alpha}, {"grid", grid}});
    };
  });

  // samplesize-single
  auto* ss_single = app.add_subcommand("samplesize-single", "Sample size for a single-ICC test");
  ss_single->add_option("--rho1", p.rho1, "Anticipated ICC")->required();
  ss_single->add_option("--rho0", p.rho0, "ICC under H0")->required();
  ss_single->add_option("--k", p.k)->required();
  ss_single->add_option("--alpha", p.alpha)->capture_default_str();
  ss_single->add_option("--power", p.power)->capture_default_str();
  ss_single->add_option("--sides", p.sides, "one | two")->capture_default_str();
  add_output(ss_single, out);
  ss_single->callback([&] {
    action = [&] {
      return call("/power/single", {{"rho1", p.rho1}, {"rho0", p.rho0}, {"k", p.k},
                                    {"alpha", p.alpha}, {"power", p.power}, {"sides", p.sides}});
    };
  });

  auto diff_spec_opts = [&](CLI::App* c) {
    c->add_option("--rho1", p.rho1)->required();
    c->add_option("--rho2", p.rho2)->required();
    c->add_option("--rho12", p.rho12)->capture_default_str();
    c->add_option("--k", p.k)->required();
    c->add_option("--alpha", p.alpha)->capture_default_str();
    c->add_option("--power", p.power)->capture_default_str();
    c->add_option("--sides", p.sides, "one | two")->capture_default_str();
    dependence_flags(c);
  };
  auto diff_spec_body = [&] {
    json b{{"rho1", p.rho1}, {"rho2", p.rho2}, {"k", p.k}, {"alpha", p.alpha},
           {"power", p.power}, {"sides", p.sides}, {"dependent", !p.independent}};
    if (!p.independent || p.rho12 != 0.0)
      b["rho12"] = p.rho12;
    return b;
  };

  auto* ss_diff = app.add_subcommand("samplesize-diff", "Sample size to detect an ICC difference");
  diff_spec_opts(ss_diff);
  add_output(ss_diff, out);
  ss_diff->callback([&] { action = [&] { return call("/power/diff", diff_spec_body()); }; });

  auto* pw = app.add_subcommand("power-at", "Power of a difference design at a given N");
  diff_spec_opts(pw);
  pw->add_option("--n", p.n)->required();
  add_output(pw, out);
  pw->callback([&] {
    action = [&] {
      auto b = diff_spec_body();
      b["n"] = p.n;
      return call("/power/at", b);
    };
  });

  auto bootstrap_opts = [&](CLI::App* c) {
    c->add_option("--replicates", p.replicates)->capture_default_str();
    c->add_option("--seed", p.seed)->capture_default_str();
    c->add_option("--level", p.level)->capture_default_str();
    c->add_option("--workers", p.workers, "Threads for replicates")->capture_default_str();
    c->add_flag("--include-replicates", p.include_replicates, "Emit every replicate value");
    c->add_option("--mapping", p.mapping, "Sidecar CSV unit,group (1/2 or A/B)");
  };
  auto bootstrap_config = [&] {
    icc::BootstrapConfig cfg;
    cfg.replicates = p.replicates;
    cfg.seed = p.seed;
    cfg.level = p.level;
    cfg.workers = std::max(1u, p.workers);
    return cfg;
  };
  auto bootstrap_inputs = [&](json extra) {
    extra["replicates"] = p.replicates;
    extra["seed"] = p.seed;
    extra["level"] = p.level;
    return extra;
  };
  auto mapping_from = [&](const std::string& first, const std::string& second,
                          const char* first_flag, const char* second_flag) {
    if (!p.mapping.empty())
      return icc::io::parse_unit_mapping(read_file(p.mapping));
    if (first.empty() || second.empty())
      throw usage_error(std::string(first_flag) + "/" + second_flag,
                        "required unless --mapping is given");
    return icc::io::UnitMapping{split_list(first), split_list(second)};
  };

  auto* bdiff = app.add_subcommand("bootstrap-diff",
                                   "Subject-level bootstrap CI for a dependent ICC difference");
  bdiff->add_option("--data", p.data, "Long CSV: subject,unit,session,value");
  bdiff->add_option("--unit1", p.unit1, "Unit label of instrument 1");
  bdiff->add_option("--unit2", p.unit2, "Unit label of instrument 2");
  bdiff->add_option("--data1", p.data1, "Wide CSV for instrument 1");
  bdiff->add_option("--data2", p.data2, "Wide CSV for instrument 2");
  bootstrap_opts(bdiff);
  add_output(bdiff, out);
  bdiff->callback([&] {
    action = [&] {
      std::optional<icc::PairedMeasurements> data;
      json inputs;
      if (!p.data.empty()) {
        const auto t = icc::io::parse_long(read_file(p.data));
        data = icc::io::paired_from_long(t, mapping_from(p.unit1, p.unit2, "--unit1", "--unit2"));
        inputs = {{"data", p.data}};
      } else if (!p.data1.empty() && !p.data2.empty()) {
        data = icc::PairedMeasurements::from_tables(icc::io::parse_wide(read_file(p.data1)),
                                                    icc::io::parse_wide(read_file(p.data2)));
        inputs = {{"data1", p.data1}, {"data2", p.data2}};
      } else {
        throw usage_error("--data", "give --data or both --data1 and --data2");
      }
      const auto res = icc::bootstrap_dependent_difference(*data, bootstrap_config());
      return icc::report::envelope("bootstrap/diff", bootstrap_inputs(inputs),
                                   icc::report::to_json(res, p.include_replicates), res.warnings);
    };
  });

  auto* bregions = app.add_subcommand("bootstrap-regions",
                                      "Subject-level bootstrap CI for a region-group ICC contrast");
  bregions->add_option("--data", p.data, "Long CSV: subject,unit,session,value")->required();
  bregions->add_option("--group-a", p.group_a, "Comma-separated region labels");
  bregions->add_option("--group-b", p.group_b, "Comma-separated region labels");
  bootstrap_opts(bregions);
  add_output(bregions, out);
  bregions->callback([&] {
    action = [&] {
      const auto t = icc::io::parse_long(read_file(p.data));
      const auto panel = icc::io::regions_from_long(
          t, mapping_from(p.group_a, p.group_b, "--group-a", "--group-b"));
      const auto res = icc::bootstrap_region_groups(panel, bootstrap_config());
      return icc::report::envelope("bootstrap/regions", bootstrap_inputs({{"data", p.data}}),
                                   icc::report::to_json(res, p.include_replicates), res.warnings);
    };
  });

  auto* aud = app.add_subcommand("audit", "Re-evaluate a batch of published ICC claims");
  aud->add_option("--claims", p.claims, "Claims CSV")->required();
  aud->add_option("--alpha", p.alpha)->capture_default_str();
  aud->add_option("--level", p.level)->capture_default_str();
  add_output(aud, out);
  aud->callback([&] {
    action = [&] {
      const auto batch = icc::io::parse_claims(read_file(p.claims));
      const auto rep = icc::audit::run_audit(batch, p.alpha, p.level);
      return icc::report::envelope("audit",
                                   {{"claims", p.claims}, {"alpha", p.alpha}, {"level", p.level}},
                                   icc::report::to_json(rep), batch.warnings);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    emit(action(), out);
  } catch (const icc::api::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const icc::Error& e) {
    std::cerr << "error [" << e.id() << "]: " << e.what() << "\n";
    return exit_domain;
  }
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
