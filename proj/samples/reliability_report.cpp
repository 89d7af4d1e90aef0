// Reliability report for two instruments measured on the same subjects.
//
//   reliability_report [instrument_a.csv instrument_b.csv]
//
// Estimates each ICC, classifies it, then compares the two ICCs with the
// correlated-samples test using the r12 observed in the data.

#include "icc/icc.hpp"
#include "icc/ingest.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw icc::DataError("unreadable-file", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void describe(const char* name, const icc::IccEstimate& e) {
  const auto ci = icc::ci_single(e.r, e.design, 0.95);
  const auto band = icc::classify_reliability(e.r);
  std::printf("%s: ICC %.3f, 95%% CI [%.3f, %.3f], %s\n", name, e.r, ci.lower, ci.upper,
              std::string(icc::to_string(band.band)).c_str());
}

} // namespace

int main(int argc, char** argv) {
  const std::string dir = ICC_SAMPLE_DATA_DIR;
  const std::string path_a = argc > 2 ? argv[1] : dir + "/instrument_a.csv";
  const std::string path_b = argc > 2 ? argv[2] : dir + "/instrument_b.csv";

  try {
    const auto a = icc::io::parse_wide(slurp(path_a));
    const auto b = icc::io::parse_wide(slurp(path_b));
    const auto ea = icc::estimate_icc(a);
    const auto eb = icc::estimate_icc(b);
    describe("instrument A", ea);
    describe("instrument B", eb);

    const double r12 = icc::estimate_r12(a, b);
    const auto cmp = icc::ComparisonDesign::dependent(ea.r, eb.r, ea.design, r12);
    const auto res = icc::compare(cmp, 0.05, icc::Tail::two_sided, 0.95);
    std::printf("difference %.3f (r12 %.3f): z %.3f, p %.4f, 95%% CI [%.3f, %.3f]\n",
                res.theta_hat, r12, res.test.statistic, res.test.p_value, res.interval.lower,
                res.interval.upper);
    std::printf("%s\n", res.test.reject ? "the instruments differ in reliability"
                                        : "no evidence that reliability differs");
  } catch (const icc::Error& e) {
    std::cerr << "error [" << e.id() << "]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
