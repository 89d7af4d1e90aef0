#include "icc/audit.hpp"

#include <gtest/gtest.h>

namespace {

using namespace icc;
using audit::Verdict;

// Synthetic claims whose expected verdicts follow from the test and interval
// values checked elsewhere: the dependent comparison at N=28, k=2 gives
// p = 0.036 for (0.95, 0.85) and p = 0.47 for (0.75, 0.65); the single-ICC
// test of 0.85 against 0.75 gives p = 0.072; 0.2 against 0.5 at N=40 gives
// p = 0.016 in the lower tail.
const char* kFixture =
    "id,kind,r,r1,r2,n,k,rho0,tail,r12,conclusion\n"
    "d-sig,difference,,0.95,0.85,28,2,,,0,r1>r2\n"
    "d-ns,difference,,0.75,0.65,28,2,,,0,r1>r2\n"
    "d-null,difference,,0.75,0.65,28,2,,,,no-difference\n"
    "d-wrongway,difference,,0.95,0.85,28,2,,,,r1<r2\n"
    "s-weak,single,0.85,,,28,2,0.75,,,above\n"
    "s-strong,single,0.95,,,28,2,0.75,,,above\n"
    "s-band,single,0.95,,,28,2,,,,excellent\n"
    "s-poor,single,0.2,,,40,2,,,,poor\n"
    "s-noref,single,0.6,,,30,2,,,,above\n"
    "s-odd,single,0.6,,,30,2,,,,fine\n"
    "bad,single,1.5,,,30,2,,,,good\n";

TEST(Audit, SyntheticFixtureVerdicts) {
  const auto rep = audit::run_audit(io::parse_claims(kFixture));
  ASSERT_EQ(rep.evaluations.size(), 10u);
  ASSERT_EQ(rep.rejects.size(), 1u);
  EXPECT_EQ(rep.rejects[0].line, 12u);

  auto verdict = [&](const std::string& id) {
    for (const auto& e : rep.evaluations)
      if (e.claim.id == id)
        return e.verdict;
    ADD_FAILURE() << id;
    return Verdict::unassessed;
  };
  EXPECT_EQ(verdict("d-sig"), Verdict::consistent);
  EXPECT_EQ(verdict("d-ns"), Verdict::inconsistent);
  EXPECT_EQ(verdict("d-null"), Verdict::consistent);
  EXPECT_EQ(verdict("d-wrongway"), Verdict::inconsistent);
  EXPECT_EQ(verdict("s-weak"), Verdict::inconsistent);
  EXPECT_EQ(verdict("s-strong"), Verdict::consistent);
  // 0.95 against the 0.9 floor: statistic 1.85, p = 0.032.
  EXPECT_EQ(verdict("s-band"), Verdict::consistent);
  EXPECT_EQ(verdict("s-poor"), Verdict::consistent);
  EXPECT_EQ(verdict("s-noref"), Verdict::unassessed);
  EXPECT_EQ(verdict("s-odd"), Verdict::unassessed);

  EXPECT_EQ(rep.summary.recalculated, 8);
}

TEST(Audit, DifferenceClaimUsesGoldenValues) {
  const auto rep = audit::run_audit(io::parse_claims(kFixture));
  const auto& e = rep.evaluations[0];
  EXPECT_NEAR(e.test.p_value, 0.03614277, 1e-7);
  EXPECT_NEAR(e.interval.lower, 0.00586426, 1e-7);
  EXPECT_NEAR(e.interval.upper, 0.24824278, 1e-7);
  EXPECT_TRUE(rep.evaluations[2].note.find("r12") != std::string::npos);
}

TEST(Audit, SingleBandClaimAgainstFloor) {
  const auto rep = audit::run_audit(io::parse_claims(kFixture));
  const auto& e = rep.evaluations[6];
  ASSERT_TRUE(e.reference);
  EXPECT_EQ(*e.reference, 0.9);
  const auto t = test_single(0.95, Design(28, 2), 0.9, 0.05, Tail::greater);
  EXPECT_DOUBLE_EQ(e.test.p_value, t.p_value);
  EXPECT_EQ(e.verdict, t.reject ? Verdict::consistent : Verdict::inconsistent);
}

TEST(Audit, ConsistencyRate) {
  const auto rep = audit::run_audit(io::parse_claims(
      "kind,r1,r2,n,k,conclusion\ndifference,0.95,0.85,28,2,r1>r2\ndifference,0.75,0.65,28,2,r1>r2\n"));
  EXPECT_EQ(rep.summary.recalculated, 2);
  EXPECT_EQ(rep.summary.consistent, 1);
  EXPECT_DOUBLE_EQ(rep.summary.consistent_rate, 0.5);
}

} // namespace
