#include "icc/difference.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using namespace icc;
using icc::gen::Gen;

ComparisonDesign golden(double r1, double r2, double r12 = 0.0) {
  return ComparisonDesign::dependent(r1, r2, Design(28, 2), r12);
}

TEST(CovZ, ReferenceValues) {
  EXPECT_EQ(cov_z(golden(0.8, 0.6)), 0.0);
  const auto c = ComparisonDesign::dependent(0.8, 0.6, Design(50, 2), 0.5);
  EXPECT_NEAR(cov_z(c), 1.0 / 288.0, 1e-15);
  EXPECT_NEAR(cov_z(c), 0.00347, 1e-5);
  EXPECT_DOUBLE_EQ(cov_z(c), cov_z(c.with_r12(-0.5)));
  EXPECT_THROW(cov_z(ComparisonDesign::independent(0.8, 0.6, Design(50, 2))), DomainError);
}

TEST(CompareGolden, SignificantExample) {
  const auto res = compare(golden(0.95, 0.85), 0.05, Tail::two_sided, 0.95);
  EXPECT_NEAR(res.theta_hat, 0.1, 1e-15);
  EXPECT_NEAR(res.test.statistic, 2.0953176, 1e-6);
  EXPECT_NEAR(res.test.p_value, 0.03614277, 1e-7);
  EXPECT_TRUE(res.test.reject);
  EXPECT_NEAR(res.interval.lower, 0.00586426, 1e-7);
  EXPECT_NEAR(res.interval.upper, 0.24824278, 1e-7);
}

TEST(CompareGolden, NonSignificantExample) {
  const auto res = compare(golden(0.75, 0.65), 0.05, Tail::two_sided, 0.95);
  EXPECT_NEAR(res.test.statistic, 0.71948, 1e-5);
  EXPECT_NEAR(res.test.p_value, 0.4718452, 1e-6);
  EXPECT_FALSE(res.test.reject);
  EXPECT_NEAR(res.interval.lower, -0.1766948, 1e-6);
  EXPECT_NEAR(res.interval.upper, 0.4017834, 1e-6);
}

TEST(Compare, EqualIccsGiveNullResult) {
  const auto res = compare(golden(0.7, 0.7), 0.05, Tail::two_sided, 0.95);
  EXPECT_EQ(res.test.statistic, 0.0);
  EXPECT_DOUBLE_EQ(res.test.p_value, 1.0);
  EXPECT_TRUE(res.interval.contains(0.0));
}

TEST(Compare, ValidatesInputs) {
  auto id_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.id();
    }
    return std::string("none");
  };
  EXPECT_EQ(id_of([] { golden(0.9, 0.8, 1.5); }), "invalid-r12");
  EXPECT_EQ(id_of([] { golden(1.0, 0.8); }), "icc-at-boundary");
  EXPECT_EQ(id_of([] { ComparisonDesign::independent(0.9, 1.3, Design(10, 2)); }),
            "icc-out-of-range");
  // k^2 r12^2 large relative to small ICCs drives the plug-in variance negative.
  EXPECT_EQ(id_of([] { test_difference(ComparisonDesign::dependent(0.05, 0.05, Design(10, 4), 1.0), 0.05); }),
            "nonpositive-variance");
}

TEST(CompareProperty, DependentAtZeroMatchesIndependent) {
  Gen g(31);
  for (int i = 0; i < 2000; ++i) {
    const int k = g.integer(2, 6);
    const Design d(g.integer(3, 300), k);
    const double r1 = g.icc(k), r2 = g.icc(k);
    const double level = g.uniform(0.8, 0.99);
    const auto dep = compare(ComparisonDesign::dependent(r1, r2, d, 0.0), 0.05, Tail::two_sided, level);
    const auto ind = compare(ComparisonDesign::independent(r1, r2, d), 0.05, Tail::two_sided, level);
    ASSERT_NEAR(dep.test.statistic, ind.test.statistic, 1e-12) << "case " << i;
    ASSERT_NEAR(dep.test.p_value, ind.test.p_value, 1e-12) << "case " << i;
    ASSERT_NEAR(dep.interval.lower, ind.interval.lower, 1e-12) << "case " << i;
    ASSERT_NEAR(dep.interval.upper, ind.interval.upper, 1e-12) << "case " << i;
  }
}

TEST(CompareProperty, SwappingInstrumentsNegates) {
  Gen g(32);
  for (int i = 0; i < 1000; ++i) {
    const int k = g.integer(2, 5);
    const Design d(g.integer(10, 300), k);
    const double r1 = g.positive_icc(), r2 = g.positive_icc(), r12 = g.uniform(0.0, 0.5);
    const auto ab_design = ComparisonDesign::dependent(r1, r2, d, r12);
    const auto ba_design = ComparisonDesign::dependent(r2, r1, d, r12);
    if (cov_z(ab_design) >= var_single(d)) {
      // Incompatible r12 must be rejected symmetrically.
      ASSERT_THROW(test_difference(ab_design, 0.05), DomainError);
      ASSERT_THROW(test_difference(ba_design, 0.05), DomainError);
      continue;
    }
    const auto ab = compare(ab_design, 0.05, Tail::two_sided, 0.95);
    const auto ba = compare(ba_design, 0.05, Tail::two_sided, 0.95);
    ASSERT_NEAR(ab.test.statistic, -ba.test.statistic, 1e-12);
    ASSERT_NEAR(ab.test.p_value, ba.test.p_value, 1e-12);
    ASSERT_NEAR(ab.interval.lower, -ba.interval.upper, 1e-12);
    ASSERT_NEAR(ab.interval.upper, -ba.interval.lower, 1e-12);
  }
}

TEST(CompareProperty, IntervalBracketsEstimate) {
  Gen g(33);
  for (int i = 0; i < 2000; ++i) {
    const int k = g.integer(2, 5);
    const Design d(g.integer(5, 300), k);
    const double r1 = g.positive_icc(), r2 = g.positive_icc();
    try {
      const auto res = compare(ComparisonDesign::dependent(r1, r2, d, g.uniform(0, 0.9)), 0.05,
                               Tail::two_sided, 0.95);
      ASSERT_LE(res.interval.lower, res.theta_hat);
      ASSERT_LE(res.theta_hat, res.interval.upper);
      ASSERT_GE(res.test.p_value, 0.0);
      ASSERT_LE(res.test.p_value, 1.0);
    } catch (const DomainError&) {
      // Incompatible r12 values are allowed to fail loudly.
    }
  }
}

TEST(CompareProperty, PValueNonIncreasingInR12) {
  Gen g(34);
  for (int i = 0; i < 500; ++i) {
    const int k = g.integer(2, 4);
    const Design d(g.integer(10, 200), k);
    const double r1 = g.uniform(0.3, 0.95), r2 = g.uniform(0.3, 0.95);
    double prev = 2.0;
    for (double r12 = 0.0; r12 < 0.6; r12 += 0.05) {
      const double p = test_difference(ComparisonDesign::dependent(r1, r2, d, r12), 0.05).p_value;
      ASSERT_LE(p, prev + 1e-15) << "case " << i << " r12=" << r12;
      prev = p;
    }
  }
}

TEST(Sensitivity, GridAtZeroMatchesComparison) {
  const std::vector<double> grid{0.0};
  const auto pts = sensitivity_curve(golden(0.95, 0.85), 0.95, grid);
  ASSERT_EQ(pts.size(), 1u);
  const auto ind = compare(ComparisonDesign::independent(0.95, 0.85, Design(28, 2)), 0.05,
                           Tail::two_sided, 0.95);
  EXPECT_DOUBLE_EQ(pts[0].p_value, ind.test.p_value);
  EXPECT_DOUBLE_EQ(pts[0].lower, ind.interval.lower);
  EXPECT_DOUBLE_EQ(pts[0].upper, ind.interval.upper);
}

TEST(Sensitivity, ReferenceGrid) {
  const std::vector<double> grid{0.0, 0.3, 0.6};
  const auto pts = sensitivity_curve(golden(0.95, 0.85), 0.95, grid);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[1].p_value, 0.03182391, 1e-7);
  EXPECT_NEAR(pts[1].lower, 0.0080999, 1e-6);
  EXPECT_NEAR(pts[1].upper, 0.2469439, 1e-6);
  EXPECT_NEAR(pts[2].p_value, 0.01998975, 1e-7);
  EXPECT_NEAR(pts[2].lower, 0.0151595, 1e-6);
  EXPECT_NEAR(pts[2].upper, 0.2429766, 1e-6);
  EXPECT_GE(pts[0].p_value, pts[1].p_value);
  EXPECT_GE(pts[1].p_value, pts[2].p_value);
}

TEST(Sensitivity, EmptyGridAndInvalidPoints) {
  EXPECT_TRUE(sensitivity_curve(golden(0.9, 0.8), 0.95, std::span<const double>{}).empty());
  const std::vector<double> bad{1.0};
  EXPECT_THROW(sensitivity_curve(golden(0.9, 0.8), 0.95, bad), DomainError);
  // Low ICCs with k=4 make large r12 values incompatible.
  const std::vector<double> grid{0.0, 0.95};
  const auto pts =
      sensitivity_curve(ComparisonDesign::dependent(0.05, 0.05, Design(10, 4), 0.0), 0.95, grid);
  EXPECT_TRUE(pts[0].valid);
  EXPECT_FALSE(pts[1].valid);
  EXPECT_FALSE(pts[1].invalid_reason.empty());
}

TEST(EstimateR12, TwelvePairEnumeration) {
  const auto a = MeasurementTable::from_rows({{1, 3}, {4, 4}, {7, 10}});
  const auto b = MeasurementTable::from_rows({{2, 1}, {5, 7}, {6, 9}});
  // All 12 within-subject cross pairs, written out.
  const double xs[12] = {1, 1, 3, 3, 4, 4, 4, 4, 7, 7, 10, 10};
  const double ys[12] = {2, 1, 2, 1, 5, 7, 5, 7, 6, 9, 6, 9};
  double mx = 0, my = 0;
  for (int i = 0; i < 12; ++i) {
    mx += xs[i] / 12;
    my += ys[i] / 12;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 12; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  EXPECT_NEAR(estimate_r12(a, b), sxy / std::sqrt(sxx * syy), 1e-14);
}

TEST(EstimateR12, ConstantWithinSubjectCopiesGiveOne) {
  const auto a = MeasurementTable::from_rows({{1, 1}, {3, 3}, {8, 8}, {2, 2}});
  EXPECT_NEAR(estimate_r12(a, a), 1.0, 1e-14);
}

TEST(EstimateR12, IndependentNoiseIsNearZero) {
  Gen g(35);
  std::vector<std::vector<double>> x, y;
  for (int i = 0; i < 500; ++i) {
    x.push_back({g.normal(), g.normal()});
    y.push_back({g.normal(), g.normal()});
  }
  EXPECT_LT(std::fabs(estimate_r12(MeasurementTable::from_rows(x), MeasurementTable::from_rows(y))), 0.1);
}

TEST(EstimateR12, RejectsMismatchedTables) {
  const auto a = MeasurementTable::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const auto b = MeasurementTable::from_rows({{1, 2, 3}, {3, 4, 5}, {5, 6, 7}});
  const auto c = MeasurementTable::from_rows({{1, 2}, {3, 4}});
  try {
    estimate_r12(a, b);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.id(), "unequal-k");
  }
  try {
    estimate_r12(a, c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.id(), "subject-mismatch");
  }
}

} // namespace
