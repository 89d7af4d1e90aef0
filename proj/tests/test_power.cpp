#include "icc/power.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace icc;
using icc::gen::Gen;

DifferencePowerSpec reference_spec(int k, double rho12 = 0.0) {
  DifferencePowerSpec s;
  s.rho1 = 0.8;
  s.rho2 = 0.6;
  s.rho12 = rho12;
  s.k = k;
  return s;
}

TEST(SampleSizeDifference, RetestCountTradeOff) {
  const int n2 = sample_size_difference(reference_spec(2), Dependence::dependent).n_required;
  const int n3 = sample_size_difference(reference_spec(3), Dependence::dependent).n_required;
  const int n4 = sample_size_difference(reference_spec(4), Dependence::dependent).n_required;
  EXPECT_EQ(n2, 96);
  EXPECT_EQ(n3, 64);
  EXPECT_EQ(n4, 54);
  EXPECT_EQ(n2 - n3, 32);
  EXPECT_EQ(n3 - n4, 10);
}

TEST(SampleSizeDifference, ExactValues) {
  EXPECT_NEAR(sample_size_difference(reference_spec(2), Dependence::dependent).n_exact, 95.48402, 1e-4);
  EXPECT_NEAR(sample_size_difference(reference_spec(3), Dependence::dependent).n_exact, 63.64419, 1e-4);
  EXPECT_NEAR(sample_size_difference(reference_spec(4), Dependence::dependent).n_exact, 53.16947, 1e-4);
}

TEST(SampleSizeDifference, CorrelatedInstrumentsNeedFewerSubjects) {
  const auto r = sample_size_difference(reference_spec(2, 0.5), Dependence::dependent);
  EXPECT_NEAR(r.variance_coefficient, 2.0 - 1.0 / 2.88, 1e-12);
  EXPECT_NEAR(r.n_exact, 78.906933, 1e-5);
  EXPECT_EQ(r.n_required, 79);
}

TEST(SampleSizeDifference, IndependentIgnoresRho12) {
  const auto a = sample_size_difference(reference_spec(2, 0.7), Dependence::independent);
  const auto b = sample_size_difference(reference_spec(2, 0.0), Dependence::dependent);
  EXPECT_EQ(a.n_required, b.n_required);
}

TEST(SampleSizeDifference, Errors) {
  auto id_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.id();
    }
    return std::string("none");
  };
  auto eq = reference_spec(2);
  eq.rho2 = 0.8;
  EXPECT_EQ(id_of([&] { sample_size_difference(eq, Dependence::dependent); }), "equal-iccs");
  auto hi = reference_spec(4, 1.0);
  hi.rho1 = 0.1;
  hi.rho2 = 0.05;
  EXPECT_EQ(id_of([&] { sample_size_difference(hi, Dependence::dependent); }), "nonpositive-coefficient");
  auto badp = reference_spec(2);
  badp.power = 1.0;
  EXPECT_EQ(id_of([&] { sample_size_difference(badp, Dependence::dependent); }), "invalid-power");
  auto bada = reference_spec(2);
  bada.alpha = 0.0;
  EXPECT_EQ(id_of([&] { sample_size_difference(bada, Dependence::dependent); }), "invalid-alpha");
  auto badk = reference_spec(1);
  EXPECT_EQ(id_of([&] { sample_size_difference(badk, Dependence::dependent); }), "invalid-k");
}

TEST(SampleSizeSingle, ReferenceValues) {
  SinglePowerSpec s;
  s.rho1 = 0.8;
  s.rho0 = 0.6;
  s.k = 2;
  const auto r2 = sample_size_single(s);
  EXPECT_NEAR(r2.n_exact, 49.24201, 1e-4);
  EXPECT_EQ(r2.n_required, 50);
  s.k = 4;
  const auto r4 = sample_size_single(s);
  EXPECT_NEAR(r4.variance_coefficient, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r4.n_exact, 28.58473, 1e-4);
  EXPECT_EQ(r4.n_required, 29);
  s.k = 2;
  s.rho1 = 0.9;
  EXPECT_LT(sample_size_single(s).n_required, 50);
}

TEST(SampleSizeSingle, OneSidedUsesFullAlpha) {
  SinglePowerSpec s;
  s.rho1 = 0.8;
  s.rho0 = 0.6;
  s.sides = Sides::one;
  const double zsum = normal_quantile(0.8) + normal_quantile(0.95);
  const double d = fisher_z_icc(0.8, 2).z - fisher_z_icc(0.6, 2).z;
  EXPECT_NEAR(sample_size_single(s).n_exact, zsum * zsum / (d * d) + 1.5, 1e-10);
}

TEST(SampleSizeProperty, CeilingIsMinimal) {
  Gen g(41);
  for (int i = 0; i < 2000; ++i) {
    DifferencePowerSpec s;
    s.k = g.integer(2, 8);
    s.rho1 = g.positive_icc();
    s.rho2 = g.positive_icc();
    if (std::fabs(s.rho1 - s.rho2) < 1e-3)
      continue;
    s.alpha = g.uniform(0.001, 0.2);
    s.power = g.uniform(0.5, 0.99);
    s.sides = g.coin() ? Sides::one : Sides::two;
    const auto r = sample_size_difference(s, Dependence::independent);
    ASSERT_GE(r.n_required, 3);
    ASSERT_GE(r.n_required, r.n_exact);
    if (r.n_required > 3) {
      ASSERT_LT(r.n_required - 1, r.n_exact) << "case " << i;
    }
    // The returned N achieves the requested power under the same variance.
    ASSERT_GE(power_at(s, r.n_required, Dependence::independent), s.power - 1e-12);
  }
}

TEST(SampleSizeProperty, NonIncreasingInRetests) {
  Gen g(42);
  for (int i = 0; i < 1000; ++i) {
    DifferencePowerSpec s;
    s.rho1 = g.uniform(0.0, 0.95);
    s.rho2 = g.uniform(0.0, 0.95);
    if (std::fabs(s.rho1 - s.rho2) < 0.01)
      continue;
    int prev = 1 << 30;
    for (int k = 2; k <= 8; ++k) {
      s.k = k;
      const int n = sample_size_difference(s, Dependence::independent).n_required;
      ASSERT_LE(n, prev) << "case " << i << " k=" << k;
      prev = n;
    }
  }
}

TEST(SampleSizeProperty, SingleNonIncreasingInRetests) {
  Gen g(43);
  for (int i = 0; i < 1000; ++i) {
    SinglePowerSpec s;
    s.rho1 = g.uniform(0.0, 0.95);
    s.rho0 = g.uniform(0.0, 0.95);
    if (std::fabs(s.rho1 - s.rho0) < 0.01)
      continue;
    s.k = 2;
    const int n2 = sample_size_single(s).n_required;
    s.k = 3;
    const int n3 = sample_size_single(s).n_required;
    ASSERT_GE(n2 + 1, n3) << "case " << i; // k=2 uses a smaller offset
  }
}

TEST(PowerAt, ReferenceValues) {
  const auto s = reference_spec(2);
  EXPECT_NEAR(power_at(s, 96, Dependence::dependent), 0.8021096, 1e-6);
  EXPECT_NEAR(power_at(s, 95, Dependence::dependent), 0.7980036, 1e-6);
  EXPECT_NEAR(power_at(s, 10, Dependence::dependent), 0.1460980, 1e-6);
  EXPECT_GE(power_at(s, 96, Dependence::dependent), 0.8);
  EXPECT_LT(power_at(s, 95, Dependence::dependent), 0.8);
  EXPECT_THROW(power_at(s, 2, Dependence::dependent), DomainError);
}

TEST(PowerAtProperty, IncreasingInN) {
  Gen g(44);
  for (int i = 0; i < 300; ++i) {
    DifferencePowerSpec s;
    s.k = g.integer(2, 5);
    s.rho1 = g.positive_icc();
    s.rho2 = g.positive_icc();
    if (s.rho1 == s.rho2)
      continue;
    double prev = 0.0;
    for (int n = 3; n < 400; n += 7) {
      const double p = power_at(s, n, Dependence::independent);
      ASSERT_GE(p, prev);
      prev = p;
    }
  }
}

} // namespace
