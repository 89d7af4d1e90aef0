#ifndef ICC_DIFFERENCE_HPP
#define ICC_DIFFERENCE_HPP

// Comparison of two ICCs measured with the same number of sessions k, either
// on one cohort (dependent: the two instruments share subjects, linked by the
// interclass correlation r12) or on two equally sized cohorts (independent).

#include "icc/core_stats.hpp"
#include "icc/error.hpp"
#include "icc/single.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icc {

enum class Dependence { dependent, independent };

inline std::string_view to_string(Dependence d) {
  return d == Dependence::dependent ? "dependent" : "independent";
}

class ComparisonDesign {
public:
  static ComparisonDesign dependent(double r1, double r2, Design design, double r12) {
    if (!(r12 >= -1.0 && r12 <= 1.0))
      throw DomainError("invalid-r12", "interclass correlation must lie in [-1, 1]");
    return ComparisonDesign(r1, r2, design, Dependence::dependent, r12);
  }

  static ComparisonDesign independent(double r1, double r2, Design design) {
    return ComparisonDesign(r1, r2, design, Dependence::independent, 0.0);
  }

  double r1() const noexcept { return r1_; }
  double r2() const noexcept { return r2_; }
  const Design& design() const noexcept { return design_; }
  Dependence dependence() const noexcept { return dependence_; }
  double r12() const noexcept { return r12_; }

  /// Same comparison with a different interclass correlation.
  ComparisonDesign with_r12(double r12) const { return dependent(r1_, r2_, design_, r12); }

private:
  ComparisonDesign(double r1, double r2, Design design, Dependence dep, double r12)
      : r1_(r1), r2_(r2), design_(design), dependence_(dep), r12_(r12) {
    require_fisher_domain(r1_, design_.k_measurements());
    require_fisher_domain(r2_, design_.k_measurements());
  }

  double r1_;
  double r2_;
  Design design_;
  Dependence dependence_;
  double r12_;
};

struct DifferenceResult {
  double theta_hat = 0.0; ///< r1 - r2
  TestResult test;
  IntervalEstimate interval;
};

/// cov(Z_r1, Z_r2) = k^2 r12^2 / (2N {1+(k-1)r1}{1+(k-1)r2}), with sample
/// values plugged in for the population ones.
inline double cov_z(const ComparisonDesign& c) {
  if (c.dependence() != Dependence::dependent)
    throw DomainError("not-dependent", "covariance is only defined for dependent comparisons");
  const double k = c.design().k_measurements();
  const double n = c.design().n_subjects();
  return k * k * c.r12() * c.r12() /
         (2.0 * n * (1.0 + (k - 1.0) * c.r1()) * (1.0 + (k - 1.0) * c.r2()));
}

/// Estimated variance of Z_r1 - Z_r2.
inline double variance_difference(const ComparisonDesign& c) {
  const double v = var_single(c.design());
  double var = v + v;
  if (c.dependence() == Dependence::dependent)
    var -= 2.0 * cov_z(c);
  if (!(var > 0.0))
    throw DomainError("nonpositive-variance",
                      "estimated variance of the z difference is not positive; r12 is "
                      "inconsistent with r1, r2 and the design");
  return var;
}

/// Wald test of H0: rho1 = rho2.
inline TestResult test_difference(const ComparisonDesign& c, double alpha,
                                  Tail tails = Tail::two_sided) {
  detail::require_alpha(alpha);
  const int k = c.design().k_measurements();
  const double dz = fisher_z_icc(c.r1(), k).z - fisher_z_icc(c.r2(), k).z;
  return detail::make_test_result(dz / std::sqrt(variance_difference(c)), alpha, tails);
}

/// corr(r1, r2) = k(k-1) r12^2 / ([1+(k-1)r1][1+(k-1)r2]); zero when independent.
inline double corr_r1_r2(const ComparisonDesign& c) {
  if (c.dependence() == Dependence::independent)
    return 0.0;
  const double k = c.design().k_measurements();
  return k * (k - 1.0) * c.r12() * c.r12() /
         ((1.0 + (k - 1.0) * c.r1()) * (1.0 + (k - 1.0) * c.r2()));
}

/// Confidence interval for rho1 - rho2 assembled from the two single-ICC
/// intervals (l1, u1), (l2, u2) at the same level.
inline IntervalEstimate ci_difference(const ComparisonDesign& c, double level) {
  const auto ci1 = ci_single(c.r1(), c.design(), level);
  const auto ci2 = ci_single(c.r2(), c.design(), level);
  const double corr = corr_r1_r2(c);
  const double r1 = c.r1();
  const double r2 = c.r2();

  const double a_lo = r1 - ci1.lower;
  const double b_lo = ci2.upper - r2;
  const double a_hi = ci1.upper - r1;
  const double b_hi = r2 - ci2.lower;
  const double rad_lo = a_lo * a_lo - 2.0 * corr * a_lo * b_lo + b_lo * b_lo;
  const double rad_hi = a_hi * a_hi - 2.0 * corr * a_hi * b_hi + b_hi * b_hi;
  if (rad_lo < 0.0 || rad_hi < 0.0)
    throw DomainError("inconsistent-input",
                      "difference interval radicand is negative; corr(r1, r2) exceeds 1 for "
                      "the supplied r12");
  const double theta = r1 - r2;
  return {theta - std::sqrt(rad_lo), theta + std::sqrt(rad_hi), level};
}

inline DifferenceResult compare(const ComparisonDesign& c, double alpha, Tail tails,
                                double level) {
  return {c.r1() - c.r2(), test_difference(c, alpha, tails), ci_difference(c, level)};
}

/// Interclass correlation between two instruments: Pearson r over all
/// N*k*k within-subject cross pairs (every instrument-1 value of a subject
/// paired with every instrument-2 value of the same subject).
inline double estimate_r12(const MeasurementTable& first, const MeasurementTable& second) {
  if (first.n_subjects() != second.n_subjects())
    throw DataError("subject-mismatch", "both instruments must cover the same subjects");
  if (first.subjects() != second.subjects())
    throw DataError("subject-mismatch", "subject identifiers differ or are not aligned");
  if (first.k_measurements() != second.k_measurements())
    throw DataError("unequal-k", "both instruments must have the same number of sessions");

  const auto n = static_cast<std::size_t>(first.n_subjects());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Each value of one instrument enters once per value of the other.
    for (double x : first.row(i))
      mx += x * second.k_measurements();
    for (double y : second.row(i))
      my += y * first.k_measurements();
  }
  const double pairs = static_cast<double>(n) * first.k_measurements() * second.k_measurements();
  mx /= pairs;
  my /= pairs;

  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (double x : first.row(i))
      for (double y : second.row(i)) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
      }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw DataError("degenerate-data", "an instrument has zero variance across the pair set");
  return sxy / std::sqrt(sxx * syy);
}

struct SensitivityPoint {
  double r12 = 0.0;
  bool valid = true;
  std::string invalid_reason; ///< error id when !valid
  double statistic = 0.0;
  double p_value = 1.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Re-evaluates the two-sided test and the difference interval at each r12
/// in `grid`. Points where the plug-in variance or the interval radicand
/// break down are reported invalid instead of clamped.
inline std::vector<SensitivityPoint> sensitivity_curve(const ComparisonDesign& c, double level,
                                                       std::span<const double> grid,
                                                       double alpha = 0.05) {
  detail::require_level(level);
  detail::require_alpha(alpha);
  std::vector<SensitivityPoint> out;
  out.reserve(grid.size());
  for (double g : grid) {
    if (!(g >= 0.0 && g < 1.0))
      throw DomainError("invalid-r12", "sensitivity grid values must lie in [0, 1)");
    SensitivityPoint pt;
    pt.r12 = g;
    try {
      const auto at = c.with_r12(g);
      const auto t = test_difference(at, alpha, Tail::two_sided);
      const auto ci = ci_difference(at, level);
      pt.statistic = t.statistic;
      pt.p_value = t.p_value;
      pt.lower = ci.lower;
      pt.upper = ci.upper;
    } catch (const DomainError& e) {
      pt.valid = false;
      pt.invalid_reason = e.id();
    }
    out.push_back(pt);
  }
  return out;
}

} // namespace icc

#endif // ICC_DIFFERENCE_HPP
