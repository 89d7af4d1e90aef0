#ifndef ICC_POWER_HPP
#define ICC_POWER_HPP

// Sample-size planning on the Fisher z scale.

#include "icc/core_stats.hpp"
#include "icc/difference.hpp"
#include "icc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

namespace icc {

enum class Sides { one, two };

inline std::string_view to_string(Sides s) { return s == Sides::one ? "one" : "two"; }

inline Sides parse_sides(std::string_view s) {
  if (s == "one" || s == "one-sided" || s == "1") return Sides::one;
  if (s == "two" || s == "two-sided" || s == "2") return Sides::two;
  throw DomainError("invalid-sides", "sides must be 'one' or 'two'");
}

/// Design targets for detecting rho1 != rho2.
struct DifferencePowerSpec {
  double alpha = 0.05;
  double power = 0.8;
  Sides sides = Sides::two;
  int k = 2;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho12 = 0.0; ///< ignored for independent designs
};

/// Design targets for detecting rho1 != rho0 with a single ICC.
struct SinglePowerSpec {
  double alpha = 0.05;
  double power = 0.8;
  Sides sides = Sides::two;
  int k = 2;
  double rho0 = 0.0;
  double rho1 = 0.0;
};

struct SampleSizeResult {
  int n_required = 3;
  double d_z = 0.0;                  ///< |Z_rho1 - Z_rho2| (or vs rho0)
  double variance_coefficient = 0.0; ///< multiplier of (z_beta + z_alpha)^2 / d^2
  double n_exact = 0.0;              ///< right-hand side before ceiling
};

namespace detail {

inline void require_rates(double alpha, double power) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("invalid-alpha", "alpha must lie in (0, 1)");
  if (!(power > 0.0 && power < 1.0))
    throw DomainError("invalid-power", "power must lie in (0, 1)");
}

inline double critical_z(double alpha, Sides sides) {
  return normal_quantile(1.0 - (sides == Sides::two ? alpha / 2.0 : alpha));
}

inline double z_gap(double rho_a, double rho_b, int k) {
  const double d = std::fabs(fisher_z_icc(rho_a, k).z - fisher_z_icc(rho_b, k).z);
  if (!(d > 0.0))
    throw DomainError("equal-iccs", "the two ICCs coincide; no finite sample size detects a "
                                    "zero difference");
  return d;
}

/// k/(k-1) - k^2 rho12^2 / ([1+(k-1)rho1][1+(k-1)rho2]): N times the
/// variance of Z_r1 - Z_r2 once N-2 and N-3/2 are replaced by N.
inline double difference_coefficient(const DifferencePowerSpec& spec, Dependence dep) {
  const double k = spec.k;
  double coef = k / (k - 1.0);
  if (dep == Dependence::dependent) {
    if (!(spec.rho12 >= -1.0 && spec.rho12 <= 1.0))
      throw DomainError("invalid-r12", "interclass correlation must lie in [-1, 1]");
    coef -= k * k * spec.rho12 * spec.rho12 /
            ((1.0 + (k - 1.0) * spec.rho1) * (1.0 + (k - 1.0) * spec.rho2));
  }
  if (!(coef > 0.0))
    throw DomainError("nonpositive-coefficient",
                      "variance coefficient is not positive; rho12 is too large for rho1, rho2");
  return coef;
}

inline int ceil_design(double n) {
  return std::max(3, static_cast<int>(std::ceil(n)));
}

} // namespace detail

/// Minimum N per group (or per cohort, dependent) to detect rho1 != rho2,
/// using the large-N variance in which N-2 and N-3/2 are taken as N.
inline SampleSizeResult sample_size_difference(const DifferencePowerSpec& spec, Dependence dep) {
  detail::require_rates(spec.alpha, spec.power);
  detail::require_k(spec.k);
  const double d = detail::z_gap(spec.rho1, spec.rho2, spec.k);
  const double coef = detail::difference_coefficient(spec, dep);
  const double zsum = normal_quantile(spec.power) + detail::critical_z(spec.alpha, spec.sides);
  const double n = coef * zsum * zsum / (d * d);
  return {detail::ceil_design(n), d, coef, n};
}

/// Minimum N to detect rho1 != rho0 with a single ICC. The variance formula
/// for Z_r is inverted exactly: N = c_k (z_beta + z_alpha)^2 / d^2 + a_k with
/// (c_k, a_k) = (1, 3/2) for k = 2 and (k / (2(k-1)), 2) for k > 2.
inline SampleSizeResult sample_size_single(const SinglePowerSpec& spec) {
  detail::require_rates(spec.alpha, spec.power);
  detail::require_k(spec.k);
  const double d = detail::z_gap(spec.rho1, spec.rho0, spec.k);
  const double k = spec.k;
  const double coef = spec.k == 2 ? 1.0 : k / (2.0 * (k - 1.0));
  const double offset = spec.k == 2 ? 1.5 : 2.0;
  const double zsum = normal_quantile(spec.power) + detail::critical_z(spec.alpha, spec.sides);
  const double n = coef * zsum * zsum / (d * d) + offset;
  return {detail::ceil_design(n), d, coef, n};
}

/// Power achieved at sample size n for a difference design,
/// Phi(d / sqrt(V) - z_crit) with the same large-N variance as
/// sample_size_difference.
inline double power_at(const DifferencePowerSpec& spec, int n, Dependence dep) {
  if (n < 3)
    throw DomainError("invalid-n", "N must be at least 3");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
    throw DomainError("invalid-alpha", "alpha must lie in (0, 1)");
  detail::require_k(spec.k);
  const double d = detail::z_gap(spec.rho1, spec.rho2, spec.k);
  const double coef = detail::difference_coefficient(spec, dep);
  return normal_cdf(d / std::sqrt(coef / n) - detail::critical_z(spec.alpha, spec.sides));
}

} // namespace icc

#endif // ICC_POWER_HPP
