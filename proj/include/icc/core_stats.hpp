#ifndef ICC_CORE_STATS_HPP
#define ICC_CORE_STATS_HPP

// Numerical kernel shared by every inference routine: the Fisher z
// transformation for intraclass correlations, the large-sample variance of
// the transformed value, and standard-normal distribution functions.

#include "icc/error.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace icc {

/// Study design: N subjects each measured k times.
class Design {
public:
  Design(int n_subjects, int k_measurements) : n_(n_subjects), k_(k_measurements) {
    if (k_ < 2)
      throw DomainError("invalid-k", "k must be at least 2 (got " + std::to_string(k_) + ")");
    if (n_ < 3)
      throw DomainError("invalid-n", "N must be at least 3 (got " + std::to_string(n_) + ")");
  }

  int n_subjects() const noexcept { return n_; }
  int k_measurements() const noexcept { return k_; }

  friend bool operator==(const Design&, const Design&) = default;

private:
  int n_;
  int k_;
};

/// A value on the Fisher z scale, tagged with the k it was transformed under.
struct ZScore {
  double z = 0.0;
  int k = 2;
};

namespace detail {

inline void require_k(int k) {
  if (k < 2)
    throw DomainError("invalid-k", "k must be at least 2 (got " + std::to_string(k) + ")");
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace detail

/// Throws unless -1/(k-1) < r < 1, the open interval on which the Fisher
/// transform is finite.
inline void require_fisher_domain(double r, int k) {
  detail::require_k(k);
  if (!std::isfinite(r))
    throw DomainError("non-finite", "ICC must be finite");
  const double lower = -1.0 / (k - 1);
  if (r == 1.0 || r == lower)
    throw DomainError("icc-at-boundary", "ICC " + detail::fmt_double(r) +
                                             " lies on the boundary of the valid range for k=" +
                                             std::to_string(k));
  if (r > 1.0 || 1.0 + (k - 1) * r <= 0.0)
    throw DomainError("icc-out-of-range", "ICC " + detail::fmt_double(r) +
                                              " outside (" + detail::fmt_double(lower) +
                                              ", 1) for k=" + std::to_string(k));
}

/// Fisher z for an ICC: 0.5 * ln[(1 + (k-1) r) / (1 - r)].
inline ZScore fisher_z_icc(double r, int k) {
  require_fisher_domain(r, k);
  // (1 + (k-1) r) / (1 - r) = 1 + k r / (1 - r); log1p keeps precision near 0.
  return {0.5 * std::log1p(k * r / (1.0 - r)), k};
}

/// Inverse of fisher_z_icc: (e^{2z} - 1) / (e^{2z} + k - 1).
inline double inverse_fisher_z_icc(ZScore zs) {
  detail::require_k(zs.k);
  if (!std::isfinite(zs.z))
    throw DomainError("non-finite", "z must be finite");
  // For large z e^{2z} overflows; rewrite in terms of e^{-2z} - 1 there.
  if (zs.z > 0.0) {
    const double e = std::expm1(-2.0 * zs.z);
    return -e / (zs.k + (zs.k - 1) * e);
  }
  const double e = std::expm1(2.0 * zs.z);
  return e / (e + zs.k);
}

inline double inverse_fisher_z_icc(double z, int k) { return inverse_fisher_z_icc(ZScore{z, k}); }

/// Large-sample variance of Z_r: 1/(N - 3/2) for k = 2,
/// k / (2 (k-1) (N-2)) otherwise.
inline double var_single(const Design& design) {
  const double n = design.n_subjects();
  const int k = design.k_measurements();
  if (k == 2)
    return 1.0 / (n - 1.5);
  return k / (2.0 * (k - 1) * (n - 2.0));
}

/// Standard normal CDF. Evaluated through the C library's erfc, which is
/// accurate to a few ulp over the whole real line and keeps full relative
/// precision in the lower tail.
inline double normal_cdf(double x) {
  if (std::isnan(x))
    throw DomainError("non-finite", "normal_cdf argument is NaN");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Upper-tail probability 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return normal_cdf(-x); }

/// Standard normal quantile.
///
/// Starts from Acklam's rational approximation (relative error below
/// 1.15e-9) and applies one Halley correction against normal_cdf, which
/// brings the result to within a few ulp of the true quantile.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("invalid-probability", "probability must lie in (0, 1)");

  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step. In the upper tail work with the survival function so the
  // residual is not swamped by rounding of values near 1.
  const double e = p > 0.5 ? (1.0 - p) - normal_sf(x) : normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

} // namespace icc

#endif // ICC_CORE_STATS_HPP
