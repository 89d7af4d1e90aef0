#ifndef ICC_SINGLE_HPP
#define ICC_SINGLE_HPP

#include "icc/core_stats.hpp"
#include "icc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace icc {

/// Complete N x k grid of repeated measurements, one row per subject.
class MeasurementTable {
public:
  /// `values` is row-major, N * k entries. Session labels default to m1..mk.
  MeasurementTable(std::vector<std::string> subjects, std::vector<double> values, int k,
                   std::vector<std::string> sessions = {})
      : subjects_(std::move(subjects)), sessions_(std::move(sessions)), values_(std::move(values)),
        k_(k) {
    if (k_ < 2)
      throw DomainError("invalid-k", "a measurement table needs at least 2 sessions");
    if (subjects_.size() < 2)
      throw DataError("too-few-subjects", "a measurement table needs at least 2 subjects");
    if (values_.size() != subjects_.size() * static_cast<std::size_t>(k_))
      throw DataError("ragged-table", "every subject must have exactly k measurements");
    for (double v : values_)
      if (!std::isfinite(v))
        throw DataError("non-finite", "measurements must be finite");
    if (sessions_.empty())
      for (int j = 0; j < k_; ++j)
        sessions_.push_back("m" + std::to_string(j + 1));
    if (sessions_.size() != static_cast<std::size_t>(k_))
      throw DataError("ragged-table", "session label count does not match k");
  }

  /// Convenience constructor from nested rows; subjects are labelled s1..sN.
  static MeasurementTable from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty())
      throw DataError("too-few-subjects", "a measurement table needs at least 2 subjects");
    const std::size_t k = rows.front().size();
    std::vector<std::string> ids;
    std::vector<double> values;
    values.reserve(rows.size() * k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != k)
        throw DataError("ragged-table", "row " + std::to_string(i + 1) + " has " +
                                            std::to_string(rows[i].size()) +
                                            " measurements, expected " + std::to_string(k));
      ids.push_back("s" + std::to_string(i + 1));
      values.insert(values.end(), rows[i].begin(), rows[i].end());
    }
    return MeasurementTable(std::move(ids), std::move(values), static_cast<int>(k));
  }

  int n_subjects() const noexcept { return static_cast<int>(subjects_.size()); }
  int k_measurements() const noexcept { return k_; }

  double at(std::size_t subject, std::size_t session) const {
    return values_[subject * static_cast<std::size_t>(k_) + session];
  }
  std::span<const double> row(std::size_t subject) const {
    return {values_.data() + subject * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }

  const std::vector<std::string>& subjects() const noexcept { return subjects_; }
  const std::vector<std::string>& sessions() const noexcept { return sessions_; }
  std::span<const double> values() const noexcept { return values_; }

private:
  std::vector<std::string> subjects_;
  std::vector<std::string> sessions_;
  std::vector<double> values_;
  int k_;
};

struct VarianceComponents {
  double msb = 0.0;
  double msw = 0.0;
  double sigma2_b = 0.0; ///< max(0, (MSB - MSW) / k)
  double sigma2_w = 0.0; ///< MSW
};

struct IccEstimate {
  double r = 0.0;
  Design design;
  std::optional<VarianceComponents> components;

  /// Negative sample ICCs are kept as-is; this flags them for reporting.
  bool negative() const noexcept { return r < 0.0; }
};

enum class Tail { greater, less, two_sided };

inline std::string_view to_string(Tail t) {
  switch (t) {
  case Tail::greater: return "greater";
  case Tail::less: return "less";
  case Tail::two_sided: return "two-sided";
  }
  return "two-sided";
}

inline Tail parse_tail(std::string_view s) {
  if (s == "greater" || s == "one-sided-greater") return Tail::greater;
  if (s == "less" || s == "one-sided-less") return Tail::less;
  if (s == "two-sided" || s == "two_sided" || s == "two") return Tail::two_sided;
  throw DomainError("invalid-tail", "unknown tail convention '" + std::string(s) + "'");
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  Tail tails = Tail::two_sided;
  bool reject = false;
};

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

namespace detail {

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw DomainError("invalid-alpha", "alpha must lie in (0, 0.5]");
}

inline void require_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("invalid-level", "confidence level must lie in (0, 1)");
}

/// p-value of a standard-normal statistic under the given alternative.
inline double normal_p_value(double statistic, Tail tails) {
  switch (tails) {
  case Tail::greater: return normal_sf(statistic);
  case Tail::less: return normal_cdf(statistic);
  case Tail::two_sided: return std::min(1.0, 2.0 * normal_sf(std::fabs(statistic)));
  }
  return 1.0;
}

inline TestResult make_test_result(double statistic, double alpha, Tail tails) {
  const double p = normal_p_value(statistic, tails);
  return {statistic, p, alpha, tails, p < alpha};
}

/// One-way ANOVA mean squares over `n` subjects, where `value(i, j)` yields
/// the j-th of k measurements of subject i. Used both for whole tables and
/// for bootstrap resamples addressed through an index vector.
template <typename ValueFn>
VarianceComponents one_way_anova(std::size_t n, std::size_t k, ValueFn&& value) {
  std::vector<double> means(n);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      s += value(i, j);
    means[i] = s / static_cast<double>(k);
    grand += means[i];
  }
  grand /= static_cast<double>(n);

  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dm = means[i] - grand;
    ssb += dm * dm;
    for (std::size_t j = 0; j < k; ++j) {
      const double dw = value(i, j) - means[i];
      ssw += dw * dw;
    }
  }
  VarianceComponents vc;
  vc.msb = static_cast<double>(k) * ssb / static_cast<double>(n - 1);
  vc.msw = ssw / static_cast<double>(n * (k - 1));
  vc.sigma2_b = std::max(0.0, (vc.msb - vc.msw) / static_cast<double>(k));
  vc.sigma2_w = vc.msw;
  return vc;
}

/// ICC from mean squares, or nullopt when MSB = MSW = 0.
inline std::optional<double> icc_from_components(const VarianceComponents& vc, std::size_t k) {
  const double denom = vc.msb + static_cast<double>(k - 1) * vc.msw;
  if (!(denom > 0.0))
    return std::nullopt;
  return (vc.msb - vc.msw) / denom;
}

} // namespace detail

/// One-way random-effects ICC, r = (MSB - MSW) / (MSB + (k-1) MSW).
inline IccEstimate estimate_icc(const MeasurementTable& table) {
  const auto n = static_cast<std::size_t>(table.n_subjects());
  const auto k = static_cast<std::size_t>(table.k_measurements());
  const auto vc =
      detail::one_way_anova(n, k, [&](std::size_t i, std::size_t j) { return table.at(i, j); });
  const auto r = detail::icc_from_components(vc, k);
  if (!r)
    throw DataError("degenerate-data", "all measurements are identical; the ICC is undefined");
  return {*r, Design(table.n_subjects(), table.k_measurements()), vc};
}

/// Wald test of a single ICC against the reference rho0 on the Fisher z scale.
inline TestResult test_single(double r, const Design& design, double rho0, double alpha,
                              Tail tails) {
  detail::require_alpha(alpha);
  if (!(rho0 >= 0.0 && rho0 < 1.0))
    throw DomainError("invalid-reference", "reference ICC must lie in [0, 1)");
  const int k = design.k_measurements();
  const double zr = fisher_z_icc(r, k).z;
  const double z0 = fisher_z_icc(rho0, k).z;
  return detail::make_test_result((zr - z0) / std::sqrt(var_single(design)), alpha, tails);
}

/// Two-sided confidence interval for a single ICC, built on the z scale and
/// mapped back through the inverse transform.
inline IntervalEstimate ci_single(double r, const Design& design, double level) {
  detail::require_level(level);
  const int k = design.k_measurements();
  const double zr = fisher_z_icc(r, k).z;
  const double half = normal_quantile(0.5 + 0.5 * level) * std::sqrt(var_single(design));
  return {inverse_fisher_z_icc(zr - half, k), inverse_fisher_z_icc(zr + half, k), level};
}

enum class ReliabilityBand { poor, moderate, good, excellent };

inline std::string_view to_string(ReliabilityBand b) {
  switch (b) {
  case ReliabilityBand::poor: return "poor";
  case ReliabilityBand::moderate: return "moderate";
  case ReliabilityBand::good: return "good";
  case ReliabilityBand::excellent: return "excellent";
  }
  return "poor";
}

inline std::optional<ReliabilityBand> parse_band(std::string_view s) {
  if (s == "poor") return ReliabilityBand::poor;
  if (s == "moderate") return ReliabilityBand::moderate;
  if (s == "good") return ReliabilityBand::good;
  if (s == "excellent") return ReliabilityBand::excellent;
  return std::nullopt;
}

/// Lower edge of a band ([0.5, 0.75) -> 0.5). Poor has no floor; its
/// ceiling 0.5 is the natural reference.
inline double band_floor(ReliabilityBand b) {
  switch (b) {
  case ReliabilityBand::poor: return 0.0;
  case ReliabilityBand::moderate: return 0.5;
  case ReliabilityBand::good: return 0.75;
  case ReliabilityBand::excellent: return 0.9;
  }
  return 0.0;
}

struct Classification {
  ReliabilityBand band = ReliabilityBand::poor;
  bool negative = false;
};

/// Koo reliability bands, half-open and lower-inclusive:
/// poor < 0.5 <= moderate < 0.75 <= good < 0.9 <= excellent.
inline Classification classify_reliability(double r) {
  if (std::isnan(r))
    throw DomainError("non-finite", "ICC must be finite");
  Classification c;
  c.negative = r < 0.0;
  if (r >= 0.9)
    c.band = ReliabilityBand::excellent;
  else if (r >= 0.75)
    c.band = ReliabilityBand::good;
  else if (r >= 0.5)
    c.band = ReliabilityBand::moderate;
  else
    c.band = ReliabilityBand::poor;
  return c;
}

} // namespace icc

#endif // ICC_SINGLE_HPP
