#ifndef ICC_RESAMPLE_HPP
#define ICC_RESAMPLE_HPP

// Subject-level bootstrap for ICC differences.
//
// Every replicate resamples whole subjects: a drawn subject brings all of its
// measurements (both instruments, or every region) with it, so the
// within-subject dependence between the compared ICCs is preserved.
//
// Random stream, fixed so that other implementations can reproduce results
// replicate for replicate:
//   * replicate b (0-based) uses its own std::mt19937_64 engine seeded with
//     the (b+1)-th output of a SplitMix64 generator whose state starts at
//     `seed` (state advances by 0x9E3779B97F4A7C15 before each output);
//   * a subject index in [0, N) is drawn by taking 64-bit engine outputs x,
//     rejecting x < (2^64 mod N), and returning x mod N;
//   * a resample is N consecutive index draws; if it is degenerate the same
//     engine draws a fresh resample.
// Replicates therefore do not depend on scheduling and parallel runs match
// serial runs bit for bit.

#include "icc/error.hpp"
#include "icc/single.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace icc {

/// Per subject, k1 instrument-1 values followed by k2 instrument-2 values.
class PairedMeasurements {
public:
  PairedMeasurements(std::vector<std::string> subjects, std::vector<double> values, int k1, int k2)
      : subjects_(std::move(subjects)), values_(std::move(values)), k1_(k1), k2_(k2) {
    if (k1_ < 2 || k2_ < 2)
      throw DomainError("invalid-k", "each instrument needs at least 2 sessions");
    if (values_.size() != subjects_.size() * static_cast<std::size_t>(k1_ + k2_))
      throw DataError("ragged-table", "every subject must carry k1 + k2 values");
    for (double v : values_)
      if (!std::isfinite(v))
        throw DataError("non-finite", "measurements must be finite");
  }

  /// Joins two tables over the same, identically ordered subjects.
  static PairedMeasurements from_tables(const MeasurementTable& first,
                                        const MeasurementTable& second) {
    if (first.subjects() != second.subjects())
      throw DataError("subject-mismatch", "subject identifiers differ or are not aligned");
    std::vector<double> values;
    values.reserve(first.values().size() + second.values().size());
    for (int i = 0; i < first.n_subjects(); ++i) {
      const auto a = first.row(static_cast<std::size_t>(i));
      const auto b = second.row(static_cast<std::size_t>(i));
      values.insert(values.end(), a.begin(), a.end());
      values.insert(values.end(), b.begin(), b.end());
    }
    return {first.subjects(), std::move(values), first.k_measurements(),
            second.k_measurements()};
  }

  int n_subjects() const noexcept { return static_cast<int>(subjects_.size()); }
  int k1() const noexcept { return k1_; }
  int k2() const noexcept { return k2_; }
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }

  /// The complete vector X_i of subject i.
  std::span<const double> subject(std::size_t i) const {
    const auto w = static_cast<std::size_t>(k1_ + k2_);
    return {values_.data() + i * w, w};
  }

private:
  std::vector<std::string> subjects_;
  std::vector<double> values_;
  int k1_;
  int k2_;
};

/// Per subject an R x k grid (regions by sessions), plus the two region
/// groups whose mean ICCs are compared.
class RegionPanel {
public:
  RegionPanel(std::vector<std::string> subjects, std::vector<std::string> regions,
              std::vector<double> values, int k, std::vector<std::size_t> group_a,
              std::vector<std::size_t> group_b)
      : subjects_(std::move(subjects)), regions_(std::move(regions)), values_(std::move(values)),
        k_(k), group_a_(std::move(group_a)), group_b_(std::move(group_b)) {
    if (k_ < 2)
      throw DomainError("invalid-k", "each region needs at least 2 sessions");
    if (regions_.empty())
      throw DataError("no-regions", "a region panel needs at least one region");
    if (values_.size() != subjects_.size() * regions_.size() * static_cast<std::size_t>(k_))
      throw DataError("ragged-table", "every subject must carry R x k values");
    for (double v : values_)
      if (!std::isfinite(v))
        throw DataError("non-finite", "measurements must be finite");
    check_group(group_a_, "A");
    check_group(group_b_, "B");
  }

  int n_subjects() const noexcept { return static_cast<int>(subjects_.size()); }
  int n_regions() const noexcept { return static_cast<int>(regions_.size()); }
  int k_measurements() const noexcept { return k_; }
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }
  const std::vector<std::string>& regions() const noexcept { return regions_; }
  const std::vector<std::size_t>& group_a() const noexcept { return group_a_; }
  const std::vector<std::size_t>& group_b() const noexcept { return group_b_; }

  double at(std::size_t subject, std::size_t region, std::size_t session) const {
    const auto k = static_cast<std::size_t>(k_);
    return values_[(subject * regions_.size() + region) * k + session];
  }

private:
  void check_group(const std::vector<std::size_t>& g, const char* name) const {
    if (g.empty())
      throw DomainError("empty-group", std::string("region group ") + name + " is empty");
    std::set<std::size_t> seen;
    for (auto idx : g) {
      if (idx >= regions_.size())
        throw DomainError("invalid-region", std::string("region group ") + name +
                                                " references region index " +
                                                std::to_string(idx) + " out of range");
      if (!seen.insert(idx).second)
        throw DomainError("invalid-region", std::string("region group ") + name +
                                                " lists region " + regions_[idx] + " twice");
    }
  }

  std::vector<std::string> subjects_;
  std::vector<std::string> regions_;
  std::vector<double> values_;
  int k_;
  std::vector<std::size_t> group_a_;
  std::vector<std::size_t> group_b_;
};

struct BootstrapConfig {
  int replicates = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;
  unsigned workers = 1; ///< threads used for replicates; results do not depend on it
};

struct BootstrapResult {
  double estimate = 0.0;            ///< statistic on the original data
  std::vector<double> replicates;   ///< in replicate order
  IntervalEstimate interval;        ///< percentile interval
  bool significant = false;         ///< interval excludes 0
  std::size_t redraws = 0;          ///< degenerate resamples that were drawn again
  std::vector<std::string> warnings;
};

/// Percentile interval: empirical (1-level)/2 and (1+level)/2 quantiles with
/// linear interpolation between order statistics (h = (n-1) q).
inline IntervalEstimate percentile_interval(std::span<const double> samples, double level) {
  detail::require_level(level);
  if (samples.size() < 2)
    throw DataError("insufficient-samples", "a percentile interval needs at least 2 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  auto quantile = [&](double q) {
    const double h = (static_cast<double>(s.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0), level};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate) {
  return splitmix64(seed + static_cast<std::uint64_t>(replicate) * 0x9E3779B97F4A7C15ULL);
}

/// Draws subject indices for one replicate, per the stream documented above.
class SubjectSampler {
public:
  SubjectSampler(std::uint64_t seed, std::size_t replicate)
      : engine_(replicate_seed(seed, replicate)) {}

  std::size_t index(std::size_t n) {
    const std::uint64_t n64 = n;
    const std::uint64_t threshold = (0 - n64) % n64; // 2^64 mod n
    std::uint64_t x;
    do {
      x = engine_();
    } while (x < threshold);
    return static_cast<std::size_t>(x % n64);
  }

  void resample(std::vector<std::size_t>& out, std::size_t n) {
    out.resize(n);
    for (auto& i : out)
      i = index(n);
  }

private:
  std::mt19937_64 engine_;
};

inline void validate_config(const BootstrapConfig& cfg, int n_subjects,
                            std::vector<std::string>& warnings) {
  if (cfg.replicates < 100)
    throw DomainError("invalid-config", "at least 100 bootstrap replicates are required");
  require_level(cfg.level);
  if (n_subjects < 3)
    throw DomainError("invalid-n", "bootstrap needs at least 3 subjects");
  if (cfg.replicates < 1000)
    warnings.push_back("fewer than 1000 replicates; percentile limits will be noisy");
}

/// Runs `replicates` replicates of `statistic`, which maps a vector of subject
/// indices to an optional value (nullopt = degenerate resample, redraw).
template <typename Statistic>
BootstrapResult run_bootstrap(std::size_t n_subjects, const BootstrapConfig& cfg,
                              Statistic&& statistic, BootstrapResult result) {
  const auto b_count = static_cast<std::size_t>(cfg.replicates);
  const std::size_t max_draws = 10 * b_count;
  result.replicates.assign(b_count, 0.0);
  std::vector<std::size_t> attempts(b_count, 0);

  auto run_one = [&](std::size_t b) {
    SubjectSampler sampler(cfg.seed, b);
    std::vector<std::size_t> idx;
    while (attempts[b] < max_draws) {
      ++attempts[b];
      sampler.resample(idx, n_subjects);
      if (auto v = statistic(std::span<const std::size_t>(idx))) {
        result.replicates[b] = *v;
        return true;
      }
    }
    return false;
  };

  std::atomic<bool> exhausted{false};
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, cfg.replicates));
  if (workers == 1) {
    for (std::size_t b = 0; b < b_count && !exhausted; ++b)
      if (!run_one(b))
        exhausted = true;
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < b_count && !exhausted; b += workers)
          if (!run_one(b))
            exhausted = true;
      });
  }

  std::size_t total = 0;
  for (auto a : attempts)
    total += a;
  if (exhausted || total > max_draws)
    throw DataError("bootstrap-exhausted",
                    "too many degenerate resamples (more than 10 x B draws); the data have too "
                    "little variance for a subject-level bootstrap");
  result.redraws = total - b_count;
  if (result.redraws > 0)
    result.warnings.push_back(std::to_string(result.redraws) +
                              " degenerate resamples were redrawn");

  result.interval = percentile_interval(result.replicates, cfg.level);
  result.significant = !result.interval.contains(0.0);
  return result;
}

} // namespace detail

/// Bootstrap distribution of r1* - r2* for two instruments on one cohort.
inline BootstrapResult bootstrap_dependent_difference(const PairedMeasurements& data,
                                                      const BootstrapConfig& config) {
  BootstrapResult result;
  detail::validate_config(config, data.n_subjects(), result.warnings);
  const auto n = static_cast<std::size_t>(data.n_subjects());
  const auto k1 = static_cast<std::size_t>(data.k1());
  const auto k2 = static_cast<std::size_t>(data.k2());

  auto difference = [&](auto&& subject_of) -> std::optional<double> {
    const auto r1 = detail::icc_from_components(
        detail::one_way_anova(n, k1,
                              [&](std::size_t i, std::size_t j) { return subject_of(i)[j]; }),
        k1);
    if (!r1)
      return std::nullopt;
    const auto r2 = detail::icc_from_components(
        detail::one_way_anova(n, k2,
                              [&](std::size_t i, std::size_t j) { return subject_of(i)[k1 + j]; }),
        k2);
    if (!r2)
      return std::nullopt;
    return *r1 - *r2;
  };

  const auto original = difference([&](std::size_t i) { return data.subject(i); });
  if (!original)
    throw DataError("degenerate-data", "an instrument has no variance in the original data");
  result.estimate = *original;

  return detail::run_bootstrap(
      n, config,
      [&](std::span<const std::size_t> idx) {
        return difference([&](std::size_t i) { return data.subject(idx[i]); });
      },
      std::move(result));
}

/// Bootstrap distribution of mean(ICC over group A) - mean(ICC over group B)
/// for regions measured on one cohort.
inline BootstrapResult bootstrap_region_groups(const RegionPanel& data,
                                               const BootstrapConfig& config) {
  BootstrapResult result;
  detail::validate_config(config, data.n_subjects(), result.warnings);
  const auto n = static_cast<std::size_t>(data.n_subjects());
  const auto k = static_cast<std::size_t>(data.k_measurements());

  auto group_difference = [&](auto&& subject_of) -> std::optional<double> {
    auto group_mean = [&](const std::vector<std::size_t>& group) -> std::optional<double> {
      double sum = 0.0;
      for (auto region : group) {
        const auto r = detail::icc_from_components(
            detail::one_way_anova(
                n, k,
                [&](std::size_t i, std::size_t j) { return data.at(subject_of(i), region, j); }),
            k);
        if (!r)
          return std::nullopt;
        sum += *r;
      }
      return sum / static_cast<double>(group.size());
    };
    const auto a = group_mean(data.group_a());
    if (!a)
      return std::nullopt;
    const auto b = group_mean(data.group_b());
    if (!b)
      return std::nullopt;
    return *a - *b;
  };

  const auto original = group_difference([](std::size_t i) { return i; });
  if (!original)
    throw DataError("degenerate-data", "a compared region has no variance in the original data");
  result.estimate = *original;

  return detail::run_bootstrap(
      n, config,
      [&](std::span<const std::size_t> idx) {
        return group_difference([&](std::size_t i) { return idx[i]; });
      },
      std::move(result));
}

} // namespace icc

#endif // ICC_RESAMPLE_HPP
