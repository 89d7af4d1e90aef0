#ifndef ICC_TESTS_SUPPORT_HPP
#define ICC_TESTS_SUPPORT_HPP

// Hand-rolled generators for property tests. Each test seeds its own Gen so
// failures are reproducible from the printed case index.

#include "icc/single.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace icc::gen {

class Gen {
public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// An ICC strictly inside the Fisher domain for k, kept away from the ends.
  double icc(int k, double margin = 1e-3) {
    const double lo = -1.0 / (k - 1) + margin;
    return uniform(lo, 1.0 - margin);
  }
  /// A positive ICC, the usual reporting range.
  double positive_icc() { return uniform(0.01, 0.98); }

  std::vector<std::vector<double>> table(int n, int k, double scale = 10.0) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (auto& row : rows) {
      const double subject = scale * normal();
      for (int j = 0; j < k; ++j)
        row.push_back(subject + scale * uniform(0.1, 1.5) * normal());
    }
    return rows;
  }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

/// Data with a given subject-effect and noise scale, for simulation tests.
inline std::vector<std::vector<double>> one_way_table(Gen& g, int n, int k, double icc) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (auto& row : rows) {
    const double s = std::sqrt(icc) * g.normal();
    for (int j = 0; j < k; ++j)
      row.push_back(s + std::sqrt(1.0 - icc) * g.normal());
  }
  return rows;
}

} // namespace icc::gen

#endif
