#pragma once

// Nonparametric change-point test for doubly censored count series.
//
// Each bin t carries an interval [lower[t], upper[t]] known to contain the
// true count. The kernel
//
//   h(s,t) = 1(lower[s] > upper[t]) - 1(upper[s] < lower[t])
//
// is antisymmetric, so the rank scores U_s = sum_t h(s,t) sum to zero. They
// are normalized to unit Euclidean norm, and the maximum absolute partial
// sum W is compared against the supremum of a Brownian bridge.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dtoprank {

using Count = std::int64_t;

struct CensoredSeries {
  std::vector<Count> lower;
  std::vector<Count> upper;

  CensoredSeries() = default;
  CensoredSeries(std::vector<Count> lo, std::vector<Count> hi);

  // Uncensored series: lower == upper == values.
  static CensoredSeries exact(std::vector<Count> values);

  std::size_t length() const { return lower.size(); }

  // lengths agree and 0 <= lower[t] <= upper[t] everywhere.
  bool valid() const;
  // Monitor-built shape: each bin is either exact or (0, upper).
  bool monitor_shaped() const;

  friend bool operator==(const CensoredSeries&, const CensoredSeries&) = default;
};

struct TestResult {
  double statistic = 0.0;   // W
  double p_value = 1.0;
  int change_point = 1;     // 1-based, last bin of the first segment
  bool degenerate = false;  // every pair of bins mutually tied

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

// Rank scores via two sorted bound arrays, O(P log P).
std::vector<std::int64_t> compute_U(const CensoredSeries& series);

// Literal O(P^2) kernel sum. Kept as a reference for tests.
std::vector<std::int64_t> compute_U_bruteforce(const CensoredSeries& series);

// U / ||U||_2, or std::nullopt when U is identically zero.
std::optional<std::vector<double>> normalize_Y(std::span<const std::int64_t> scores);

struct MaxPartialSum {
  double statistic = 0.0;
  int change_point = 1;  // earliest 1-based index attaining the maximum
};

MaxPartialSum statistic_W(std::span<const double> normalized);

// P(sup_u |B(u)| > b) for a standard Brownian bridge B.
// Throws std::domain_error for negative or NaN b.
double brownian_bridge_pvalue(double b);

// Full pipeline. Throws ValidationError when the series is invalid or P < 2.
TestResult test_series(const CensoredSeries& series);

}  // namespace dtoprank
