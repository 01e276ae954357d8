#pragma once

// Cross-method significance testing: Friedman test over a methods x
// instances matrix, Nemenyi critical difference, and tier extraction.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/core.hpp"

namespace rankforge {

struct SeedSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1); 0 for a single seed
};

SeedSummary aggregate_seeds(std::span<const double> values);

/// "77.4 ± 0.09" style rendering.
std::string format_mean_std(const SeedSummary& summary, int mean_decimals = 1, int std_decimals = 2);
/// Inverse of format_mean_std; accepts "±" or "+-". Throws ParseError.
SeedSummary parse_mean_std(std::string_view text);

/// Per-row ranks, 1 = best, ties get the average of the tied positions.
std::vector<std::vector<double>> rank_rows(const RankMatrix& matrix, bool higher_is_better = true);

/// Column means of a rank grid.
std::vector<double> average_ranks(const std::vector<std::vector<double>>& ranks);

struct FriedmanResult {
  double chi_square = 0.0;
  std::size_t df = 0;
};

/// chi2_F = 12N / (k(k+1)) * (sum_j R_j^2 - k(k+1)^2 / 4), df = k - 1.
FriedmanResult friedman_from_average_ranks(std::span<const double> average_ranks, std::size_t num_instances);
FriedmanResult friedman(const RankMatrix& matrix, bool higher_is_better = true);

/// P(X >= x) for X ~ chi-square(df), exact for integer df >= 1.
double chi_square_sf(double x, std::size_t df);

/// q_alpha(k) for the Nemenyi test (studentized range / sqrt 2, infinite df).
/// Supports 2 <= k <= 20 and alpha in {0.05, 0.10}.
double nemenyi_q(std::size_t k, double alpha);
/// CD = q_alpha(k) * sqrt(k(k+1) / (6N)).
double nemenyi_cd(std::size_t k, std::size_t num_instances, double alpha);

struct SignificanceReport {
  std::vector<std::string> methods;
  std::vector<double> avg_ranks;  // aligned with methods
  double chi_square = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  double critical_difference = 0.0;
  double alpha = 0.05;
  std::size_t num_instances = 0;
  /// Methods grouped by single linkage on average rank (gap < CD), best tier first;
  /// inside a tier methods are sorted by average rank.
  std::vector<std::vector<std::string>> tiers;

  /// Index into `tiers` for a method; throws InvalidInput for an unknown name.
  std::size_t tier_of(std::string_view method) const;
};

/// Single-linkage grouping of average ranks with threshold `cd` (strict <).
/// Returns method indices per tier, best tier first.
std::vector<std::vector<std::size_t>> group_tiers(std::span<const double> avg_ranks, double cd);

SignificanceReport build_report(const RankMatrix& matrix, double alpha = 0.05, bool higher_is_better = true);

}  // namespace rankforge
