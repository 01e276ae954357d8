#include "rankforge/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rankforge/error.hpp"

namespace rankforge {
namespace {

// q_alpha for k = 2..20: upper quantile of the studentized range with
// infinite degrees of freedom, divided by sqrt(2).
constexpr std::array<double, 19> kQ005 = {
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799};
constexpr std::array<double, 19> kQ010 = {
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
    3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233};

}  // namespace

SeedSummary aggregate_seeds(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("aggregate_seeds needs at least one value");
  const double n = static_cast<double>(values.size());
  SeedSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string format_mean_std(const SeedSummary& summary, int mean_decimals, int std_decimals) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.*f \xC2\xB1 %.*f", mean_decimals, summary.mean, std_decimals,
                summary.stddev);
  return buf;
}

SeedSummary parse_mean_std(std::string_view text) {
  std::size_t sep = text.find("\xC2\xB1");
  std::size_t sep_len = 2;
  if (sep == std::string_view::npos) {
    sep = text.find("+-");
    sep_len = 2;
  }
  if (sep == std::string_view::npos) throw ParseError(0, "expected 'mean ± std', got '" + std::string(text) + "'");

  auto parse_number = [&](std::string_view part) {
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw ParseError(0, "invalid number '" + std::string(part) + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  SeedSummary s;
  s.mean = parse_number(text.substr(0, sep));
  s.stddev = parse_number(text.substr(sep + sep_len));
  if (s.stddev < 0.0) throw ParseError(0, "negative standard deviation in '" + std::string(text) + "'");
  return s;
}

std::vector<std::vector<double>> rank_rows(const RankMatrix& matrix, bool higher_is_better) {
  const std::size_t k = matrix.num_methods();
  std::vector<std::vector<double>> ranks;
  ranks.reserve(matrix.num_instances());
  std::vector<std::size_t> order(k);
  for (std::size_t r = 0; r < matrix.num_instances(); ++r) {
    const auto row = matrix.row(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    std::vector<double> out(k);
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      // positions i..j (0-based) share the mean of ranks i+1..j+1
      const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) out[order[t]] = mid;
      i = j + 1;
    }
    ranks.push_back(std::move(out));
  }
  return ranks;
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& ranks) {
  if (ranks.empty()) return {};
  std::vector<double> avg(ranks.front().size(), 0.0);
  for (const auto& row : ranks) {
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += row[j];
  }
  for (double& a : avg) a /= static_cast<double>(ranks.size());
  return avg;
}

FriedmanResult friedman_from_average_ranks(std::span<const double> avg_ranks, std::size_t num_instances) {
  const std::size_t k = avg_ranks.size();
  if (k < 2) throw InvalidInput("Friedman test needs at least 2 methods, got " + std::to_string(k));
  if (num_instances < 2) {
    throw InvalidInput("Friedman test needs at least 2 instances (N >= 2), got " + std::to_string(num_instances));
  }
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(num_instances);
  double sum_sq = 0.0;
  for (double r : avg_ranks) sum_sq += r * r;
  FriedmanResult res;
  res.chi_square = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  res.df = k - 1;
  return res;
}

FriedmanResult friedman(const RankMatrix& matrix, bool higher_is_better) {
  if (matrix.num_methods() < 2) {
    throw InvalidInput("Friedman test needs at least 2 methods, got " + std::to_string(matrix.num_methods()));
  }
  if (matrix.num_instances() < 2) {
    throw InvalidInput("Friedman test needs at least 2 instances (N >= 2), got " +
                       std::to_string(matrix.num_instances()));
  }
  return friedman_from_average_ranks(average_ranks(rank_rows(matrix, higher_is_better)), matrix.num_instances());
}

double chi_square_sf(double x, std::size_t df) {
  if (df == 0) throw InvalidInput("chi-square needs df >= 1");
  if (std::isnan(x)) throw InvalidInput("chi-square statistic is NaN");
  if (x <= 0.0) return 1.0;
  // Closed forms for integer df: a Poisson tail for even df, erfc plus a
  // half-integer series for odd df. Terms are formed in log space.
  const double h = 0.5 * x;
  const double log_h = std::log(h);
  double sf = 0.0;
  if (df % 2 == 0) {
    for (std::size_t i = 0; i < df / 2; ++i) {
      const double di = static_cast<double>(i);
      sf += std::exp(-h + di * log_h - std::lgamma(di + 1.0));
    }
  } else {
    sf = std::erfc(std::sqrt(h));
    for (std::size_t i = 1; i <= (df - 1) / 2; ++i) {
      const double di = static_cast<double>(i);
      sf += std::exp(-h + (di - 0.5) * log_h - std::lgamma(di + 0.5));
    }
  }
  return std::min(1.0, sf);
}

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 20) {
    throw InvalidInput("Nemenyi table covers 2 <= k <= 20 methods, got k=" + std::to_string(k));
  }
  if (std::abs(alpha - 0.05) < 1e-12) return kQ005[k - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return kQ010[k - 2];
  throw InvalidInput("Nemenyi table covers alpha 0.05 and 0.10, got " + std::to_string(alpha));
}

double nemenyi_cd(std::size_t k, std::size_t num_instances, double alpha) {
  const double q = nemenyi_q(k, alpha);
  if (num_instances < 1) throw InvalidInput("Nemenyi CD needs N >= 1");
  const double kd = static_cast<double>(k);
  return q * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(num_instances)));
}

std::vector<std::vector<std::size_t>> group_tiers(std::span<const double> avg_ranks, double cd) {
  std::vector<std::size_t> order(avg_ranks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return avg_ranks[a] < avg_ranks[b]; });
  std::vector<std::vector<std::size_t>> tiers;
  for (std::size_t i = 0; i < order.size(); ++i) {
    // In one dimension single linkage only ever joins sorted neighbours.
    if (i == 0 || !(avg_ranks[order[i]] - avg_ranks[order[i - 1]] < cd)) tiers.emplace_back();
    tiers.back().push_back(order[i]);
  }
  return tiers;
}

std::size_t SignificanceReport::tier_of(std::string_view method) const {
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    if (std::find(tiers[t].begin(), tiers[t].end(), method) != tiers[t].end()) return t;
  }
  throw InvalidInput("unknown method '" + std::string(method) + "'");
}

SignificanceReport build_report(const RankMatrix& matrix, double alpha, bool higher_is_better) {
  SignificanceReport report;
  const FriedmanResult fr = friedman(matrix, higher_is_better);
  report.methods = matrix.method_names();
  report.avg_ranks = average_ranks(rank_rows(matrix, higher_is_better));
  report.chi_square = fr.chi_square;
  report.df = fr.df;
  report.p_value = chi_square_sf(fr.chi_square, fr.df);
  report.alpha = alpha;
  report.num_instances = matrix.num_instances();
  report.critical_difference = nemenyi_cd(matrix.num_methods(), matrix.num_instances(), alpha);
  for (const auto& tier : group_tiers(report.avg_ranks, report.critical_difference)) {
    auto& names = report.tiers.emplace_back();
    for (std::size_t idx : tier) names.push_back(report.methods[idx]);
  }
  return report;
}

}  // namespace rankforge
