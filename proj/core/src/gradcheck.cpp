#include "rankforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rankforge/error.hpp"

namespace rankforge {

std::vector<double> central_difference(const ScalarFunction& f, std::span<const double> x,
                                       double h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = point[i];
    point[i] = orig + h;
    const double up = f(point);
    point[i] = orig - h;
    const double down = f(point);
    point[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw InvalidInput("gradient length mismatch: " + std::to_string(analytic.size()) + " vs " +
                       std::to_string(numeric.size()));
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  if (diff == 0.0) return 0.0;
  return diff / std::max(scale, 1e-12);
}

namespace {

struct Problem {
  ScalarFunction loss;
  std::vector<double> scores;
  std::vector<double> analytic;
};

Problem sample_problem(Objective objective, const GradcheckOptions& opt, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, opt.score_stddev);
  const LossConfig cfg = opt.loss;
  Problem p;

  switch (objective) {
    case Objective::kBce: {
      p.scores = {normal(rng), normal(rng)};
      p.loss = [](std::span<const double> s) { return bce_pair(s[0], s[1]).value; };
      p.analytic = bce_pair(p.scores[0], p.scores[1]).grad;
      break;
    }
    case Objective::kHinge: {
      do {
        p.scores = {normal(rng), normal(rng)};
      } while (std::abs(cfg.margin - (p.scores[0] - p.scores[1])) < 1e-2);
      p.loss = [cfg](std::span<const double> s) { return hinge_pair(s[0], s[1], cfg).value; };
      p.analytic = hinge_pair(p.scores[0], p.scores[1], cfg).grad;
      break;
    }
    case Objective::kInfoNce: {
      const std::size_t n = opt.list_size;
      p.scores.resize(n);
      for (double& s : p.scores) s = normal(rng);
      std::vector<int> labels(n, 0);
      labels[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1;
      std::vector<std::string> ids(n);
      for (std::size_t i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
      p.loss = [ids, labels](std::span<const double> s) {
        return info_nce(ScoredList("q", ids, {s.begin(), s.end()}, labels)).value;
      };
      p.analytic = info_nce(ScoredList("q", ids, p.scores, labels)).grad;
      break;
    }
    case Objective::kMarginMse: {
      DistillTriplet t{"q", "pos", "neg", normal(rng), normal(rng)};
      p.scores = {normal(rng), normal(rng)};
      p.loss = [t](std::span<const double> s) { return margin_mse(t, s[0], s[1]).value; };
      p.analytic = margin_mse(t, p.scores[0], p.scores[1]).grad;
      break;
    }
    case Objective::kDistillRankNet:
    case Objective::kAdrMse: {
      const std::size_t n = opt.list_size;
      p.scores.resize(n);
      for (double& s : p.scores) s = normal(rng);
      if (objective == Objective::kAdrMse) {
        p.loss = [cfg](std::span<const double> s) { return adr_mse(s, cfg).value; };
        p.analytic = adr_mse(p.scores, cfg).grad;
      } else {
        p.loss = [](std::span<const double> s) { return distill_ranknet(s).value; };
        p.analytic = distill_ranknet(p.scores).grad;
      }
      break;
    }
  }
  return p;
}

}  // namespace

GradcheckResult check_objective(Objective objective, const GradcheckOptions& options) {
  options.loss.validate();
  const std::size_t min_n = objective == Objective::kAdrMse ? 1 : 2;
  if (options.list_size < min_n) {
    throw InvalidInput(std::string(objective_name(objective)) + " gradcheck needs n >= " + std::to_string(min_n) +
                       ", got " + std::to_string(options.list_size));
  }
  std::mt19937_64 rng(options.seed);
  GradcheckResult result;
  for (std::size_t t = 0; t < options.trials; ++t) {
    Problem p = sample_problem(objective, options, rng);
    if (options.break_gradient && !p.analytic.empty()) {
      p.analytic[0] = p.analytic[0] * 1.01 + 1e-3;
    }
    const auto numeric = central_difference(p.loss, p.scores, options.step);
    result.max_relative_error =
        std::max(result.max_relative_error, max_relative_error(p.analytic, numeric));
    ++result.trials;
  }
  return result;
}

}  // namespace rankforge
