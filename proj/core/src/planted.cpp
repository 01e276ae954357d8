#include "rankforge/planted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rankforge/error.hpp"
#include "rankforge/metrics.hpp"

namespace rankforge {

void PlantedSpec::validate() const {
  if (input_dim < 2) throw InvalidInput("planted problem needs input_dim >= 2");
  if (candidates_per_query < 2) throw InvalidInput("planted problem needs >= 2 candidates per query");
  if (!(grade3_depth <= grade2_depth && grade2_depth <= grade1_depth)) {
    throw InvalidInput("planted grade depths must be non-decreasing");
  }
  if (grade1_depth == 0 || grade1_depth >= candidates_per_query) {
    throw InvalidInput("planted grade1_depth must leave both positives and negatives");
  }
  if (!(std::abs(shift_alignment) <= 1.0)) throw InvalidInput("shift_alignment must be in [-1, 1]");
  if (!(teacher_norm > 0.0) || !(query_shift_scale >= 0.0)) {
    throw InvalidInput("teacher_norm must be positive and query_shift_scale non-negative");
  }
}

namespace {

std::vector<double> unit_gaussian(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    for (double& x : v) x = normal(rng);
    norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  } while (norm < 1e-9);
  for (double& x : v) x /= norm;
  return v;
}

int grade_for_rank(const PlantedSpec& spec, std::size_t rank) {
  if (rank <= spec.grade3_depth) return 3;
  if (rank <= spec.grade2_depth) return 2;
  if (rank <= spec.grade1_depth) return 1;
  return 0;
}

struct SplitBuilder {
  const PlantedSpec& spec;
  const ScorerParams& teacher;
  const std::vector<double>& shift_dir;
  std::mt19937_64& rng;

  PlantedSplit build(const std::string& prefix, std::size_t num_queries,
                     std::vector<std::vector<std::string>>* teacher_orders) {
    std::normal_distribution<double> normal;
    PlantedSplit split;
    const std::size_t d = spec.input_dim;
    const std::size_t n = spec.candidates_per_query;
    for (std::size_t q = 0; q < num_queries; ++q) {
      const std::string qid = prefix + std::to_string(q);
      const double offset = spec.query_shift_scale * normal(rng);
      std::vector<double> scores(n);
      std::vector<std::string> ids(n);
      for (std::size_t i = 0; i < n; ++i) {
        FeatureVector x(d);
        for (std::size_t k = 0; k < d; ++k) x[k] = offset * shift_dir[k] + normal(rng);
        scores[i] = score(teacher, x);
        ids[i] = qid + "_p" + std::to_string(i);
        split.features.add(qid, ids[i], std::move(x));
      }
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      std::vector<std::string> ordered_ids;
      ordered_ids.reserve(n);
      for (std::size_t r = 0; r < n; ++r) {
        split.qrels.set(qid, ids[order[r]], grade_for_rank(spec, r + 1));
        ordered_ids.push_back(ids[order[r]]);
      }
      split.teacher_scores.push_back(std::move(scores));
      if (teacher_orders != nullptr) teacher_orders->push_back(std::move(ordered_ids));
    }
    return split;
  }
};

}  // namespace

PlantedProblem generate_planted(const PlantedSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t d = spec.input_dim;

  PlantedProblem problem;
  problem.teacher.kind = ScorerKind::kLinear;
  problem.teacher.input_dim = d;
  problem.teacher.weights = unit_gaussian(d, rng);
  const std::vector<double> teacher_dir = problem.teacher.weights;
  for (double& w : problem.teacher.weights) w *= spec.teacher_norm;
  problem.teacher.weights.push_back(0.0);

  // u = c * w_hat + sqrt(1 - c^2) * r_hat, with r_hat orthogonal to w_hat.
  std::vector<double> r = unit_gaussian(d, rng);
  const double proj = std::inner_product(r.begin(), r.end(), teacher_dir.begin(), 0.0);
  double r_norm = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    r[k] -= proj * teacher_dir[k];
    r_norm += r[k] * r[k];
  }
  r_norm = std::sqrt(r_norm);
  const double c = spec.shift_alignment;
  const double s = std::sqrt(1.0 - c * c);
  std::vector<double> shift_dir(d);
  for (std::size_t k = 0; k < d; ++k) shift_dir[k] = c * teacher_dir[k] + s * r[k] / r_norm;

  SplitBuilder builder{spec, problem.teacher, shift_dir, rng};
  std::vector<std::vector<std::string>> train_orders;
  problem.train = builder.build("train_q", spec.train_queries, &train_orders);
  problem.validation = builder.build("val_q", spec.validation_queries, nullptr);
  problem.test = builder.build("test_q", spec.test_queries, nullptr);

  const std::size_t n = spec.candidates_per_query;
  const std::size_t num_pos = spec.grade1_depth;
  for (std::size_t q = 0; q < train_orders.size(); ++q) {
    const auto& qc = problem.train.features.queries()[q];
    const auto& order = train_orders[q];
    for (std::size_t t = 0; t < spec.triplets_per_query; ++t) {
      const std::size_t pos_rank = std::uniform_int_distribution<std::size_t>(0, num_pos - 1)(rng);
      const std::size_t neg_rank = std::uniform_int_distribution<std::size_t>(num_pos, n - 1)(rng);
      const auto& pos = order[pos_rank];
      const auto& neg = order[neg_rank];
      problem.triplets.push_back(DistillTriplet{qc.query_id, pos, neg,
                                                score(problem.teacher, problem.train.features.at(qc.query_id, pos)),
                                                score(problem.teacher, problem.train.features.at(qc.query_id, neg))});
    }
    problem.rankings.emplace_back(qc.query_id, order);
  }
  return problem;
}

double teacher_agreement(const ScorerParams& student, const PlantedSplit& split) {
  const auto& queries = split.features.queries();
  if (queries.empty()) throw InvalidInput("teacher_agreement: empty split");
  double total = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto scores = score_all(student, queries[q].features);
    total += kendall_tau(scores, split.teacher_scores[q]);
  }
  return total / static_cast<double>(queries.size());
}

}  // namespace rankforge
