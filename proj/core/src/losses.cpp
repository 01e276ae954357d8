#include "rankforge/losses.hpp"

#include <algorithm>
#include <cmath>

#include "rankforge/error.hpp"

namespace rankforge {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " must be finite");
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) require_finite(x, what);
}

// sigmoid'(x) = sigmoid(x) * sigmoid(-x); even in x.
double sigmoid_slope(double x) noexcept {
  const double p = sigmoid(x);
  return p * sigmoid(-x);
}

}  // namespace

std::string_view objective_name(Objective objective) noexcept {
  switch (objective) {
    case Objective::kBce: return "bce";
    case Objective::kHinge: return "hinge";
    case Objective::kInfoNce: return "infonce";
    case Objective::kMarginMse: return "margin_mse";
    case Objective::kDistillRankNet: return "distill_ranknet";
    case Objective::kAdrMse: return "adr_mse";
  }
  return "unknown";
}

std::optional<Objective> parse_objective(std::string_view name) noexcept {
  for (Objective o : kAllObjectives) {
    if (objective_name(o) == name) return o;
  }
  return std::nullopt;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  // exp(-|x|) <= 1, so nothing overflows.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

LossOutput bce_pair(double s_pos, double s_neg) {
  require_finite(s_pos, "positive score");
  require_finite(s_neg, "negative score");
  // -log sigmoid(s) = softplus(-s);  -log(1 - sigmoid(s)) = softplus(s)
  LossOutput out;
  out.value = softplus(-s_pos) + softplus(s_neg);
  out.grad = {-sigmoid(-s_pos), sigmoid(s_neg)};
  return out;
}

LossOutput hinge_pair(double s_pos, double s_neg, const LossConfig& cfg) {
  cfg.validate();
  require_finite(s_pos, "positive score");
  require_finite(s_neg, "negative score");
  const double slack = cfg.margin - (s_pos - s_neg);
  LossOutput out;
  if (slack > 0.0) {
    out.value = slack;
    out.grad = {-1.0, 1.0};
  } else {
    out.value = 0.0;
    out.grad = {0.0, 0.0};
  }
  return out;
}

LossOutput info_nce(const ScoredList& list) {
  if (!list.has_labels()) throw InvalidInput("infonce needs labels on list '" + list.query_id() + "'");
  const auto& s = list.scores();
  const auto& y = list.labels();
  require_finite(s, "score");

  double num_pos = 0.0;
  for (int yi : y) num_pos += yi;
  if (num_pos == 0.0) {
    throw InvalidInput("infonce needs at least one positive in list '" + list.query_id() + "'");
  }

  const double max_s = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double si : s) sum += std::exp(si - max_s);
  const double lse = max_s + std::log(sum);

  LossOutput out;
  out.grad.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 0) out.value += lse - s[i];
    const double p = std::exp(s[i] - lse);
    out.grad[i] = num_pos * p - y[i];
  }
  return out;
}

LossOutput margin_mse(const DistillTriplet& triplet, double s_pos, double s_neg) {
  triplet.validate();
  require_finite(s_pos, "positive score");
  require_finite(s_neg, "negative score");
  const double d = (s_pos - s_neg) - triplet.teacher_margin();
  return LossOutput{d * d, {2.0 * d, -2.0 * d}};
}

LossOutput distill_ranknet(std::span<const double> scores) {
  const std::size_t n = scores.size();
  if (n < 2) throw InvalidInput("distill_ranknet needs at least 2 scores, got " + std::to_string(n));
  require_finite(scores, "score");

  LossOutput out;
  out.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // teacher prefers i over j
      const double diff = scores[j] - scores[i];
      out.value += softplus(diff);
      const double g = sigmoid(diff);
      out.grad[j] += g;
      out.grad[i] -= g;
    }
  }
  return out;
}

std::vector<double> soft_rank(std::span<const double> scores, const LossConfig& cfg) {
  cfg.validate();
  require_finite(scores, "score");
  const std::size_t n = scores.size();
  if (n == 0) throw InvalidInput("soft_rank needs at least one score");
  const double inv_t = 1.0 / cfg.temperature;
  std::vector<double> ranks(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // sigmoid(x) + sigmoid(-x) = 1 exactly distributes one unit per pair.
      const double p = sigmoid((scores[j] - scores[i]) * inv_t);
      ranks[i] += p;
      ranks[j] += 1.0 - p;
    }
  }
  return ranks;
}

LossOutput adr_mse(std::span<const double> scores, const LossConfig& cfg) {
  const std::size_t n = scores.size();
  if (n == 0) throw InvalidInput("adr_mse needs at least one score");
  const std::vector<double> ranks = soft_rank(scores, cfg);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_t = 1.0 / cfg.temperature;

  LossOutput out;
  // upstream[i] = dL/dr_i
  std::vector<double> upstream(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double teacher_rank = static_cast<double>(i + 1);
    const double w = 1.0 / std::log2(teacher_rank + 1.0);
    const double diff = teacher_rank - ranks[i];
    out.value += w * diff * diff;
    upstream[i] = -2.0 * w * diff * inv_n;
  }
  out.value *= inv_n;

  // dr_i/ds_j = sigmoid'((s_j - s_i)/T)/T for j != i, and dr_i/ds_i is minus
  // the sum of those, so grad_j = (1/T) sum_{i != j} sigmoid'(.) (upstream_i - upstream_j).
  out.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double slope = sigmoid_slope((scores[j] - scores[i]) * inv_t) * inv_t;
      const double delta = slope * (upstream[i] - upstream[j]);
      out.grad[j] += delta;
      out.grad[i] -= delta;
    }
  }
  return out;
}

std::string_view batch_shape_name(const TrainingBatch& batch) noexcept {
  struct Namer {
    std::string_view operator()(const ScorePair&) const { return "score pair"; }
    std::string_view operator()(const TripletScores&) const { return "teacher-scored triplet"; }
    std::string_view operator()(const ScoredList& l) const {
      return l.has_labels() ? "labeled list" : "unlabeled list";
    }
    std::string_view operator()(const TeacherOrderedScores&) const { return "teacher-ordered list"; }
  };
  return std::visit(Namer{}, batch);
}

LossOutput compute_loss(Objective objective, const TrainingBatch& batch, const LossConfig& cfg) {
  auto mismatch = [&]() -> DispatchError {
    return DispatchError("objective '" + std::string(objective_name(objective)) +
                         "' cannot consume a " + std::string(batch_shape_name(batch)));
  };

  switch (objective) {
    case Objective::kBce:
    case Objective::kHinge: {
      const auto* pair = std::get_if<ScorePair>(&batch);
      if (pair == nullptr) throw mismatch();
      return objective == Objective::kBce ? bce_pair(pair->s_pos, pair->s_neg)
                                          : hinge_pair(pair->s_pos, pair->s_neg, cfg);
    }
    case Objective::kInfoNce: {
      const auto* list = std::get_if<ScoredList>(&batch);
      if (list == nullptr || !list->has_labels()) throw mismatch();
      return info_nce(*list);
    }
    case Objective::kMarginMse: {
      const auto* t = std::get_if<TripletScores>(&batch);
      if (t == nullptr) throw mismatch();
      return margin_mse(t->triplet, t->s_pos, t->s_neg);
    }
    case Objective::kDistillRankNet:
    case Objective::kAdrMse: {
      const auto* ordered = std::get_if<TeacherOrderedScores>(&batch);
      if (ordered == nullptr) throw mismatch();
      return objective == Objective::kAdrMse ? adr_mse(ordered->scores, cfg)
                                             : distill_ranknet(ordered->scores);
    }
  }
  throw mismatch();
}

LossOutput loss_by_name(std::string_view name, const TrainingBatch& batch, const LossConfig& cfg) {
  const auto objective = parse_objective(name);
  if (!objective) {
    throw DispatchError("unknown objective '" + std::string(name) + "' (given a " +
                        std::string(batch_shape_name(batch)) + ")");
  }
  return compute_loss(*objective, batch, cfg);
}

}  // namespace rankforge
