#include "rankforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "rankforge/error.hpp"
#include "rankforge/io.hpp"
#include "rankforge/losses.hpp"

namespace rankforge {
namespace {

// One query-level loss term: the documents it scores plus what the objective
// needs besides their scores.
struct Unit {
  std::string query_id;
  std::vector<std::string> ids;
  std::vector<FeatureVector> docs;
  std::vector<int> labels;                // infonce
  const DistillTriplet* triplet = nullptr;  // margin_mse
};

using Batch = std::vector<Unit>;

class BatchSampler {
 public:
  BatchSampler(const ExperimentConfig& config, const TrainingData& data) : config_(config), data_(data) {
    switch (config.objective) {
      case Objective::kBce:
      case Objective::kHinge:
      case Objective::kInfoNce: index_labeled_queries(); break;
      case Objective::kMarginMse: build_triplet_units(); break;
      case Objective::kDistillRankNet:
      case Objective::kAdrMse: build_list_units(); break;
    }
  }

  Batch draw(std::mt19937_64& rng) const {
    Batch batch;
    const std::size_t units = std::max<std::size_t>(1, config_.optimizer.batch_docs / docs_per_unit_);
    batch.reserve(units);
    for (std::size_t u = 0; u < units; ++u) {
      if (!fixed_units_.empty()) {
        batch.push_back(fixed_units_[pick(rng, fixed_units_.size())]);
      } else {
        batch.push_back(draw_labeled(rng));
      }
    }
    return batch;
  }

 private:
  struct LabeledQuery {
    const QueryCandidates* query;
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
  };

  static std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }

  void index_labeled_queries() {
    for (const auto& q : data_.features.queries()) {
      LabeledQuery lq{&q, {}, {}};
      for (std::size_t i = 0; i < q.passage_ids.size(); ++i) {
        if (data_.qrels.binary_label(q.query_id, q.passage_ids[i], data_.positive_threshold) != 0) {
          lq.positives.push_back(i);
        } else {
          lq.negatives.push_back(i);
        }
      }
      if (!lq.positives.empty() && !lq.negatives.empty()) labeled_.push_back(std::move(lq));
    }
    if (labeled_.empty()) {
      throw InvalidInput("no training query has both a relevant and a non-relevant candidate");
    }
    docs_per_unit_ = config_.objective == Objective::kInfoNce ? 1 + config_.sampling.negatives : 2;
  }

  void build_triplet_units() {
    if (data_.triplets.empty()) throw InvalidInput("margin_mse needs at least one teacher triplet");
    for (const auto& t : data_.triplets) {
      t.validate();
      Unit u;
      u.query_id = t.query_id;
      u.ids = {t.pos_id, t.neg_id};
      u.docs = {data_.features.at(t.query_id, t.pos_id), data_.features.at(t.query_id, t.neg_id)};
      u.triplet = &t;
      fixed_units_.push_back(std::move(u));
    }
    docs_per_unit_ = 2;
  }

  void build_list_units() {
    if (data_.rankings.empty()) {
      throw InvalidInput(std::string(objective_name(config_.objective)) + " needs at least one teacher ranking");
    }
    std::size_t longest = 0;
    for (const auto& r : data_.rankings) {
      const std::size_t depth = std::min(r.size(), config_.sampling.list_depth);
      Unit u;
      u.query_id = r.query_id();
      for (std::size_t i = 0; i < depth; ++i) {
        u.ids.push_back(r.ordered_ids()[i]);
        u.docs.push_back(data_.features.at(r.query_id(), r.ordered_ids()[i]));
      }
      longest = std::max(longest, depth);
      fixed_units_.push_back(std::move(u));
    }
    docs_per_unit_ = longest;
  }

  Unit draw_labeled(std::mt19937_64& rng) const {
    const LabeledQuery& lq = labeled_[pick(rng, labeled_.size())];
    const QueryCandidates& q = *lq.query;
    Unit u;
    u.query_id = q.query_id;
    auto add = [&](std::size_t i, int label) {
      u.ids.push_back(q.passage_ids[i]);
      u.docs.push_back(q.features[i]);
      u.labels.push_back(label);
    };
    add(lq.positives[pick(rng, lq.positives.size())], 1);
    if (config_.objective != Objective::kInfoNce) {
      add(lq.negatives[pick(rng, lq.negatives.size())], 0);
      return u;
    }
    // Negatives without replacement (partial Fisher-Yates); fewer if the query has fewer.
    std::vector<std::size_t> pool = lq.negatives;
    const std::size_t count = std::min(config_.sampling.negatives, pool.size());
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t j = k + pick(rng, pool.size() - k);
      std::swap(pool[k], pool[j]);
      add(pool[k], 0);
    }
    return u;
  }

  const ExperimentConfig& config_;
  const TrainingData& data_;
  std::vector<LabeledQuery> labeled_;
  std::vector<Unit> fixed_units_;
  std::size_t docs_per_unit_ = 2;
};

LossOutput unit_loss(const ExperimentConfig& config, const Unit& unit, const std::vector<double>& scores) {
  switch (config.objective) {
    case Objective::kBce:
    case Objective::kHinge:
      return compute_loss(config.objective, ScorePair{scores[0], scores[1]}, config.loss);
    case Objective::kInfoNce:
      return compute_loss(config.objective, ScoredList(unit.query_id, unit.ids, scores, unit.labels), config.loss);
    case Objective::kMarginMse:
      return compute_loss(config.objective, TripletScores{*unit.triplet, scores[0], scores[1]}, config.loss);
    case Objective::kDistillRankNet:
    case Objective::kAdrMse:
      return compute_loss(config.objective, TeacherOrderedScores{scores}, config.loss);
  }
  throw DispatchError("unhandled objective");
}

struct BatchResult {
  double loss = 0.0;
  std::vector<double> grad;  // parameter gradient
};

BatchResult evaluate_batch(const ExperimentConfig& config, const ScorerParams& params, const Batch& batch,
                           bool with_grad) {
  std::vector<LossOutput> outputs;
  std::vector<std::size_t> docs;
  outputs.reserve(batch.size());
  docs.reserve(batch.size());
  for (const Unit& unit : batch) {
    const auto scores = score_all(params, unit.docs);
    if (!std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); })) {
      return BatchResult{std::nan(""), {}};  // the caller reports the divergence
    }
    outputs.push_back(unit_loss(config, unit, scores));
    docs.push_back(unit.docs.size());
  }
  const LossOutput total = normalize_batch_loss(outputs, docs);
  BatchResult result;
  result.loss = total.value;
  if (!with_grad) return result;
  result.grad.assign(params.weights.size(), 0.0);
  std::size_t offset = 0;
  for (std::size_t u = 0; u < batch.size(); ++u) {
    const std::span<const double> upstream(total.grad.data() + offset, docs[u]);
    const auto g = backward(params, batch[u].docs, upstream);
    for (std::size_t i = 0; i < g.size(); ++i) result.grad[i] += g[i];
    offset += docs[u];
  }
  return result;
}

constexpr std::size_t kMonitorBatches = 8;
constexpr std::uint64_t kMonitorSeedMix = 0x9e3779b97f4a7c15ULL;

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  ExperimentData data;
  data.train.positive_threshold = config.data.positive_threshold;
  if (config.data.planted) {
    PlantedProblem problem = generate_planted(*config.data.planted);
    data.train.features = problem.train.features;
    data.train.qrels = problem.train.qrels;
    data.train.triplets = problem.triplets;
    data.train.rankings = problem.rankings;
    data.validation.features = problem.validation.features;
    data.validation.qrels = problem.validation.qrels;
    data.planted = std::move(problem);
    return data;
  }
  const auto& d = config.data;
  data.train.features = read_features_file(config.resolve(d.features));
  data.train.qrels = read_qrels_file(config.resolve(d.qrels)).pool;
  if (!d.triplets.empty()) data.train.triplets = read_triplets_file(config.resolve(d.triplets));
  if (!d.ranked_lists.empty()) data.train.rankings = read_ranked_lists_file(config.resolve(d.ranked_lists));
  data.validation.features = read_features_file(config.resolve(d.validation_features));
  data.validation.qrels = read_qrels_file(config.resolve(d.validation_qrels)).pool;
  return data;
}

TrainState adamw_step(TrainState state, std::span<const double> grad) {
  adamw_update(state.opt, state.params.weights, grad);
  return state;
}

LossOutput normalize_batch_loss(std::span<const LossOutput> per_query, std::span<const std::size_t> docs_per_query) {
  if (per_query.size() != docs_per_query.size()) {
    throw InvalidInput("normalize_batch_loss: " + std::to_string(per_query.size()) + " losses but " +
                       std::to_string(docs_per_query.size()) + " document counts");
  }
  const std::size_t total_docs = std::accumulate(docs_per_query.begin(), docs_per_query.end(), std::size_t{0});
  if (total_docs == 0) throw InvalidInput("normalize_batch_loss: batch has no documents");
  const double scale = 1.0 / static_cast<double>(total_docs);
  LossOutput out;
  out.grad.reserve(total_docs);
  for (std::size_t q = 0; q < per_query.size(); ++q) {
    if (per_query[q].grad.size() != docs_per_query[q]) {
      throw InvalidInput("normalize_batch_loss: query " + std::to_string(q) + " has " +
                         std::to_string(per_query[q].grad.size()) + " gradient entries for " +
                         std::to_string(docs_per_query[q]) + " documents");
    }
    out.value += per_query[q].value;
    for (double g : per_query[q].grad) out.grad.push_back(g * scale);
  }
  out.value *= scale;
  return out;
}

Run score_run(const ScorerParams& params, const FeatureTable& features) {
  Run run;
  run.reserve(features.num_queries());
  for (const auto& q : features.queries()) {
    run.emplace_back(q.query_id, q.passage_ids, score_all(params, q.features));
  }
  return run;
}

double validation_score(const ScorerParams& params, const ValidationSet& validation, std::size_t cutoff) {
  return ndcg_at_k(score_run(params, validation.features), validation.qrels, cutoff).mean;
}

TrainState train(const ExperimentConfig& config, const TrainingData& data, const ValidationSet& validation,
                 std::uint64_t seed, std::ostream* log) {
  config.validate();
  if (data.features.empty()) throw InvalidInput("training data has no queries");
  if (validation.features.empty()) throw InvalidInput("validation set has no queries");
  const std::size_t dim = data.features.dim();
  if (config.scorer.input_dim != 0 && config.scorer.input_dim != dim) {
    throw InvalidInput("scorer.input_dim is " + std::to_string(config.scorer.input_dim) +
                       " but the training features have dimension " + std::to_string(dim));
  }
  if (validation.features.dim() != dim) {
    throw InvalidInput("validation features have dimension " + std::to_string(validation.features.dim()) +
                       ", training features " + std::to_string(dim));
  }

  TrainState state;
  state.seed = seed;
  state.params = init_params(config.scorer.kind, dim, config.scorer.hidden_width, seed);
  state.opt = OptimizerState::init(config.optimizer, state.params.weights.size());

  const BatchSampler sampler(config, data);
  std::mt19937_64 rng(seed);
  std::mt19937_64 monitor_rng(seed ^ kMonitorSeedMix);
  std::vector<Batch> monitor;
  for (std::size_t i = 0; i < kMonitorBatches; ++i) monitor.push_back(sampler.draw(monitor_rng));

  const std::size_t cutoff = config.validation.cutoff;
  if (log != nullptr) *log << "step\ttrain_loss\tndcg@" << cutoff << "\tbest\n";

  double last_finite = std::nan("");
  auto run_validation = [&](std::size_t step) {
    double monitor_loss = 0.0;
    for (const Batch& b : monitor) monitor_loss += evaluate_batch(config, state.params, b, false).loss;
    monitor_loss /= static_cast<double>(monitor.size());
    if (!std::isfinite(monitor_loss)) throw DivergedRun(step, last_finite, "non-finite loss at validation");
    ValidationRecord rec{step, monitor_loss, validation_score(state.params, validation, cutoff), false};
    if (state.history.empty() || rec.validation_score > state.best.validation_score) {
      rec.is_best = true;
      state.best = BestCheckpoint{state.params, rec.validation_score, step};
    }
    state.history.push_back(rec);
    if (log != nullptr) {
      *log << rec.step << '\t' << format_double(rec.train_loss) << '\t' << format_double(rec.validation_score)
           << '\t' << (rec.is_best ? 1 : 0) << '\n';
    }
  };

  run_validation(0);
  const std::size_t max_steps = config.optimizer.max_steps;
  for (std::size_t step = 1; step <= max_steps; ++step) {
    const BatchResult r = evaluate_batch(config, state.params, sampler.draw(rng), true);
    if (!std::isfinite(r.loss)) throw DivergedRun(step, last_finite, "non-finite loss");
    if (!std::all_of(r.grad.begin(), r.grad.end(), [](double g) { return std::isfinite(g); })) {
      throw DivergedRun(step, last_finite, "non-finite gradient");
    }
    adamw_update(state.opt, state.params.weights, r.grad);
    last_finite = r.loss;
    if (step % config.validation.every == 0 || step == max_steps) run_validation(step);
  }
  return state;
}

}  // namespace rankforge
