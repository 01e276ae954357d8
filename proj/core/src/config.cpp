#include "rankforge/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rankforge/error.hpp"
#include "rankforge/io.hpp"

namespace rankforge {
namespace {

std::string join_key(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<document>" : path, "expected a mapping");
}

void reject_unknown_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (allowed.count(key) == 0) throw ConfigError(join_key(path, key), "unknown key");
  }
}

std::string scalar_text(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError(key, "expected a scalar value");
  return node.Scalar();
}

double as_double(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "expected a number, got '" + scalar_text(node, key) + "'");
  }
}

std::uint64_t as_uint(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar_text(node, key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t as_size(const YAML::Node& node, const std::string& key) {
  return static_cast<std::size_t>(as_uint(node, key));
}

int as_int(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar_text(node, key);
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::string as_string(const YAML::Node& node, const std::string& key) { return scalar_text(node, key); }

PlantedSpec parse_planted(const YAML::Node& node, const std::string& path) {
  require_map(node, path);
  reject_unknown_keys(node, path,
                      {"input_dim", "train_queries", "validation_queries", "test_queries",
                       "candidates_per_query", "teacher_norm", "query_shift_scale", "shift_alignment",
                       "grade3_depth", "grade2_depth", "grade1_depth", "triplets_per_query", "seed"});
  PlantedSpec p;
  auto k = [&](const char* key) { return join_key(path, key); };
  if (node["input_dim"]) p.input_dim = as_size(node["input_dim"], k("input_dim"));
  if (node["train_queries"]) p.train_queries = as_size(node["train_queries"], k("train_queries"));
  if (node["validation_queries"]) p.validation_queries = as_size(node["validation_queries"], k("validation_queries"));
  if (node["test_queries"]) p.test_queries = as_size(node["test_queries"], k("test_queries"));
  if (node["candidates_per_query"]) {
    p.candidates_per_query = as_size(node["candidates_per_query"], k("candidates_per_query"));
  }
  if (node["teacher_norm"]) p.teacher_norm = as_double(node["teacher_norm"], k("teacher_norm"));
  if (node["query_shift_scale"]) p.query_shift_scale = as_double(node["query_shift_scale"], k("query_shift_scale"));
  if (node["shift_alignment"]) p.shift_alignment = as_double(node["shift_alignment"], k("shift_alignment"));
  if (node["grade3_depth"]) p.grade3_depth = as_size(node["grade3_depth"], k("grade3_depth"));
  if (node["grade2_depth"]) p.grade2_depth = as_size(node["grade2_depth"], k("grade2_depth"));
  if (node["grade1_depth"]) p.grade1_depth = as_size(node["grade1_depth"], k("grade1_depth"));
  if (node["triplets_per_query"]) p.triplets_per_query = as_size(node["triplets_per_query"], k("triplets_per_query"));
  if (node["seed"]) p.seed = as_uint(node["seed"], k("seed"));
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

void parse_into(const YAML::Node& root, ExperimentConfig& cfg) {
  require_map(root, "");
  reject_unknown_keys(root, "",
                      {"objective", "seeds", "loss", "scorer", "optimizer", "sampling", "validation", "metrics", "data"});

  if (!root["objective"]) throw ConfigError("objective", "missing required key");
  {
    const std::string name = as_string(root["objective"], "objective");
    const auto objective = parse_objective(name);
    if (!objective) {
      throw ConfigError("objective", "unknown objective '" + name +
                                         "' (expected bce, hinge, infonce, margin_mse, distill_ranknet or adr_mse)");
    }
    cfg.objective = *objective;
  }

  if (const auto seeds = root["seeds"]) {
    if (!seeds.IsSequence()) throw ConfigError("seeds", "expected a list of integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      cfg.seeds.push_back(as_uint(seeds[i], "seeds[" + std::to_string(i) + "]"));
    }
  }

  if (const auto loss = root["loss"]) {
    require_map(loss, "loss");
    reject_unknown_keys(loss, "loss", {"temperature", "margin"});
    if (loss["temperature"]) cfg.loss.temperature = as_double(loss["temperature"], "loss.temperature");
    if (loss["margin"]) cfg.loss.margin = as_double(loss["margin"], "loss.margin");
  }

  if (const auto scorer = root["scorer"]) {
    require_map(scorer, "scorer");
    reject_unknown_keys(scorer, "scorer", {"kind", "input_dim", "hidden_width"});
    if (scorer["kind"]) {
      const std::string kind = as_string(scorer["kind"], "scorer.kind");
      const auto parsed = parse_scorer_kind(kind);
      if (!parsed) throw ConfigError("scorer.kind", "unknown scorer kind '" + kind + "' (expected linear or mlp1)");
      cfg.scorer.kind = *parsed;
    }
    if (scorer["input_dim"]) cfg.scorer.input_dim = as_size(scorer["input_dim"], "scorer.input_dim");
    if (scorer["hidden_width"]) cfg.scorer.hidden_width = as_size(scorer["hidden_width"], "scorer.hidden_width");
  }

  if (const auto opt = root["optimizer"]) {
    require_map(opt, "optimizer");
    reject_unknown_keys(opt, "optimizer",
                        {"learning_rate", "batch_docs", "warmup_steps", "max_steps", "weight_decay", "beta1", "beta2",
                         "epsilon"});
    auto& o = cfg.optimizer;
    if (opt["learning_rate"]) o.learning_rate = as_double(opt["learning_rate"], "optimizer.learning_rate");
    if (opt["batch_docs"]) o.batch_docs = as_size(opt["batch_docs"], "optimizer.batch_docs");
    if (opt["warmup_steps"]) o.warmup_steps = as_size(opt["warmup_steps"], "optimizer.warmup_steps");
    if (opt["max_steps"]) o.max_steps = as_size(opt["max_steps"], "optimizer.max_steps");
    if (opt["weight_decay"]) o.weight_decay = as_double(opt["weight_decay"], "optimizer.weight_decay");
    if (opt["beta1"]) o.beta1 = as_double(opt["beta1"], "optimizer.beta1");
    if (opt["beta2"]) o.beta2 = as_double(opt["beta2"], "optimizer.beta2");
    if (opt["epsilon"]) o.epsilon = as_double(opt["epsilon"], "optimizer.epsilon");
  }

  if (const auto s = root["sampling"]) {
    require_map(s, "sampling");
    reject_unknown_keys(s, "sampling", {"negatives", "list_depth"});
    if (s["negatives"]) cfg.sampling.negatives = as_size(s["negatives"], "sampling.negatives");
    if (s["list_depth"]) cfg.sampling.list_depth = as_size(s["list_depth"], "sampling.list_depth");
  }

  if (const auto v = root["validation"]) {
    require_map(v, "validation");
    reject_unknown_keys(v, "validation", {"every", "cutoff"});
    if (v["every"]) cfg.validation.every = as_size(v["every"], "validation.every");
    if (v["cutoff"]) cfg.validation.cutoff = as_size(v["cutoff"], "validation.cutoff");
  }

  if (const auto m = root["metrics"]) {
    if (!m.IsSequence()) throw ConfigError("metrics", "expected a list such as [ndcg@10, recall@1000]");
    cfg.metrics.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string key = "metrics[" + std::to_string(i) + "]";
      try {
        cfg.metrics.push_back(MetricSpec::parse(as_string(m[i], key)));
      } catch (const InvalidInput& e) {
        throw ConfigError(key, e.what());
      }
    }
  }

  if (!root["data"]) throw ConfigError("data", "missing required key");
  const auto data = root["data"];
  require_map(data, "data");
  reject_unknown_keys(data, "data",
                      {"features", "qrels", "triplets", "ranked_lists", "validation_features", "validation_qrels",
                       "positive_threshold", "planted"});
  auto& d = cfg.data;
  if (data["features"]) d.features = as_string(data["features"], "data.features");
  if (data["qrels"]) d.qrels = as_string(data["qrels"], "data.qrels");
  if (data["triplets"]) d.triplets = as_string(data["triplets"], "data.triplets");
  if (data["ranked_lists"]) d.ranked_lists = as_string(data["ranked_lists"], "data.ranked_lists");
  if (data["validation_features"]) d.validation_features = as_string(data["validation_features"], "data.validation_features");
  if (data["validation_qrels"]) d.validation_qrels = as_string(data["validation_qrels"], "data.validation_qrels");
  if (data["positive_threshold"]) d.positive_threshold = as_int(data["positive_threshold"], "data.positive_threshold");
  if (data["planted"]) d.planted = parse_planted(data["planted"], "data.planted");
}

void check_exists(const ExperimentConfig& cfg, const std::string& path, const std::string& key) {
  if (path.empty()) return;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(cfg.resolve(path), ec)) {
    throw ConfigError(key, "file not found: " + cfg.resolve(path).string());
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

MetricSpec MetricSpec::parse(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) throw InvalidInput("metric '" + std::string(text) + "' needs a cutoff, e.g. ndcg@10");
  MetricSpec spec;
  spec.name = std::string(text.substr(0, at));
  if (spec.name != "ndcg" && spec.name != "recall" && spec.name != "mrr") {
    throw InvalidInput("unknown metric '" + spec.name + "' (expected ndcg, recall or mrr)");
  }
  const auto k = text.substr(at + 1);
  auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), spec.cutoff);
  if (k.empty() || ec != std::errc() || ptr != k.data() + k.size() || spec.cutoff < 1) {
    throw InvalidInput("invalid cutoff in metric '" + std::string(text) + "'");
  }
  return spec;
}

std::filesystem::path ExperimentConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

void ExperimentConfig::validate() const {
  try {
    loss.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigError(loss.temperature > 0.0 && std::isfinite(loss.temperature) ? "loss.margin" : "loss.temperature",
                      e.what());
  }
  const auto& o = optimizer;
  if (!(o.learning_rate > 0.0) || !std::isfinite(o.learning_rate)) {
    throw ConfigError("optimizer.learning_rate", "must be positive, got " + format_double(o.learning_rate));
  }
  if (o.batch_docs == 0) throw ConfigError("optimizer.batch_docs", "must be positive");
  if (o.warmup_steps == 0) throw ConfigError("optimizer.warmup_steps", "must be positive");
  if (!(o.weight_decay >= 0.0) || !std::isfinite(o.weight_decay)) {
    throw ConfigError("optimizer.weight_decay", "must be non-negative");
  }
  if (!(o.beta1 > 0.0 && o.beta1 < 1.0)) throw ConfigError("optimizer.beta1", "must be in (0, 1)");
  if (!(o.beta2 > 0.0 && o.beta2 < 1.0)) throw ConfigError("optimizer.beta2", "must be in (0, 1)");
  if (!(o.epsilon > 0.0) || !std::isfinite(o.epsilon)) throw ConfigError("optimizer.epsilon", "must be positive");

  if (scorer.kind == ScorerKind::kMlp1 && scorer.hidden_width == 0) {
    throw ConfigError("scorer.hidden_width", "mlp1 needs a positive hidden width");
  }
  if (scorer.kind == ScorerKind::kLinear && scorer.hidden_width != 0) {
    throw ConfigError("scorer.hidden_width", "linear scorers take no hidden width");
  }
  if (sampling.negatives == 0) throw ConfigError("sampling.negatives", "must be positive");
  if (sampling.list_depth < 2) throw ConfigError("sampling.list_depth", "must be at least 2");
  if (validation.every == 0) throw ConfigError("validation.every", "must be positive");
  if (validation.cutoff == 0) throw ConfigError("validation.cutoff", "must be positive");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (data.positive_threshold < 1) throw ConfigError("data.positive_threshold", "must be at least 1");

  if (data.planted) {
    for (const auto& [value, key] : {std::pair{&data.features, "data.features"},
                                     {&data.qrels, "data.qrels"},
                                     {&data.triplets, "data.triplets"},
                                     {&data.ranked_lists, "data.ranked_lists"},
                                     {&data.validation_features, "data.validation_features"},
                                     {&data.validation_qrels, "data.validation_qrels"}}) {
      if (!value->empty()) throw ConfigError(key, "cannot be combined with data.planted");
    }
    if (scorer.input_dim != 0 && scorer.input_dim != data.planted->input_dim) {
      throw ConfigError("scorer.input_dim", "does not match data.planted.input_dim");
    }
    return;
  }
  if (data.features.empty()) throw ConfigError("data.features", "missing required key");
  if (data.qrels.empty()) throw ConfigError("data.qrels", "missing required key");
  if (data.validation_features.empty()) throw ConfigError("data.validation_features", "missing required key");
  if (data.validation_qrels.empty()) throw ConfigError("data.validation_qrels", "missing required key");
  if (objective == Objective::kMarginMse && data.triplets.empty()) {
    throw ConfigError("data.triplets", "missing required key (needed by margin_mse)");
  }
  if ((objective == Objective::kDistillRankNet || objective == Objective::kAdrMse) && data.ranked_lists.empty()) {
    throw ConfigError("data.ranked_lists",
                      "missing required key (needed by " + std::string(objective_name(objective)) + ")");
  }
}

ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir, bool check_paths) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("malformed YAML: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    parse_into(root, cfg);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("malformed YAML: ") + e.what());
  }
  cfg.validate();
  if (check_paths && !cfg.data.planted) {
    check_exists(cfg, cfg.data.features, "data.features");
    check_exists(cfg, cfg.data.qrels, "data.qrels");
    check_exists(cfg, cfg.data.triplets, "data.triplets");
    check_exists(cfg, cfg.data.ranked_lists, "data.ranked_lists");
    check_exists(cfg, cfg.data.validation_features, "data.validation_features");
    check_exists(cfg, cfg.data.validation_qrels, "data.validation_qrels");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), true);
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "objective=" << objective_name(c.objective) << '\n';
  out << "seeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
  out << '\n';
  out << "loss.temperature=" << format_double(c.loss.temperature) << '\n'
      << "loss.margin=" << format_double(c.loss.margin) << '\n'
      << "scorer.kind=" << scorer_kind_name(c.scorer.kind) << '\n'
      << "scorer.input_dim=" << c.scorer.input_dim << '\n'
      << "scorer.hidden_width=" << c.scorer.hidden_width << '\n'
      << "optimizer.learning_rate=" << format_double(c.optimizer.learning_rate) << '\n'
      << "optimizer.batch_docs=" << c.optimizer.batch_docs << '\n'
      << "optimizer.warmup_steps=" << c.optimizer.warmup_steps << '\n'
      << "optimizer.max_steps=" << c.optimizer.max_steps << '\n'
      << "optimizer.weight_decay=" << format_double(c.optimizer.weight_decay) << '\n'
      << "optimizer.beta1=" << format_double(c.optimizer.beta1) << '\n'
      << "optimizer.beta2=" << format_double(c.optimizer.beta2) << '\n'
      << "optimizer.epsilon=" << format_double(c.optimizer.epsilon) << '\n'
      << "sampling.negatives=" << c.sampling.negatives << '\n'
      << "sampling.list_depth=" << c.sampling.list_depth << '\n'
      << "validation.every=" << c.validation.every << '\n'
      << "validation.cutoff=" << c.validation.cutoff << '\n';
  out << "metrics=";
  for (std::size_t i = 0; i < c.metrics.size(); ++i) out << (i ? "," : "") << c.metrics[i].label();
  out << '\n';
  out << "data.positive_threshold=" << c.data.positive_threshold << '\n';
  if (c.data.planted) {
    const auto& p = *c.data.planted;
    out << "data.planted.input_dim=" << p.input_dim << '\n'
        << "data.planted.train_queries=" << p.train_queries << '\n'
        << "data.planted.validation_queries=" << p.validation_queries << '\n'
        << "data.planted.test_queries=" << p.test_queries << '\n'
        << "data.planted.candidates_per_query=" << p.candidates_per_query << '\n'
        << "data.planted.teacher_norm=" << format_double(p.teacher_norm) << '\n'
        << "data.planted.query_shift_scale=" << format_double(p.query_shift_scale) << '\n'
        << "data.planted.shift_alignment=" << format_double(p.shift_alignment) << '\n'
        << "data.planted.grade_depths=" << p.grade3_depth << ',' << p.grade2_depth << ',' << p.grade1_depth << '\n'
        << "data.planted.triplets_per_query=" << p.triplets_per_query << '\n'
        << "data.planted.seed=" << p.seed << '\n';
  } else {
    out << "data.features=" << c.data.features << '\n'
        << "data.qrels=" << c.data.qrels << '\n'
        << "data.triplets=" << c.data.triplets << '\n'
        << "data.ranked_lists=" << c.data.ranked_lists << '\n'
        << "data.validation_features=" << c.data.validation_features << '\n'
        << "data.validation_qrels=" << c.data.validation_qrels << '\n';
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(config))));
  return buf;
}

}  // namespace rankforge
