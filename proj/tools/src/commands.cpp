#include "rankforge/cli/commands.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "rankforge/config.hpp"
#include "rankforge/error.hpp"
#include "rankforge/gradcheck.hpp"
#include "rankforge/io.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/planted.hpp"
#include "rankforge/stats.hpp"
#include "rankforge/trainer.hpp"

namespace rankforge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kGradcheckTolerance = 1e-5;

// A flag value that parsed but is out of its domain.
class UsageError : public Error {
 public:
  UsageError(const std::string& flag, const std::string& what) : Error(flag + ": " + what) {}
};

struct Output {
  std::ostream& out;
  std::ostream& err;
  bool records = false;

  void record(const json& j) const { out << j.dump() << '\n'; }
};

// Writes through a temporary so a failed command never leaves a truncated file.
template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
    fn(f);
    if (!f.flush()) throw InvalidInput("cannot write '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

// --- train --------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "runs";
};

int cmd_train(const TrainArgs& a, const Output& o) {
  const ExperimentConfig config = load_config(a.config);
  const ExperimentData data = load_experiment_data(config);
  const std::vector<std::uint64_t> seeds = a.seed ? std::vector<std::uint64_t>{*a.seed} : config.seeds;
  const std::string hash = config_hash(config);
  const fs::path root = fs::path(a.out) / hash;
  write_file(root / "config.txt", [&](std::ostream& f) { f << canonical_config(config); });

  if (!o.records) o.out << "seed\tbest_step\tndcg@" << config.validation.cutoff << "\tdirectory\n";
  for (std::uint64_t seed : seeds) {
    const fs::path dir = root / std::to_string(seed);
    std::ostringstream log;
    TrainState state;
    try {
      state = train(config, data.train, data.validation, seed, &log);
    } catch (const DivergedRun& e) {
      write_file(dir / "train.log", [&](std::ostream& f) { f << log.str(); });
      throw DivergedRun(e.step(), e.last_finite_loss(), "seed " + std::to_string(seed));
    }
    write_file(dir / "train.log", [&](std::ostream& f) { f << log.str(); });
    Checkpoint cp{state.best.params,
                  {state.best.step, std::string(objective_name(config.objective)), seed, state.best.validation_score}};
    write_file(dir / "checkpoint.txt", [&](std::ostream& f) { save_checkpoint(f, cp); });
    const TrecRun run = make_run(score_run(state.best.params, data.validation.features), "rankforge");
    write_file(dir / "validation.run", [&](std::ostream& f) { write_run(f, run); });

    if (o.records) {
      o.record({{"seed", seed},
                {"best_step", state.best.step},
                {"validation_score", state.best.validation_score},
                {"directory", dir.string()}});
    } else {
      o.out << seed << '\t' << state.best.step << '\t' << format_double(state.best.validation_score) << '\t'
            << dir.string() << '\n';
    }
  }
  return kExitOk;
}

// --- rerank -------------------------------------------------------------------------

struct RerankArgs {
  std::string checkpoint;
  std::string features;
  std::string out;
  std::string tag = "rankforge";
};

int cmd_rerank(const RerankArgs& a, const Output& o) {
  const Checkpoint cp = read_checkpoint_file(a.checkpoint);
  const FeatureTable table = read_features_file(a.features);
  if (!table.empty() && table.dim() != cp.params.input_dim) {
    throw InvalidInput("checkpoint expects " + std::to_string(cp.params.input_dim) +
                       " features per candidate, '" + a.features + "' has " + std::to_string(table.dim()));
  }
  const TrecRun run = make_run(score_run(cp.params, table), a.tag);
  write_file(a.out, [&](std::ostream& f) { write_run(f, run); });
  if (o.records) {
    o.record({{"queries", table.num_queries()}, {"candidates", table.num_rows()}, {"run", a.out}});
  } else {
    o.out << "queries\t" << table.num_queries() << "\ncandidates\t" << table.num_rows() << "\nrun\t" << a.out << '\n';
  }
  return kExitOk;
}

// --- eval ---------------------------------------------------------------------------

struct EvalArgs {
  std::string run;
  std::string qrels;
  std::vector<std::string> metrics;
  std::optional<std::size_t> k;
  int threshold = kDefaultPositiveThreshold;
  bool per_query = false;
};

MetricSpec resolve_metric(const std::string& text, const std::optional<std::size_t>& k) {
  if (text.find('@') != std::string::npos) return MetricSpec::parse(text);
  if (!k) return MetricSpec::parse(text + "@10");
  return MetricSpec::parse(text + "@" + std::to_string(*k));
}

int cmd_eval(const EvalArgs& a, const Output& o) {
  std::vector<MetricSpec> specs;
  try {
    for (const auto& m : a.metrics.empty() ? std::vector<std::string>{"ndcg@10"} : a.metrics) {
      specs.push_back(resolve_metric(m, a.k));
    }
  } catch (const InvalidInput& e) {
    throw UsageError("--metric", e.what());
  }
  const Run run = to_scored_lists(read_run_file(a.run));
  const JudgedPool qrels = read_qrels_file(a.qrels).pool;

  std::vector<MetricReport> reports;
  for (const auto& s : specs) {
    if (s.name == "ndcg") {
      reports.push_back(ndcg_at_k(run, qrels, s.cutoff));
    } else if (s.name == "recall") {
      reports.push_back(recall_at_k(run, qrels, s.cutoff, a.threshold));
    } else {
      reports.push_back(mrr_at_k(run, qrels, s.cutoff, a.threshold));
    }
  }

  if (!o.records) o.out << "metric\tmean\tqueries\texcluded\n";
  for (const auto& r : reports) {
    if (r.num_queries == 0) o.err << "warning: " << r.label() << " is averaged over 0 queries\n";
    if (o.records) {
      o.record({{"metric", r.label()}, {"mean", r.mean}, {"queries", r.num_queries}, {"excluded", r.num_excluded}});
    } else {
      o.out << r.label() << '\t' << format_double(r.mean) << '\t' << r.num_queries << '\t' << r.num_excluded << '\n';
    }
  }
  if (a.per_query) {
    if (!o.records) o.out << "\nmetric\tquery\tvalue\n";
    for (const auto& r : reports) {
      for (const auto& [qid, value] : r.per_query) {
        if (o.records) {
          o.record({{"metric", r.label()}, {"query", qid}, {"value", value}});
        } else {
          o.out << r.label() << '\t' << qid << '\t' << format_double(value) << '\n';
        }
      }
    }
  }
  return kExitOk;
}

// --- compare ------------------------------------------------------------------------

struct CompareArgs {
  std::string matrix;
  double alpha = 0.05;
  std::string report;
  bool lower_is_better = false;
};

json report_json(const SignificanceReport& r) {
  json methods = json::array();
  for (std::size_t j = 0; j < r.methods.size(); ++j) {
    methods.push_back({{"method", r.methods[j]}, {"avg_rank", r.avg_ranks[j]}, {"tier", r.tier_of(r.methods[j]) + 1}});
  }
  return {{"methods", methods},
          {"chi_square", r.chi_square},
          {"df", r.df},
          {"p_value", r.p_value},
          {"critical_difference", r.critical_difference},
          {"alpha", r.alpha},
          {"num_instances", r.num_instances},
          {"tiers", r.tiers}};
}

int cmd_compare(const CompareArgs& a, const Output& o) {
  const RankMatrix matrix = read_rank_matrix_file(a.matrix);
  if (std::abs(a.alpha - 0.05) > 1e-12 && std::abs(a.alpha - 0.10) > 1e-12) {
    throw UsageError("--alpha", "supported levels are 0.05 and 0.10");
  }
  const SignificanceReport report = build_report(matrix, a.alpha, !a.lower_is_better);
  if (!a.report.empty()) {
    write_file(a.report, [&](std::ostream& f) { f << report_json(report).dump(2) << '\n'; });
  }

  if (o.records) {
    for (std::size_t j = 0; j < report.methods.size(); ++j) {
      o.record({{"method", report.methods[j]},
                {"avg_rank", report.avg_ranks[j]},
                {"tier", report.tier_of(report.methods[j]) + 1}});
    }
    o.record({{"chi_square", report.chi_square},
              {"df", report.df},
              {"p_value", report.p_value},
              {"critical_difference", report.critical_difference},
              {"alpha", report.alpha},
              {"num_instances", report.num_instances}});
    return kExitOk;
  }
  o.out << "method\tavg_rank\ttier\n";
  for (std::size_t j = 0; j < report.methods.size(); ++j) {
    o.out << report.methods[j] << '\t' << format_double(report.avg_ranks[j]) << '\t'
          << report.tier_of(report.methods[j]) + 1 << '\n';
  }
  o.out << "\nchi_square\t" << format_double(report.chi_square) << "\ndf\t" << report.df << "\np_value\t"
        << format_double(report.p_value) << "\ncritical_difference\t"
        << format_double(report.critical_difference) << "\nalpha\t" << format_double(report.alpha)
        << "\ninstances\t" << report.num_instances << "\n\ntier\tmethods\n";
  for (std::size_t t = 0; t < report.tiers.size(); ++t) {
    o.out << t + 1 << '\t';
    for (std::size_t i = 0; i < report.tiers[t].size(); ++i) o.out << (i ? "," : "") << report.tiers[t][i];
    o.out << '\n';
  }
  return kExitOk;
}

// --- gradcheck ----------------------------------------------------------------------

struct GradcheckArgs {
  std::string objective;
  GradcheckOptions options;
};

int cmd_gradcheck(const GradcheckArgs& a, const Output& o) {
  const auto objective = parse_objective(a.objective);
  if (!objective) throw UsageError("--objective", "unknown objective '" + a.objective + "'");
  GradcheckResult result;
  try {
    result = check_objective(*objective, a.options);
  } catch (const InvalidInput& e) {
    throw UsageError("--n", e.what());
  } catch (const InvalidConfig& e) {
    throw UsageError("--temperature", e.what());
  }
  const bool pass = result.max_relative_error < kGradcheckTolerance;
  if (o.records) {
    o.record({{"objective", a.objective},
              {"n", a.options.list_size},
              {"trials", result.trials},
              {"max_relative_error", result.max_relative_error},
              {"pass", pass}});
  } else {
    o.out << "objective\tn\ttrials\tmax_relative_error\tstatus\n"
          << a.objective << '\t' << a.options.list_size << '\t' << result.trials << '\t'
          << format_double(result.max_relative_error) << '\t' << (pass ? "pass" : "FAIL") << '\n';
  }
  return pass ? kExitOk : kExitNumerical;
}

// --- generate -----------------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a, const Output& o) {
  PlantedSpec spec;
  if (!a.config.empty()) {
    const ExperimentConfig config = load_config(a.config);
    if (!config.data.planted) throw ConfigError("data.planted", "the config does not describe a planted problem");
    spec = *config.data.planted;
  }
  if (a.seed) spec.seed = *a.seed;
  try {
    spec.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("data.planted", e.what());
  }
  const PlantedProblem p = generate_planted(spec);
  const fs::path dir(a.out);
  const std::vector<std::pair<std::string, const PlantedSplit*>> splits = {
      {"train", &p.train}, {"val", &p.validation}, {"test", &p.test}};
  for (const auto& [name, split] : splits) {
    write_file(dir / (name + ".features.tsv"), [&](std::ostream& f) { write_features(f, split->features); });
    write_file(dir / (name + ".qrels"), [&](std::ostream& f) { write_qrels(f, split->qrels); });
  }
  write_file(dir / "train.triplets.tsv", [&](std::ostream& f) { write_triplets(f, p.triplets); });
  write_file(dir / "train.lists.tsv", [&](std::ostream& f) { write_ranked_lists(f, p.rankings); });
  write_file(dir / "teacher.checkpoint.txt",
             [&](std::ostream& f) { save_checkpoint(f, Checkpoint{p.teacher, {0, "teacher", spec.seed, 0.0}}); });
  if (o.records) {
    o.record({{"directory", dir.string()}, {"seed", spec.seed}});
  } else {
    o.out << "wrote planted problem (seed " << spec.seed << ") to " << dir.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rankforge: train, evaluate and compare distilled re-rankers"};
  app.name("rankforge");
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Tabular output as text or line-delimited JSON records")
      ->check(CLI::IsMember({"text", "records"}));

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one student per configured seed");
  train_cmd->add_option("--config", train_args.config, "Experiment YAML")->required();
  train_cmd->add_option("--seed", train_args.seed, "Train only this seed");
  train_cmd->add_option("--out", train_args.out, "Output root; results go to <out>/<config-hash>/<seed>/");

  RerankArgs rerank_args;
  auto* rerank_cmd = app.add_subcommand("rerank", "Score candidates with a checkpoint and write a run");
  rerank_cmd->add_option("--checkpoint", rerank_args.checkpoint)->required();
  rerank_cmd->add_option("--features", rerank_args.features, "Candidate feature file")->required();
  rerank_cmd->add_option("--out", rerank_args.out, "Run file to write")->required();
  rerank_cmd->add_option("--tag", rerank_args.tag, "Run tag");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run against qrels");
  eval_cmd->add_option("--run", eval_args.run)->required();
  eval_cmd->add_option("--qrels", eval_args.qrels)->required();
  eval_cmd->add_option("--metric", eval_args.metrics, "ndcg@10, recall@1000, mrr@10; repeatable");
  eval_cmd->add_option("--k", eval_args.k, "Cutoff for metrics given without @k");
  eval_cmd->add_option("--threshold", eval_args.threshold, "Minimum grade counted as relevant");
  eval_cmd->add_flag("--per-query", eval_args.per_query, "Also print every query's value");

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Friedman and Nemenyi tests over a results matrix");
  compare_cmd->add_option("--matrix", compare_args.matrix, "Tab-separated instances x methods file")->required();
  compare_cmd->add_option("--alpha", compare_args.alpha, "Significance level (0.05 or 0.10)");
  compare_cmd->add_option("--report", compare_args.report, "Write the full report as JSON");
  compare_cmd->add_flag("--lower-is-better", compare_args.lower_is_better);

  GradcheckArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of an objective's gradient");
  grad_cmd->add_option("--objective", grad_args.objective)->required();
  grad_cmd->add_option("--n", grad_args.options.list_size, "List length");
  grad_cmd->add_option("--trials", grad_args.options.trials);
  grad_cmd->add_option("--seed", grad_args.options.seed);
  grad_cmd->add_option("--temperature", grad_args.options.loss.temperature);
  grad_cmd->add_flag("--break-gradient", grad_args.options.break_gradient,
                     "Perturb the analytic gradient (the check must then fail)");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Write a planted problem as data files");
  gen_cmd->add_option("--out", gen_args.out, "Directory")->required();
  gen_cmd->add_option("--config", gen_args.config, "Take the planted settings from this experiment config");
  gen_cmd->add_option("--seed", gen_args.seed, "Override the planted seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Output o{out, err, format == "records"};
  try {
    if (train_cmd->parsed()) return cmd_train(train_args, o);
    if (rerank_cmd->parsed()) return cmd_rerank(rerank_args, o);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, o);
    if (compare_cmd->parsed()) return cmd_compare(compare_args, o);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad_args, o);
    if (gen_cmd->parsed()) return cmd_generate(gen_args, o);
  } catch (const ConfigError& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidConfig& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergedRun& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "rankforge: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace rankforge::cli
