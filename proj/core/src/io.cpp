#include "rankforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "rankforge/error.hpp"

namespace rankforge {
namespace {

// Reads lines, strips a trailing '\r', skips blank lines, tracks line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  return v;
}

long long parse_integer(std::string_view token, std::size_t line, const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  return v;
}

void require_nonempty(std::string_view token, std::size_t line, const char* what) {
  if (token.empty()) throw ParseError(line, std::string("empty ") + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  return in;
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

// --- qrels -------------------------------------------------------------------

QrelsParseResult parse_qrels(std::istream& in) {
  QrelsParseResult result;
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const auto fields = split_whitespace(line);
    if (fields.size() != 4) {
      throw ParseError(reader.line_no(), "qrels line needs 4 fields (qid 0 docid grade), got " +
                                             std::to_string(fields.size()));
    }
    const long long grade = parse_integer(fields[3], reader.line_no(), "relevance grade");
    if (grade < 0) throw ParseError(reader.line_no(), "negative relevance grade " + std::to_string(grade));
    if (grade > 1000000) throw ParseError(reader.line_no(), "relevance grade out of range");
    if (result.pool.set(std::string(fields[0]), std::string(fields[2]), static_cast<int>(grade))) {
      ++result.duplicates;
    }
  }
  return result;
}

void write_qrels(std::ostream& out, const JudgedPool& pool) {
  for (const auto& [qid, judged] : pool.queries()) {
    for (const auto& [pid, grade] : judged) out << qid << " 0 " << pid << ' ' << grade << '\n';
  }
}

// --- run ---------------------------------------------------------------------

TrecRun parse_run(std::istream& in) {
  TrecRun run;
  bool have_tag = false;
  std::unordered_map<std::string, std::size_t> query_index;
  std::vector<std::vector<std::size_t>> entry_lines;
  std::vector<std::unordered_set<std::string>> seen_docs;

  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_no();
    const auto f = split_whitespace(line);
    if (f.size() != 6) {
      throw ParseError(ln, "run line needs 6 fields (qid Q0 docid rank score tag), got " + std::to_string(f.size()));
    }
    const long long rank = parse_integer(f[3], ln, "rank");
    if (rank < 1) throw ParseError(ln, "rank must be at least 1");
    const double score = parse_double(f[4], ln, "score");
    if (!have_tag) {
      run.tag = std::string(f[5]);
      have_tag = true;
    } else if (f[5] != run.tag) {
      throw ParseError(ln, "run tag '" + std::string(f[5]) + "' differs from '" + run.tag + "'");
    }

    auto [it, inserted] = query_index.try_emplace(std::string(f[0]), run.queries.size());
    if (inserted) {
      run.queries.push_back(RunQuery{std::string(f[0]), {}});
      entry_lines.emplace_back();
      seen_docs.emplace_back();
    }
    const std::size_t qi = it->second;
    if (!seen_docs[qi].insert(std::string(f[2])).second) {
      throw ParseError(ln, "document '" + std::string(f[2]) + "' appears twice for query '" + std::string(f[0]) + "'");
    }
    run.queries[qi].entries.push_back(RunEntry{std::string(f[2]), static_cast<std::size_t>(rank), score});
    entry_lines[qi].push_back(ln);
  }

  for (std::size_t qi = 0; qi < run.queries.size(); ++qi) {
    auto& entries = run.queries[qi].entries;
    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return entries[a].rank < entries[b].rank; });
    std::vector<RunEntry> sorted;
    sorted.reserve(entries.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const RunEntry& e = entries[order[pos]];
      if (e.rank != pos + 1) {
        throw ParseError(entry_lines[qi][order[pos]], "query '" + run.queries[qi].query_id + "': rank " +
                                                         std::to_string(e.rank) + " where " +
                                                         std::to_string(pos + 1) + " was expected");
      }
      sorted.push_back(e);
    }
    entries = std::move(sorted);
  }
  return run;
}

void write_run(std::ostream& out, const TrecRun& run) {
  for (const auto& q : run.queries) {
    for (std::size_t i = 0; i < q.entries.size(); ++i) {
      if (q.entries[i].rank != i + 1) {
        throw InvalidInput("write_run: query '" + q.query_id + "' has rank " + std::to_string(q.entries[i].rank) +
                           " at position " + std::to_string(i + 1));
      }
    }
  }
  for (const auto& q : run.queries) {
    for (const auto& e : q.entries) {
      out << q.query_id << " Q0 " << e.passage_id << ' ' << e.rank << ' ' << format_fixed6(e.score) << ' '
          << run.tag << '\n';
    }
  }
}

TrecRun make_run(const Run& lists, std::string tag) {
  TrecRun run;
  run.tag = std::move(tag);
  for (const auto& list : lists) {
    RunQuery q{list.query_id(), {}};
    const auto order = evaluation_order(list);
    q.entries.reserve(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      q.entries.push_back(RunEntry{list.passage_ids()[order[r]], r + 1, list.scores()[order[r]]});
    }
    run.queries.push_back(std::move(q));
  }
  return run;
}

Run to_scored_lists(const TrecRun& run) {
  Run lists;
  lists.reserve(run.queries.size());
  for (const auto& q : run.queries) {
    if (q.entries.empty()) continue;
    std::vector<std::string> ids;
    std::vector<double> scores;
    ids.reserve(q.entries.size());
    scores.reserve(q.entries.size());
    for (const auto& e : q.entries) {
      ids.push_back(e.passage_id);
      scores.push_back(e.score);
    }
    lists.emplace_back(q.query_id, std::move(ids), std::move(scores));
  }
  return lists;
}

// --- triplets ------------------------------------------------------------------

std::vector<DistillTriplet> parse_triplets(std::istream& in) {
  std::vector<DistillTriplet> out;
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_no();
    const auto f = split_tabs(line);
    if (f.size() != 5) {
      throw ParseError(ln, "triplet line needs 5 tab-separated fields, got " + std::to_string(f.size()));
    }
    require_nonempty(f[0], ln, "query id");
    require_nonempty(f[1], ln, "positive id");
    require_nonempty(f[2], ln, "negative id");
    DistillTriplet t{std::string(f[0]), std::string(f[1]), std::string(f[2]),
                     parse_double(f[3], ln, "teacher score"), parse_double(f[4], ln, "teacher score")};
    if (t.pos_id == t.neg_id) throw ParseError(ln, "positive and negative are both '" + t.pos_id + "'");
    out.push_back(std::move(t));
  }
  return out;
}

void write_triplets(std::ostream& out, const std::vector<DistillTriplet>& triplets) {
  for (const auto& t : triplets) {
    out << t.query_id << '\t' << t.pos_id << '\t' << t.neg_id << '\t' << format_double(t.teacher_pos) << '\t'
        << format_double(t.teacher_neg) << '\n';
  }
}

// --- ranked lists ----------------------------------------------------------------

std::vector<TeacherRanking> parse_ranked_lists(std::istream& in) {
  std::vector<TeacherRanking> out;
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_no();
    const auto f = split_tabs(line);
    require_nonempty(f[0], ln, "query id");
    if (f.size() < 3) {
      throw ParseError(ln, "ranked list for '" + std::string(f[0]) + "' needs at least 2 passages");
    }
    std::vector<std::string> ids;
    ids.reserve(f.size() - 1);
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 1; i < f.size(); ++i) {
      require_nonempty(f[i], ln, "passage id");
      if (!seen.insert(f[i]).second) {
        throw ParseError(ln, "passage '" + std::string(f[i]) + "' listed twice");
      }
      ids.emplace_back(f[i]);
    }
    out.emplace_back(std::string(f[0]), std::move(ids));
  }
  return out;
}

void write_ranked_lists(std::ostream& out, const std::vector<TeacherRanking>& rankings) {
  for (const auto& r : rankings) {
    out << r.query_id();
    for (const auto& id : r.ordered_ids()) out << '\t' << id;
    out << '\n';
  }
}

// --- features --------------------------------------------------------------------

FeatureTable parse_features(std::istream& in) {
  FeatureTable table;
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_no();
    const auto f = split_tabs(line);
    if (f.size() < 3) throw ParseError(ln, "feature line needs qid, pid and at least one value");
    require_nonempty(f[0], ln, "query id");
    require_nonempty(f[1], ln, "passage id");
    FeatureVector x;
    x.reserve(f.size() - 2);
    for (std::size_t i = 2; i < f.size(); ++i) x.push_back(parse_double(f[i], ln, "feature value"));
    try {
      table.add(std::string(f[0]), std::string(f[1]), std::move(x));
    } catch (const InvalidInput& e) {
      throw ParseError(ln, e.what());  // dimension change or duplicate row
    }
  }
  return table;
}

void write_features(std::ostream& out, const FeatureTable& table) {
  for (const auto& q : table.queries()) {
    for (std::size_t i = 0; i < q.passage_ids.size(); ++i) {
      out << q.query_id << '\t' << q.passage_ids[i];
      for (double v : q.features[i]) out << '\t' << format_double(v);
      out << '\n';
    }
  }
}

// --- results matrices ------------------------------------------------------------

RankMatrix parse_rank_matrix(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(0, "results matrix is empty");
  const auto header = split_tabs(line);
  if (header.size() < 2) throw ParseError(reader.line_no(), "header needs a label column and at least one method");
  std::vector<std::string> methods;
  for (std::size_t j = 1; j < header.size(); ++j) {
    require_nonempty(header[j], reader.line_no(), "method name");
    if (std::find(methods.begin(), methods.end(), header[j]) != methods.end()) {
      throw ParseError(reader.line_no(), "duplicate method '" + std::string(header[j]) + "'");
    }
    methods.emplace_back(header[j]);
  }
  std::vector<std::string> instances;
  std::vector<std::vector<double>> values;
  std::unordered_set<std::string> seen;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_no();
    const auto f = split_tabs(line);
    if (f.size() != header.size()) {
      throw ParseError(ln, "row has " + std::to_string(f.size() - 1) + " values, header names " +
                               std::to_string(methods.size()) + " methods");
    }
    require_nonempty(f[0], ln, "instance name");
    if (!seen.emplace(std::string(f[0])).second) throw ParseError(ln, "duplicate instance '" + std::string(f[0]) + "'");
    std::vector<double> row;
    row.reserve(methods.size());
    for (std::size_t j = 1; j < f.size(); ++j) row.push_back(parse_double(f[j], ln, "result value"));
    instances.emplace_back(f[0]);
    values.push_back(std::move(row));
  }
  if (instances.empty()) throw ParseError(reader.line_no(), "results matrix has no rows");
  try {
    return RankMatrix(std::move(methods), std::move(instances), std::move(values));
  } catch (const InvalidInput& e) {
    throw ParseError(0, e.what());
  }
}

void write_rank_matrix(std::ostream& out, const RankMatrix& matrix) {
  out << "instance";
  for (const auto& m : matrix.method_names()) out << '\t' << m;
  out << '\n';
  for (std::size_t i = 0; i < matrix.num_instances(); ++i) {
    out << matrix.instance_names()[i];
    for (double v : matrix.row(i)) out << '\t' << format_double(v);
    out << '\n';
  }
}

// --- checkpoints ------------------------------------------------------------------

namespace {

constexpr std::string_view kCheckpointMagic = "rankforge-checkpoint v1";

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& cp) {
  cp.params.validate();
  out << kCheckpointMagic << '\n'
      << "kind " << scorer_kind_name(cp.params.kind) << '\n'
      << "input_dim " << cp.params.input_dim << '\n'
      << "hidden_width " << cp.params.hidden_width << '\n'
      << "step " << cp.metadata.step << '\n'
      << "objective " << (cp.metadata.objective.empty() ? "-" : cp.metadata.objective) << '\n'
      << "seed " << cp.metadata.seed << '\n'
      << "validation_score " << format_g17(cp.metadata.validation_score) << '\n'
      << "num_params " << cp.params.weights.size() << '\n';
  for (double w : cp.params.weights) out << format_g17(w) << '\n';
}

Checkpoint load_checkpoint(std::istream& in) {
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> CheckpointError {
    return CheckpointError("checkpoint line " + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) {
      ++line_no;
      throw fail("unexpected end of file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto header_value = [&](std::string_view key) -> std::string {
    const std::string_view l = next_line();
    const auto f = split_whitespace(l);
    if (f.size() != 2 || f[0] != key) throw fail("expected '" + std::string(key) + " <value>'");
    return std::string(f[1]);
  };
  auto header_uint = [&](std::string_view key) -> std::uint64_t {
    const std::string v = header_value(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw fail("invalid " + std::string(key));
    return out;
  };

  if (next_line() != kCheckpointMagic) throw fail("not a rankforge checkpoint");

  Checkpoint cp;
  const std::string kind = header_value("kind");
  const auto parsed_kind = parse_scorer_kind(kind);
  if (!parsed_kind) throw fail("unknown scorer kind '" + kind + "'");
  cp.params.kind = *parsed_kind;
  cp.params.input_dim = header_uint("input_dim");
  cp.params.hidden_width = header_uint("hidden_width");
  cp.metadata.step = header_uint("step");
  cp.metadata.objective = header_value("objective");
  if (cp.metadata.objective == "-") cp.metadata.objective.clear();
  cp.metadata.seed = header_uint("seed");
  {
    const std::string v = header_value("validation_score");
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), cp.metadata.validation_score);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw fail("invalid validation_score");
  }
  const std::uint64_t count = header_uint("num_params");
  if (cp.params.input_dim == 0 || cp.params.input_dim > (1u << 24) || cp.params.hidden_width > (1u << 24)) {
    throw fail("implausible scorer dimensions");
  }
  if (count != parameter_count(cp.params.kind, cp.params.input_dim, cp.params.hidden_width)) {
    throw fail("num_params " + std::to_string(count) + " does not match the scorer shape");
  }

  cp.params.weights.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string_view l = next_line();
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), w);
    if (l.empty() || ec != std::errc() || ptr != l.data() + l.size() || !std::isfinite(w)) {
      throw fail("invalid parameter value '" + std::string(l) + "'");
    }
    cp.params.weights.push_back(w);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw fail("trailing content after parameters");
  }
  try {
    cp.params.validate();
  } catch (const InvalidInput& e) {
    throw CheckpointError(e.what());
  }
  return cp;
}

Checkpoint load_checkpoint(std::istream& in, ScorerKind kind, std::size_t input_dim, std::size_t hidden_width) {
  Checkpoint cp = load_checkpoint(in);
  if (cp.params.kind != kind || cp.params.input_dim != input_dim || cp.params.hidden_width != hidden_width) {
    throw CheckpointError("checkpoint holds a " + std::string(scorer_kind_name(cp.params.kind)) +
                          " scorer with d=" + std::to_string(cp.params.input_dim) +
                          ", h=" + std::to_string(cp.params.hidden_width) + "; expected " +
                          std::string(scorer_kind_name(kind)) + " with d=" + std::to_string(input_dim) +
                          ", h=" + std::to_string(hidden_width));
  }
  return cp;
}

// --- file helpers -------------------------------------------------------------------

namespace {

template <typename Fn>
auto with_file(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  try {
    return fn(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

}  // namespace

QrelsParseResult read_qrels_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_qrels(in); });
}

TrecRun read_run_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_run(in); });
}

std::vector<DistillTriplet> read_triplets_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_triplets(in); });
}

std::vector<TeacherRanking> read_ranked_lists_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_ranked_lists(in); });
}

FeatureTable read_features_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_features(in); });
}

RankMatrix read_rank_matrix_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_rank_matrix(in); });
}

Checkpoint read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace rankforge
