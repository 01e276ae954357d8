#pragma once

// Text formats. Every parser accepts LF or CRLF line endings, skips blank
// lines, and reports errors as ParseError with a 1-based line number.
//
//   qrels          qid 0 docid grade                      (whitespace separated)
//   run            qid Q0 docid rank score tag            (score with 6 decimals)
//   triplets       qid  pos_id  neg_id  teacher_pos  teacher_neg   (tab separated)
//   ranked lists   qid  id_1  id_2 ... id_n, best first   (tab separated, n >= 2)
//   features       qid  pid  v_1 ... v_d                  (tab separated)
//   results matrix header: label m_1 ... m_k; rows: instance v_1 ... v_k  (tab separated)
//   checkpoint     header lines "key value", then one parameter per line

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankforge/core.hpp"
#include "rankforge/dataset.hpp"
#include "rankforge/metrics.hpp"
#include "rankforge/scorer.hpp"

namespace rankforge {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

struct QrelsParseResult {
  JudgedPool pool;
  std::size_t duplicates = 0;  // repeated (qid, docid); the last grade wins
};

QrelsParseResult parse_qrels(std::istream& in);
void write_qrels(std::ostream& out, const JudgedPool& pool);

struct RunEntry {
  std::string passage_id;
  std::size_t rank = 0;
  double score = 0.0;
};

struct RunQuery {
  std::string query_id;
  std::vector<RunEntry> entries;  // ranks 1..n in order
};

/// A TREC run; queries keep their first-appearance order. A file carries a
/// single tag.
struct TrecRun {
  std::string tag;
  std::vector<RunQuery> queries;
};

TrecRun parse_run(std::istream& in);
/// Throws InvalidInput unless every query's ranks are 1..n in order.
void write_run(std::ostream& out, const TrecRun& run);

/// Orders every list by descending score (ties: ascending passage id) and assigns ranks.
TrecRun make_run(const Run& lists, std::string tag);
Run to_scored_lists(const TrecRun& run);

std::vector<DistillTriplet> parse_triplets(std::istream& in);
void write_triplets(std::ostream& out, const std::vector<DistillTriplet>& triplets);

std::vector<TeacherRanking> parse_ranked_lists(std::istream& in);
void write_ranked_lists(std::ostream& out, const std::vector<TeacherRanking>& rankings);

FeatureTable parse_features(std::istream& in);
void write_features(std::ostream& out, const FeatureTable& table);

/// Throws ParseError on a ragged row, a repeated method or instance name, or
/// a non-numeric cell.
RankMatrix parse_rank_matrix(std::istream& in);
void write_rank_matrix(std::ostream& out, const RankMatrix& matrix);

struct CheckpointMetadata {
  std::size_t step = 0;
  std::string objective;
  std::uint64_t seed = 0;
  double validation_score = 0.0;

  bool operator==(const CheckpointMetadata&) const = default;
};

struct Checkpoint {
  ScorerParams params;
  CheckpointMetadata metadata;
};

/// Parameters are written with 17 significant digits, so loading is bit-exact.
void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Throws CheckpointError on any malformed header or parameter line.
Checkpoint load_checkpoint(std::istream& in);
/// As above, and additionally requires the stored scorer to have this shape.
Checkpoint load_checkpoint(std::istream& in, ScorerKind kind, std::size_t input_dim,
                           std::size_t hidden_width);

// File helpers; open failures raise ParseError with line 0.
QrelsParseResult read_qrels_file(const std::filesystem::path& path);
TrecRun read_run_file(const std::filesystem::path& path);
std::vector<DistillTriplet> read_triplets_file(const std::filesystem::path& path);
std::vector<TeacherRanking> read_ranked_lists_file(const std::filesystem::path& path);
FeatureTable read_features_file(const std::filesystem::path& path);
RankMatrix read_rank_matrix_file(const std::filesystem::path& path);
Checkpoint read_checkpoint_file(const std::filesystem::path& path);

}  // namespace rankforge
