#include <gtest/gtest.h>

#include <cmath>

#include "rankforge/core.hpp"
#include "rankforge/dataset.hpp"
#include "rankforge/error.hpp"

using namespace rankforge;

TEST(ScoredList, ValidConstruction) {
  const ScoredList list("q", {"a", "b"}, {0.5, -1.0}, std::vector<int>{1, 0});
  EXPECT_EQ(list.size(), 2u);
  EXPECT_TRUE(list.has_labels());
  EXPECT_EQ(list.labels(), (std::vector<int>{1, 0}));
}

TEST(ScoredList, RejectsInconsistentInput) {
  EXPECT_THROW(ScoredList("q", {}, {}), InvalidInput);
  EXPECT_THROW(ScoredList("q", {"a"}, {1.0, 2.0}), InvalidInput);
  EXPECT_THROW(ScoredList("q", {"a", "b"}, {1.0, 2.0}, std::vector<int>{1}), InvalidInput);
  EXPECT_THROW(ScoredList("q", {"a", "b"}, {1.0, 2.0}, std::vector<int>{1, 2}), InvalidInput);
  EXPECT_THROW(ScoredList("q", {"a", "a"}, {1.0, 2.0}), InvalidInput);
  EXPECT_THROW(ScoredList("q", {"a"}, {1.0}).labels(), InvalidInput);
}

TEST(DistillTriplet, MarginAndValidation) {
  const DistillTriplet t{"q", "p", "n", 7.25, 1.5};
  EXPECT_DOUBLE_EQ(t.teacher_margin(), 5.75);
  EXPECT_NO_THROW(t.validate());
  EXPECT_THROW((DistillTriplet{"q", "p", "p", 1.0, 0.0}.validate()), InvalidInput);
  EXPECT_THROW((DistillTriplet{"q", "p", "n", NAN, 0.0}.validate()), InvalidInput);
}

TEST(TeacherRanking, RanksAreOneBased) {
  const TeacherRanking r("q1", {"d3", "d1", "d2"});
  EXPECT_EQ(r.rank_of("d3"), 1u);
  EXPECT_EQ(r.rank_of("d1"), 2u);
  EXPECT_EQ(r.rank_of("d2"), 3u);
  EXPECT_THROW(r.rank_of("d9"), InvalidInput);
  EXPECT_THROW(TeacherRanking("q", {"a", "a"}), InvalidInput);
}

TEST(JudgedPool, GradesAndLabels) {
  JudgedPool pool;
  EXPECT_TRUE(pool.empty());
  EXPECT_FALSE(pool.set("q", "a", 2));
  EXPECT_TRUE(pool.set("q", "a", 1));
  pool.set("q", "b", 0);
  EXPECT_EQ(pool.grade("q", "a"), 1);
  EXPECT_EQ(pool.grade("q", "zzz"), 0);
  EXPECT_EQ(pool.grade("other", "a"), 0);
  EXPECT_EQ(pool.binary_label("q", "a"), 1);
  EXPECT_EQ(pool.binary_label("q", "a", 2), 0);
  EXPECT_EQ(pool.find("other"), nullptr);
  ASSERT_NE(pool.find("q"), nullptr);
  EXPECT_EQ(pool.find("q")->size(), 2u);
  EXPECT_THROW(pool.set("q", "c", -1), InvalidInput);
}

TEST(RankMatrix, ShapeChecks) {
  const RankMatrix m({"a", "b"}, {"x"}, {{1.0, 2.0}});
  EXPECT_EQ(m.num_methods(), 2u);
  EXPECT_EQ(m.num_instances(), 1u);
  EXPECT_EQ(m.row(0)[1], 2.0);
  EXPECT_THROW(RankMatrix({"a", "b"}, {"x", "y"}, {{1.0, 2.0}}), InvalidInput);
  EXPECT_THROW(RankMatrix({"a", "b"}, {"x"}, {{1.0}}), InvalidInput);
  EXPECT_THROW(RankMatrix({"a", "b"}, {"x"}, {{1.0, NAN}}), InvalidInput);
}

TEST(LossConfig, Validation) {
  EXPECT_NO_THROW(LossConfig{}.validate());
  EXPECT_THROW((LossConfig{0.0, 1.0}.validate()), InvalidConfig);
  EXPECT_THROW((LossConfig{1.0, -0.5}.validate()), InvalidConfig);
  EXPECT_THROW((LossConfig{INFINITY, 1.0}.validate()), InvalidConfig);
}

TEST(FeatureTable, AddAndLookup) {
  FeatureTable t;
  t.add("q1", "a", {1.0, 2.0});
  t.add("q1", "b", {3.0, 4.0});
  t.add("q2", "a", {5.0, 6.0});
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.num_queries(), 2u);
  EXPECT_EQ(t.num_rows(), 3u);
  EXPECT_EQ(t.at("q2", "a"), (FeatureVector{5.0, 6.0}));
  ASSERT_NE(t.find("q1"), nullptr);
  EXPECT_EQ(t.find("q1")->passage_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.find("q9"), nullptr);
  EXPECT_THROW(t.at("q1", "zz"), InvalidInput);
  EXPECT_THROW(t.add("q1", "a", {0.0, 0.0}), InvalidInput);
  EXPECT_THROW(t.add("q1", "c", {0.0}), InvalidInput);
  EXPECT_THROW(t.add("q1", "d", {0.0, NAN}), InvalidInput);
}

TEST(Errors, MessagesCarryContext) {
  const ParseError with_file(4, "bad field", "x.tsv");
  EXPECT_STREQ(with_file.what(), "x.tsv:4: bad field");
  EXPECT_EQ(with_file.line(), 4u);
  EXPECT_STREQ(ParseError(2, "oops").what(), "line 2: oops");
  const ConfigError ce("optimizer.learning_rate", "must be positive");
  EXPECT_EQ(ce.key(), "optimizer.learning_rate");
  EXPECT_NE(std::string(ce.what()).find("optimizer.learning_rate"), std::string::npos);
  const DivergedRun d(17, 0.25, "nan loss");
  EXPECT_EQ(d.step(), 17u);
  EXPECT_EQ(d.last_finite_loss(), 0.25);
}
