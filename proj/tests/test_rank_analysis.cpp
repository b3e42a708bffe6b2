#include <gtest/gtest.h>

#include "benchlite/rank_analysis.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace benchlite;
using testing_support::data_path;

namespace {

const std::vector<std::string> kTargets = testing_support::ten_targets();

RankTable table(const std::vector<int>& ranks, RankMethod m = RankMethod::Native) {
  RankTable t{m, {}};
  for (std::size_t i = 0; i < ranks.size(); ++i) t.entries.push_back({kTargets[i], 0.0, ranks[i]});
  return t;
}

TimingVector timings(const std::vector<double>& s) {
  TimingVector t{"t", {}};
  for (std::size_t i = 0; i < s.size(); ++i) t.seconds.emplace_back(kTargets[i], s[i]);
  return t;
}

std::vector<int> ranks_in_target_order(const RankTable& t) {
  std::vector<int> out;
  for (std::size_t i = 0; i < t.entries.size(); ++i) out.push_back(t.find(kTargets[i])->rank);
  return out;
}

}  // namespace

TEST(EmpiricalRanks, SharedRankThenGap) {
  EXPECT_EQ(ranks_in_target_order(empirical_ranks(timings({4.0, 4.0, 9.0}))), (std::vector<int>{1, 1, 3}));
  EXPECT_EQ(ranks_in_target_order(empirical_ranks(timings({1, 2, 3, 4}))), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(ranks_in_target_order(empirical_ranks(timings({7, 7, 7}))), (std::vector<int>{1, 1, 1}));
}

TEST(EmpiricalRanks, Validation) {
  EXPECT_THROW(empirical_ranks(timings({1.0})), Error);
  EXPECT_THROW(empirical_ranks(timings({1.0, -2.0})), Error);
  TimingVector dup{"d", {{"a", 1.0}, {"a", 2.0}}};
  EXPECT_THROW(empirical_ranks(dup), Error);
}

TEST(DistanceSum, CaseOneSequential) {
  const auto emp = table({9, 7, 6, 5, 4, 3, 1, 2, 8, 10}, RankMethod::Empirical);
  const auto nat = table({10, 4, 7, 6, 3, 5, 1, 2, 8, 9});
  EXPECT_EQ(rank_distance_sum(nat, emp), 10);
  EXPECT_EQ(rank_distance_sum(emp, emp), 0);
}

TEST(DistanceSum, DisjointTargets) {
  RankTable a{RankMethod::Native, {{"x", 0, 1}, {"y", 0, 2}}};
  RankTable b{RankMethod::Native, {{"x", 0, 1}, {"z", 0, 2}}};
  try {
    rank_distance_sum(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TargetSetMismatch);
  }
}

TEST(Correlation, CaseOneSequential) {
  const auto emp = table({9, 7, 6, 5, 4, 3, 1, 2, 8, 10}, RankMethod::Empirical);
  const auto nat = table({10, 4, 7, 6, 3, 5, 1, 2, 8, 9});
  EXPECT_EQ(format_percent(rank_correlation(nat, emp)), "89.1");
}

// Tied empirical ranks: Pearson on the rank integers gives 88.5 here.
TEST(Correlation, CaseTwoSequentialTies) {
  const auto emp = table({10, 6, 6, 6, 3, 3, 1, 2, 9, 5}, RankMethod::Empirical);
  const auto nat = table({10, 5, 7, 6, 3, 4, 1, 2, 8, 9});
  const double c = rank_correlation(nat, emp);
  EXPECT_EQ(format_percent(c), "88.5");
  // the textbook 1 - 6Σd²/(n(n²-1)) shortcut would give 87.9
  EXPECT_GT(std::abs(c - 87.878787878788), 0.5);
}

TEST(Correlation, Identity) {
  const auto t = table({1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(rank_correlation(t, t), 100.0);
  EXPECT_THROW(rank_correlation(table({1, 1, 1}), table({1, 2, 3})), Error);
}

TEST(Correlation, MatchesOracleOnFixtures) {
  const auto set = parse_fixtures(text::read_file(data_path("fixtures/rank_tables.txt")));
  ASSERT_EQ(set.size(), 36u);
  for (const auto& [k, p] : set) {
    std::vector<int> x, y;
    for (const auto& e : p.benchmark.entries) {
      x.push_back(e.rank);
      y.push_back(p.empirical.find(e.target)->rank);
    }
    EXPECT_NEAR(rank_correlation(p.benchmark, p.empirical), oracle::pearson_pct(x, y), 1e-9);
    EXPECT_EQ(rank_distance_sum(p.benchmark, p.empirical), oracle::distance_sum(x, y));
  }
}

TEST(Files, RankAndTimingFiles) {
  const auto bench = parse_rank_file(text::read_file(data_path("fixtures/case1_seq_native_100.rank")));
  const auto emp = empirical_ranks(parse_timings(text::read_file(data_path("fixtures/case1_seq_empirical.timings"))));
  const auto report = format_report(compare_ranks(bench, emp));
  EXPECT_NE(report.find("d_s = 10\n"), std::string::npos);
  EXPECT_NE(report.find("correlation = 89.1%\n"), std::string::npos);
  EXPECT_NE(report.find("summary|corr_pct|89.1\n"), std::string::npos);
}

TEST(Files, RankFileRoundTrip) {
  const std::vector<TargetScore> s{{"a", 1.5}, {"b", -0.25}, {"c", 1.5}};
  const auto t = rank(s);
  const auto back = parse_rank_file(format_rank_file(t));
  EXPECT_EQ(back.entries, t.entries);
}

TEST(Files, Malformed) {
  EXPECT_THROW(parse_rank_file("a|0\n"), Error);
  EXPECT_THROW(parse_rank_file("a|1\na|2\n"), Error);
  EXPECT_THROW(parse_timings("a|fast\nb|1\n"), Error);
  EXPECT_THROW(parse_fixtures("II|1|seq|native|100|a|1\n"), Error);
}
