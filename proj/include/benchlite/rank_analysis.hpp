#pragma once

// Agreement between benchmark-derived ranks and empirical ranks obtained from
// application run times: sum of absolute rank distances and the Pearson
// correlation of the two rank vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "benchlite/error.hpp"
#include "benchlite/ranking.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

struct TimingVector {
  std::string label;
  std::vector<std::pair<std::string, double>> seconds;  // target, time
};

inline void validate(const TimingVector& t) {
  if (t.seconds.size() < 2) throw Error(Errc::TooFewTargets, "timings need at least 2 targets");
  std::set<std::string> names;
  for (const auto& [name, s] : t.seconds) {
    if (!std::isfinite(s) || s <= 0.0)
      throw Error(Errc::InvalidArgument, "time for " + name + " must be finite and positive");
    if (!names.insert(name).second) throw Error(Errc::DuplicateTarget, "duplicate timing for " + name);
  }
}

// Fastest target gets rank 1; equal times share a rank and the next distinct
// time continues with a gap. The entry score is the time in seconds.
inline RankTable empirical_ranks(const TimingVector& timings) {
  validate(timings);
  std::vector<TargetScore> scores;
  scores.reserve(timings.seconds.size());
  for (const auto& [name, s] : timings.seconds) scores.push_back({name, s});
  return rank_scores(scores, RankMethod::Empirical, std::less<>{});
}

namespace detail {

// Rank pairs aligned by target name (order of `a`).
inline std::vector<std::pair<int, int>> aligned_ranks(const RankTable& a, const RankTable& b) {
  std::map<std::string, int> rb;
  for (const auto& e : b.entries) rb[e.target] = e.rank;
  if (rb.size() != b.entries.size() || a.entries.size() != b.entries.size())
    throw Error(Errc::TargetSetMismatch, "rank tables cover different targets");
  std::vector<std::pair<int, int>> out;
  out.reserve(a.entries.size());
  for (const auto& e : a.entries) {
    const auto it = rb.find(e.target);
    if (it == rb.end()) throw Error(Errc::TargetSetMismatch, "target " + e.target + " missing from one table");
    out.emplace_back(e.rank, it->second);
  }
  return out;
}

}  // namespace detail

inline std::int64_t rank_distance_sum(const RankTable& benchmark, const RankTable& empirical) {
  std::int64_t ds = 0;
  for (const auto& [p, e] : detail::aligned_ranks(benchmark, empirical)) ds += std::abs(p - e);
  return ds;
}

// Pearson correlation of the rank vectors, in percent. Tied competition ranks
// enter as the integers themselves.
inline double rank_correlation(const RankTable& benchmark, const RankTable& empirical) {
  const auto pairs = detail::aligned_ranks(benchmark, empirical);
  const auto n = static_cast<double>(pairs.size());
  double mp = 0.0, me = 0.0;
  for (const auto& [p, e] : pairs) {
    mp += p;
    me += e;
  }
  mp /= n;
  me /= n;
  double cov = 0.0, vp = 0.0, ve = 0.0;
  for (const auto& [p, e] : pairs) {
    cov += (p - mp) * (e - me);
    vp += (p - mp) * (p - mp);
    ve += (e - me) * (e - me);
  }
  if (vp == 0.0 || ve == 0.0) throw Error(Errc::ZeroVariance, "a rank vector is constant");
  return 100.0 * cov / std::sqrt(vp * ve);
}

inline std::string format_percent(double pct) { return text::format_fixed(pct, 1); }

struct RankComparisonRow {
  std::string target;
  int benchmark_rank = 0;
  int empirical_rank = 0;
  int distance = 0;
};

struct RankComparison {
  RankTable benchmark;
  RankTable empirical;
  std::vector<RankComparisonRow> rows;  // empirical rank order
  std::int64_t distance_sum = 0;
  double correlation_pct = 0.0;
};

inline RankComparison compare_ranks(const RankTable& benchmark, const RankTable& empirical) {
  RankComparison c{benchmark, empirical, {}, rank_distance_sum(benchmark, empirical),
                   rank_correlation(benchmark, empirical)};
  for (const auto& e : empirical.entries) {
    const int p = benchmark.find(e.target)->rank;
    c.rows.push_back({e.target, p, e.rank, std::abs(p - e.rank)});
  }
  return c;
}

inline std::string format_report(const RankComparison& c) {
  std::size_t width = 6;
  for (const auto& r : c.rows) width = std::max(width, r.target.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::string out = pad("target", width) + "  Rp  Re  |d|\n";
  for (const auto& r : c.rows) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "  %2d  %2d  %3d\n", r.benchmark_rank, r.empirical_rank, r.distance);
    out += pad(r.target, width) + buf;
  }
  out += "d_s = " + std::to_string(c.distance_sum) + "\n";
  out += "correlation = " + format_percent(c.correlation_pct) + "%\n";
  out += "summary|d_s|" + std::to_string(c.distance_sum) + "\n";
  out += "summary|corr_pct|" + format_percent(c.correlation_pct) + "\n";
  return out;
}

// Timing file: `target|seconds` per line.
inline TimingVector parse_timings(std::string_view content, std::string label = {}) {
  TimingVector t{std::move(label), {}};
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto f = text::split_fields(raw);
    const auto s = f.size() == 2 ? text::parse_double(f[1]) : std::nullopt;
    if (!s) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected target|seconds");
    t.seconds.emplace_back(std::string(f[0]), *s);
  }
  validate(t);
  return t;
}

// Rank file: `target|rank` or `target|score|rank` per line.
inline RankTable parse_rank_file(std::string_view content, RankMethod method = RankMethod::Native) {
  RankTable table{method, {}};
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto f = text::split_fields(raw);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 2 && f.size() != 3) throw Error(Errc::ParseError, where + "expected target|rank");
    const auto r = text::parse_int<int>(f.back());
    if (!r || *r < 1) throw Error(Errc::ParseError, where + "rank must be a positive integer");
    double score = 0.0;
    if (f.size() == 3) {
      const auto s = text::parse_double(f[1]);
      if (!s) throw Error(Errc::ParseError, where + "bad score");
      score = *s;
    }
    if (table.find(f[0]) != nullptr) throw Error(Errc::DuplicateTarget, where + "duplicate target");
    table.entries.push_back({std::string(f[0]), score, *r});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.rank < b.rank; });
  return table;
}

inline std::string format_rank_file(const RankTable& t) {
  std::string out = "# target|score|rank (" + std::string(to_string(t.method)) + ")\n";
  for (const auto& e : t.entries)
    out += e.target + "|" + text::format_double(e.score) + "|" + std::to_string(e.rank) + "\n";
  return out;
}

// Published rank tables: `table|case|mode|method|size|target|empirical|rank`.
struct FixtureKey {
  int case_study = 0;
  std::string mode;    // seq | par
  std::string method;  // native | hybrid
  int size_mb = 0;

  auto operator<=>(const FixtureKey&) const = default;
};

struct FixturePair {
  std::string table;
  RankTable benchmark;
  RankTable empirical;
};

using FixtureSet = std::map<FixtureKey, FixturePair>;

inline FixtureSet parse_fixtures(std::string_view content) {
  FixtureSet set;
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto f = text::split_fields(raw);
    if (f.size() != 8) throw Error(Errc::ParseError, where + "expected 8 fields");
    const auto cs = text::parse_int<int>(f[1]);
    const auto size = text::parse_int<int>(f[4]);
    const auto emp = text::parse_int<int>(f[6]);
    const auto rk = text::parse_int<int>(f[7]);
    if (!cs || !size || !emp || !rk || (f[2] != "seq" && f[2] != "par") ||
        (f[3] != "native" && f[3] != "hybrid"))
      throw Error(Errc::ParseError, where + "malformed fixture row");
    FixtureKey key{*cs, std::string(f[2]), std::string(f[3]), *size};
    auto& pair = set[key];
    pair.table = std::string(f[0]);
    pair.benchmark.method = *parse_method(f[3]);
    pair.empirical.method = RankMethod::Empirical;
    pair.benchmark.entries.push_back({std::string(f[5]), 0.0, *rk});
    pair.empirical.entries.push_back({std::string(f[5]), 0.0, *emp});
  }
  for (auto& [k, p] : set) {
    for (auto* t : {&p.benchmark, &p.empirical})
      std::stable_sort(t->entries.begin(), t->entries.end(),
                       [](const auto& a, const auto& b) { return a.rank < b.rank; });
  }
  return set;
}

}  // namespace benchlite
