// Acceptance suite: prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any fails.
//
//   acceptance [path/to/benchlite]
//
// The CLI path is needed for the duration-reporting check.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "benchlite/benchlite.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace benchlite;
using testing_support::data_path;
using testing_support::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Published correlation table, percent. Rows: case 1..3; columns: seq 100,
// 500, 1000 then par 100, 500, 1000.
const std::map<std::string, std::array<std::array<double, 6>, 3>> kPublished = {
    {"native", {{{89.1, 87.9, 92.1, 90.3, 86.7, 90.3},
                 {88.5, 88.5, 84.7, 83.0, 83.0, 83.0},
                 {95.2, 95.2, 95.2, 87.6, 87.6, 87.6}}}},
    {"hybrid", {{{93.9, 93.9, 93.9, 93.9, 93.9, 93.9},
                 {88.5, 88.5, 88.5, 86.7, 86.7, 86.7},
                 {95.2, 95.2, 95.2, 88.8, 88.8, 88.8}}}},
};

double published(const FixtureKey& k) {
  const int size_col = k.size_mb == 100 ? 0 : k.size_mb == 500 ? 1 : 2;
  return kPublished.at(k.method)[k.case_study - 1][(k.mode == "par" ? 3 : 0) + size_col];
}

std::pair<std::vector<int>, std::vector<int>> aligned(const FixturePair& p) {
  std::vector<int> x, y;
  for (const auto& e : p.benchmark.entries) {
    x.push_back(e.rank);
    y.push_back(p.empirical.find(e.target)->rank);
  }
  return {x, y};
}

Outcome table_reproduction() {
  const auto t0 = Clock::now();
  const auto set = parse_fixtures(text::read_file(data_path("fixtures/rank_tables.txt")));
  int ok = 0;
  std::string misses;
  for (const auto& [k, p] : set) {
    const double got = std::stod(format_percent(rank_correlation(p.benchmark, p.empirical)));
    if (std::abs(got - published(k)) <= 0.15 + 1e-9)
      ++ok;
    else
      misses += fmt(" %s/%d/%s/%d=%.1f(want %.1f)", k.method.c_str(), k.case_study, k.mode.c_str(), k.size_mb,
                    got, published(k));
  }
  const double elapsed = seconds_since(t0);

  // Independent recomputation of every cell.
  int oracle_ok = 0;
  for (const auto& [k, p] : set) {
    const auto [x, y] = aligned(p);
    oracle_ok += std::abs(oracle::pearson_pct(x, y) - rank_correlation(p.benchmark, p.empirical)) < 1e-9;
  }

  // Cells checked by hand.
  const std::vector<std::pair<FixtureKey, std::string>> hand = {
      {{1, "seq", "native", 100}, "89.1"}, {{1, "seq", "native", 1000}, "92.1"},
      {{1, "par", "native", 100}, "90.3"}, {{2, "seq", "native", 100}, "88.5"},
      {{2, "par", "native", 100}, "83.0"}, {{3, "par", "native", 100}, "87.6"}};
  int hand_ok = 0;
  for (const auto& [k, want] : hand) {
    const auto& p = set.at(k);
    hand_ok += format_percent(rank_correlation(p.benchmark, p.empirical)) == want;
  }

  Outcome o;
  o.pass = set.size() == 36 && ok == 36 && oracle_ok == 36 && hand_ok == 6 && elapsed < 1.0;
  o.detail = fmt("%d/36 cells within 0.15, oracle agrees on %d/36, hand cells %d/6, %.3f s", ok, oracle_ok,
                 hand_ok, elapsed) + misses;
  return o;
}

Outcome distance_consistency() {
  const auto set = parse_fixtures(text::read_file(data_path("fixtures/rank_tables.txt")));
  int ok = 0;
  for (const auto& [k, p] : set) {
    const auto [x, y] = aligned(p);
    ok += rank_distance_sum(p.benchmark, p.empirical) == oracle::distance_sum(x, y);
  }
  const auto& c1 = set.at({1, "seq", "native", 100});
  const auto d = rank_distance_sum(c1.benchmark, c1.empirical);
  return {ok == 36 && set.size() == 36 && d == 10,
          fmt("case 1 seq native 100MB d_s=%lld (want 10); %d/36 match brute force", static_cast<long long>(d), ok)};
}

// Random record set over the default catalog: 2..15 targets, per-attribute
// scale, optionally one constant column.
std::vector<BenchmarkRecord> random_matrix_records(const AttributeCatalog& cat, std::mt19937_64& rng,
                                                   std::string* constant_attr) {
  std::uniform_int_distribution<int> m_dist(2, 15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> exp_dist(-3, 6);
  std::bernoulli_distribution make_constant(0.5);
  const int m = m_dist(rng);
  const auto& attrs = cat.attributes();
  const std::size_t const_col = make_constant(rng) ? rng() % attrs.size() : attrs.size();
  if (constant_attr != nullptr) *constant_attr = const_col < attrs.size() ? attrs[const_col].id : "";
  std::vector<BenchmarkRecord> out;
  std::vector<double> scale(attrs.size());
  for (auto& s : scale) s = std::pow(10.0, exp_dist(rng));
  for (int i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < attrs.size(); ++j) {
      const double v = j == const_col ? 3.0 * scale[j] : scale[j] * (0.5 + u(rng));
      out.push_back({"t" + std::to_string(i), attrs[j].id, v, attrs[j].unit, 100, 1, "r",
                     testing_support::at(2024, 1, 1)});
    }
  }
  return out;
}

std::vector<int> ranks_by_target(const RankTable& t) {
  std::map<std::string, int> m;
  for (const auto& e : t.entries) m[e.target] = e.rank;
  std::vector<int> out;
  for (const auto& [k, r] : m) out.push_back(r);
  return out;
}

WeightVector random_weights(std::mt19937_64& rng, double max = 5.0) {
  std::uniform_real_distribution<double> u(0.0, max);
  std::bernoulli_distribution zero(0.3);
  std::array<double, 4> w{};
  while (w == std::array<double, 4>{})
    for (auto& x : w) x = zero(rng) ? 0.0 : u(rng);
  return make_weights(w[0], w[1], w[2], w[3]);
}

Outcome normalization_properties() {
  const auto cat = default_catalog();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> a_dist(0.01, 100.0), b_dist(-5.0, 5.0);
  int moments_bad = 0, affine_bad = 0, affine_z_bad = 0, constant_bad = 0, columns = 0, constant_cols = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string constant_attr;
    auto recs = random_matrix_records(cat, rng, &constant_attr);
    const auto z = normalise(organise_groups(recs, cat));
    for (std::size_t j = 0; j < z.cols(); ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < z.rows(); ++i) mean += z.at(i, j);
      mean /= static_cast<double>(z.rows());
      for (std::size_t i = 0; i < z.rows(); ++i) sq += (z.at(i, j) - mean) * (z.at(i, j) - mean);
      const double sd = std::sqrt(sq / static_cast<double>(z.rows()));
      if (z.attributes[j] == constant_attr) {
        ++constant_cols;
        for (std::size_t i = 0; i < z.rows(); ++i) constant_bad += z.at(i, j) != 0.0;
        continue;
      }
      ++columns;
      worst = std::max({worst, std::abs(mean), std::abs(sd - 1.0)});
      moments_bad += !(std::abs(mean) <= 1e-9 && std::abs(sd - 1.0) <= 1e-9);
    }

    const auto w = random_weights(rng);
    const auto base = rank(score_native(z, w));

    // x -> a x + b per raw column; b is drawn relative to the column's
    // magnitude so the shifted values still resolve the original spread
    std::map<std::string, double> magnitude;
    for (const auto& r : recs) magnitude[r.attribute_id] = std::max(magnitude[r.attribute_id], r.value);
    std::map<std::string, std::pair<double, double>> ab;
    for (const auto& attr : cat.attributes()) {
      const double a = a_dist(rng);
      ab[attr.id] = {a, a * magnitude[attr.id] * b_dist(rng)};
    }
    auto shifted = recs;
    for (auto& r : shifted) r.value = ab[r.attribute_id].first * r.value + ab[r.attribute_id].second;
    const auto z2 = normalise(organise_groups(shifted, cat));
    for (std::size_t k = 0; k < z.z.size(); ++k) affine_z_bad += std::abs(z.z[k] - z2.z[k]) > 1e-9;
    affine_bad += ranks_by_target(rank(score_native(z2, w))) != ranks_by_target(base);

    // another constant in the degenerate column changes nothing
    if (!constant_attr.empty()) {
      auto moved = recs;
      for (auto& r : moved)
        if (r.attribute_id == constant_attr) r.value = 7.25;
      const auto s1 = score_native(z, w);
      const auto s2 = score_native(normalise(organise_groups(moved, cat)), w);
      constant_bad += s1 != s2;
    }
  }
  return {moments_bad == 0 && affine_bad == 0 && affine_z_bad == 0 && constant_bad == 0,
          fmt("1000 matrices: %d/%d columns off (worst deviation %.2e), affine: %d rank tables and %d z "
              "values differ, %d constant-column violations over %d degenerate columns",
              moments_bad, columns, worst, affine_bad, affine_z_bad, constant_bad, constant_cols)};
}

Outcome scoring_properties() {
  const auto cat = default_catalog();
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> c_dist(0.1, 2.5);
  int zero_bad = 0, scale_bad = 0, sum_bad = 0, hybrid_bad = 0;
  double worst_sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto recs = random_matrix_records(cat, rng, nullptr);
    const auto z = normalise(organise_groups(recs, cat));

    // zero-weight groups: perturb their attributes
    auto w = random_weights(rng, 2.0);
    if (!w.all_zero() && std::none_of(w.values().begin(), w.values().end(), [](double x) { return x == 0.0; })) {
      auto v = w.values();
      v[rng() % 4] = 0.0;
      if (v != std::array<double, 4>{}) w = make_weights(v[0], v[1], v[2], v[3]);
    }
    auto perturbed = recs;
    std::uniform_real_distribution<double> jitter(0.1, 10.0);
    for (auto& r : perturbed)
      if (w[cat.find(r.attribute_id)->group] == 0.0) r.value *= jitter(rng);
    const auto s = score_native(z, w);
    const auto sp = score_native(normalise(organise_groups(perturbed, cat)), w);
    for (std::size_t i = 0; i < s.size(); ++i) zero_bad += std::abs(s[i].score - sp[i].score) > 1e-12;

    // weight scaling
    const double c = c_dist(rng);
    const auto& v = w.values();
    const auto sc = score_native(z, make_weights(c * v[0], c * v[1], c * v[2], c * v[3]));
    for (std::size_t i = 0; i < s.size(); ++i)
      scale_bad += std::abs(sc[i].score - c * s[i].score) > 1e-9 * std::max(1.0, std::abs(c * s[i].score));
    scale_bad += ranks_by_target(rank(sc)) != ranks_by_target(rank(s));

    // scores sum to zero
    double sum = 0.0;
    for (const auto& x : s) sum += x.score;
    worst_sum = std::max(worst_sum, std::abs(sum));
    sum_bad += std::abs(sum) > 1e-9;

    // hybrid with identical history
    const auto h = score_hybrid(z, z, w);
    for (std::size_t i = 0; i < s.size(); ++i) hybrid_bad += h[i].score != 2.0 * s[i].score;
    hybrid_bad += ranks_by_target(rank(h, RankMethod::Hybrid)) != ranks_by_target(rank(s));
  }
  return {zero_bad + scale_bad + sum_bad + hybrid_bad == 0,
          fmt("1000 trials: zero-weight %d, scaling %d, sum-zero %d (worst |sum| %.2e), hybrid doubling %d "
              "violations",
              zero_bad, scale_bad, sum_bad, worst_sum, hybrid_bad)};
}

Outcome ranking_oracle() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> n_dist(1, 40);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  int bad = 0, tied_vectors = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> s(n_dist(rng));
    for (auto& x : s) x = u(rng);
    // force ties: copy some entries over others
    const int copies = static_cast<int>(rng() % (s.size() + 1));
    for (int c = 0; c < copies; ++c) s[rng() % s.size()] = s[rng() % s.size()];
    if (trial % 5 == 0)
      for (auto& x : s) x = std::round(x / 50.0);
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    tied_vectors += std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    bad += competition_ranks(s) != oracle::competition_ranks(s);

    std::vector<TargetScore> scores;
    for (std::size_t i = 0; i < s.size(); ++i) scores.push_back({"t" + std::to_string(i), s[i]});
    const auto table = rank(scores);
    const auto want = oracle::competition_ranks(s);
    for (std::size_t i = 0; i < s.size(); ++i) bad += table.find("t" + std::to_string(i))->rank != want[i];
  }
  const auto example = competition_ranks(std::vector<double>{30, 20, 20, 10});
  const bool example_ok = example == std::vector<int>{1, 2, 2, 4};
  return {bad == 0 && example_ok,
          fmt("10000 vectors (%d with ties): %d mismatches; [30,20,20,10] -> [%d,%d,%d,%d]", tied_vectors, bad,
              example[0], example[1], example[2], example[3])};
}

struct CycleOutput {
  std::string blocks;  // store text without run headers
  std::string canonical;
  RankTable native;
  RankTable hybrid;
};

CycleOutput one_cycle() {
  TempDir dir;
  const auto cat = default_catalog();
  const auto inv = load_inventory(data_path("mock/fleet10.inventory"));
  Repository repo(dir / "bench.store", cat);
  auto ex = mock_executor(data_path("mock/fleet10.profile"), 42, cat);
  for (const std::uint32_t nonce : {1u, 2u}) {
    PlanOptions o;
    o.now = testing_support::at(2024, 6, static_cast<unsigned>(nonce));
    o.nonce = nonce;
    o.max_parallel_targets = 4;
    execute_run(plan_run(inv, {100, 1}, o), *ex, repo);
  }
  CycleOutput out;
  const auto store_text = text::read_file((dir / "bench.store").string());
  for (const auto line : text::lines(store_text)) {
    if (line.starts_with(kRunTag)) continue;
    out.blocks.append(line);
    out.blocks.push_back('\n');
  }
  out.canonical = emit_canonical(repo.query({std::nullopt, 100, RoleFilter::Current}));
  const auto w = make_weights(4, 3, 5, 0);
  out.native = rank_targets(w, repo, RankMethod::Native, 100, cat);
  out.hybrid = rank_targets(w, repo, RankMethod::Hybrid, 100, cat);
  return out;
}

Outcome end_to_end_determinism() {
  const auto t0 = Clock::now();
  const auto a = one_cycle();
  const double first = seconds_since(t0);
  const auto b = one_cycle();
  const double total = seconds_since(t0);
  const bool same = a.blocks == b.blocks && a.canonical == b.canonical && a.native == b.native &&
                    a.hybrid == b.hybrid && a.native.entries.size() == 10;
  return {same && first < 5.0 && total - first < 5.0,
          fmt("store blocks %s, rank tables %s, cycle times %.3f s / %.3f s", a.blocks == b.blocks ? "identical" : "differ",
              a.native == b.native && a.hybrid == b.hybrid ? "identical" : "differ", first, total - first)};
}

Outcome ingestion_round_trip() {
  const auto cat = default_catalog();
  std::mt19937_64 rng(4004);
  int bad = 0;
  std::size_t records = 0;
  for (int i = 0; i < 1000; ++i) {
    auto recs = testing_support::random_records(cat, rng);
    records += recs.size();
    const auto back = parse_canonical(emit_canonical(recs), cat).records;
    sort_canonical(recs);
    bad += back != recs;
  }
  return {bad == 0, fmt("1000 record sets (%zu records): %d mismatches", records, bad)};
}

// Sleeps so durations are measurably nonzero.
class SlowExecutor final : public Executor {
 public:
  ContainerHandle provision(const TargetDescriptor& t, const ContainerSpec&, std::string_view) override {
    return {"slow-" + t.name, t.name};
  }
  ExecOutcome exec(const ContainerHandle&, std::string_view, std::chrono::seconds) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(40));
    return {"mem.latency.l1|ns|1.5\n", 0, false};
  }
  void teardown(const ContainerHandle&) noexcept override {}
};

Outcome duration_reporting(const std::string& cli) {
  TempDir dir;
  Repository repo(dir / "s.store", default_catalog());
  SlowExecutor ex;
  std::vector<TargetDescriptor> inv{{"a", "local", 1, 1024, {}}, {"b", "local", 1, 1024, {}}};
  const auto result = execute_run(plan_run(inv, {100, 1}), ex, repo);
  bool recorded = true;
  for (const auto& t : result.targets) recorded = recorded && t.duration_s >= 0.04 && t.duration_s < 5.0;

  if (cli.empty()) return {false, "durations recorded; CLI path not given, cannot check `run` output"};
  const auto cmd = cli + " --store " + (dir / "cli.store").string() + " run --mem 100 --cores 1 --inventory " +
                   data_path("mock/fleet10.inventory") + " --profile " + data_path("mock/fleet10.profile") +
                   " --seed 42 2>&1";
  std::FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  if (p != nullptr) {
    char buf[4096];
    while (const auto n = std::fread(buf, 1, sizeof(buf), p)) out.append(buf, n);
    ::pclose(p);
  }
  int reported = 0;
  for (const auto line : text::lines(out)) {
    const auto f = text::split_fields(line);
    if (f.size() >= 4 && f[0] == "target" && text::parse_double(f[3]).has_value()) ++reported;
  }
  return {recorded && reported == 10,
          fmt("engine durations %s (%.3f s, %.3f s); `run` reported %d/10 per-target durations",
              recorded ? "recorded" : "missing", result.targets[0].duration_s, result.targets[1].duration_s,
              reported)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"correlation-table-reproduction", table_reproduction},
      {"distance-sum-consistency", distance_consistency},
      {"normalization-properties", normalization_properties},
      {"scoring-properties", scoring_properties},
      {"ranking-oracle", ranking_oracle},
      {"end-to-end-determinism", end_to_end_determinism},
      {"ingestion-round-trip", ingestion_round_trip},
      {"per-target-duration-reported", [&] { return duration_reporting(cli); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
