#pragma once

// Group-normalized weighted scoring of benchmark targets.
//
// Records for one container size are arranged into a targets x attributes
// matrix (latency-like attributes negated so that larger is always better),
// each attribute column is z-score normalized with the population standard
// deviation, attribute z-scores are averaged within each of the four groups,
// and a target's score is the weight-dotted vector of its group averages.
// The hybrid method adds the same score computed on separately normalized
// historic data. Targets are ranked by descending score using standard
// competition ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/ingestion.hpp"
#include "benchlite/repository.hpp"

namespace benchlite {

// Standard competition ranks ("1224"): rank(i) = 1 + #{j : better(x_j, x_i)}.
// `better` must be a strict weak ordering. Output is in input order.
template <std::ranges::random_access_range Range, typename Better = std::greater<>>
std::vector<int> competition_ranks(const Range& values, Better better = {}) {
  const auto n = static_cast<std::size_t>(std::ranges::size(values));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto at = [&](std::size_t i) -> decltype(auto) { return *(std::ranges::begin(values) + i); };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return better(at(a), at(b)); });
  std::vector<int> ranks(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const bool tied_with_prev = pos > 0 && !better(at(order[pos - 1]), at(order[pos]));
    ranks[order[pos]] = tied_with_prev ? ranks[order[pos - 1]] : static_cast<int>(pos) + 1;
  }
  return ranks;
}

enum class RankMethod : std::uint8_t { Native, Hybrid, Empirical };

constexpr std::string_view to_string(RankMethod m) noexcept {
  switch (m) {
    case RankMethod::Native: return "native";
    case RankMethod::Hybrid: return "hybrid";
    case RankMethod::Empirical: return "empirical";
  }
  return "unknown";
}

inline std::optional<RankMethod> parse_method(std::string_view s) {
  s = text::trim(s);
  if (s == "native") return RankMethod::Native;
  if (s == "hybrid") return RankMethod::Hybrid;
  if (s == "empirical") return RankMethod::Empirical;
  return std::nullopt;
}

struct TargetScore {
  std::string target;
  double score = 0.0;

  bool operator==(const TargetScore&) const = default;
};

struct RankEntry {
  std::string target;
  double score = 0.0;
  int rank = 0;

  bool operator==(const RankEntry&) const = default;
};

struct RankTable {
  RankMethod method = RankMethod::Native;
  std::vector<RankEntry> entries;  // ascending rank

  const RankEntry* find(std::string_view target) const {
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const auto& e) { return e.target == target; });
    return it == entries.end() ? nullptr : &*it;
  }

  std::vector<std::string> targets() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.target);
    return out;
  }

  bool operator==(const RankTable&) const = default;
};

// Builds a table from scores; ties keep input order.
template <typename Better = std::greater<>>
RankTable rank_scores(std::span<const TargetScore> scores, RankMethod method = RankMethod::Native,
                      Better better = {}) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.score);
  const auto ranks = competition_ranks(values, better);
  RankTable table{method, {}};
  table.entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    table.entries.push_back({scores[i].target, scores[i].score, ranks[i]});
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.rank < b.rank; });
  return table;
}

inline RankTable rank(std::span<const TargetScore> scores, RankMethod method = RankMethod::Native) {
  return rank_scores(scores, method);
}

// Row-major targets x attributes, polarity-adjusted.
struct GroupedMatrix {
  std::vector<std::string> targets;
  std::vector<std::string> attributes;
  std::vector<GroupId> groups;  // per attribute
  std::vector<double> values;

  std::size_t rows() const noexcept { return targets.size(); }
  std::size_t cols() const noexcept { return attributes.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
};

struct NormalizedMatrix {
  std::vector<std::string> targets;
  std::vector<std::string> attributes;
  std::vector<GroupId> groups;
  std::vector<double> means;
  std::vector<double> stddevs;  // population
  std::vector<double> z;

  std::size_t rows() const noexcept { return targets.size(); }
  std::size_t cols() const noexcept { return attributes.size(); }
  double at(std::size_t i, std::size_t j) const { return z[i * cols() + j]; }
};

// Targets are sorted by name; attributes follow catalog order.
inline GroupedMatrix organise_groups(std::span<const BenchmarkRecord> records,
                                     const AttributeCatalog& catalog) {
  std::map<std::string, std::map<std::string, double>> by_target;
  std::set<std::int64_t> sizes;
  for (const auto& r : records) {
    const auto* attr = catalog.find(r.attribute_id);
    if (attr == nullptr)
      throw Error(Errc::InvariantViolation, "record names unknown attribute " + r.attribute_id);
    sizes.insert(r.container_mem_mb);
    by_target[r.target_name][r.attribute_id] = r.value;
  }
  if (sizes.size() > 1)
    throw Error(Errc::MixedContainerSizes, "records span several container sizes");
  if (by_target.size() < 2)
    throw Error(Errc::TooFewTargets, "need at least 2 targets, have " + std::to_string(by_target.size()));

  std::set<std::string> union_attrs;
  for (const auto& [t, vals] : by_target)
    for (const auto& [a, v] : vals) union_attrs.insert(a);

  GroupedMatrix m;
  for (const auto& attr : catalog.attributes()) {
    if (union_attrs.count(attr.id) == 0) continue;
    m.attributes.push_back(attr.id);
    m.groups.push_back(attr.group);
  }
  for (const auto& [t, vals] : by_target) {
    m.targets.push_back(t);
    for (const auto& a : m.attributes) {
      const auto it = vals.find(a);
      if (it == vals.end()) throw Error(Errc::RaggedData, "target " + t + " has no value for " + a);
      const bool lower_better = catalog.find(a)->direction == Direction::LowerIsBetter;
      m.values.push_back(lower_better ? -it->second : it->second);
    }
  }
  return m;
}

// A column counts as constant when its spread is below this fraction of its
// magnitude; such columns normalize to all zeros.
inline constexpr double kDegenerateSpread = 1e-12;

inline NormalizedMatrix normalise(const GroupedMatrix& g) {
  const auto m = g.rows();
  const auto n = g.cols();
  if (m == 0) throw Error(Errc::TooFewTargets, "empty matrix");
  NormalizedMatrix out{g.targets, g.attributes, g.groups, std::vector<double>(n),
                       std::vector<double>(n), std::vector<double>(m * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum += g.at(i, j);
      scale = std::max(scale, std::abs(g.at(i, j)));
    }
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += (g.at(i, j) - mean) * (g.at(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m));
    out.means[j] = mean;
    out.stddevs[j] = sd;
    if (!(sd > kDegenerateSpread * scale)) {
      out.stddevs[j] = 0.0;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) out.z[i * n + j] = (g.at(i, j) - mean) / sd;
  }
  return out;
}

// Mean z-score of each target over the attributes in each group; groups with
// no attributes contribute 0.
inline std::vector<std::array<double, kGroupCount>> group_means(const NormalizedMatrix& z) {
  std::array<std::size_t, kGroupCount> count{};
  for (const auto g : z.groups) ++count[index_of(g)];
  std::vector<std::array<double, kGroupCount>> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto& row = out[i];
    row.fill(0.0);
    for (std::size_t j = 0; j < z.cols(); ++j) row[index_of(z.groups[j])] += z.at(i, j);
    for (std::size_t k = 0; k < kGroupCount; ++k)
      if (count[k] != 0) row[k] /= static_cast<double>(count[k]);
  }
  return out;
}

inline std::vector<TargetScore> score_native(const NormalizedMatrix& z, const WeightVector& w) {
  if (w.all_zero()) throw Error(Errc::AllZeroWeights, "at least one group weight must be nonzero");
  const auto groups = group_means(z);
  std::vector<TargetScore> out;
  out.reserve(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double s = 0.0;
    for (const auto g : kAllGroups) s += w[g] * groups[i][index_of(g)];
    out.push_back({z.targets[i], s});
  }
  return out;
}

// Current plus historic native scores; output follows the current matrix's
// target order.
inline std::vector<TargetScore> score_hybrid(const NormalizedMatrix& current,
                                             const NormalizedMatrix& historic, const WeightVector& w) {
  if (w.all_zero()) throw Error(Errc::AllZeroWeights, "at least one group weight must be nonzero");
  const std::set<std::string> a(current.targets.begin(), current.targets.end());
  const std::set<std::string> b(historic.targets.begin(), historic.targets.end());
  if (a != b) throw Error(Errc::TargetSetMismatch, "current and historic data cover different targets");
  auto scores = score_native(current, w);
  std::map<std::string, double> hist;
  for (const auto& s : score_native(historic, w)) hist[s.target] = s.score;
  for (auto& s : scores) s.score += hist.at(s.target);
  return scores;
}

// Raised by rank_targets; role() names the data that is missing.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(RecordRole role, const std::string& detail)
      : Error(Errc::InsufficientData, std::string(role == RecordRole::Current ? "Current" : "Historic") +
                                          " data: " + detail),
        role_(role) {}
  RecordRole role() const noexcept { return role_; }

 private:
  RecordRole role_;
};

// End-to-end ranking for one container size from a repository snapshot.
inline RankTable rank_targets(const WeightVector& weights, const Repository& repository,
                              RankMethod method, std::int64_t container_mem_mb,
                              const AttributeCatalog& catalog) {
  if (method == RankMethod::Empirical)
    throw Error(Errc::InvalidArgument, "empirical ranks come from timings, not benchmarks");
  if (weights.all_zero()) throw Error(Errc::AllZeroWeights, "at least one group weight must be nonzero");

  const auto current = repository.query({std::nullopt, container_mem_mb, RoleFilter::Current});
  const std::set<std::string> current_targets = [&] {
    std::set<std::string> s;
    for (const auto& r : current) s.insert(r.target_name);
    return s;
  }();
  if (current_targets.size() < 2)
    throw InsufficientDataError(RecordRole::Current, "need benchmarks for at least 2 targets at " +
                                                         std::to_string(container_mem_mb) + " MB");
  const auto z_current = normalise(organise_groups(current, catalog));
  if (method == RankMethod::Native) {
    const auto scores = score_native(z_current, weights);
    return rank(scores, RankMethod::Native);
  }

  auto historic = repository.historic_baseline(container_mem_mb);
  std::erase_if(historic, [&](const auto& r) { return current_targets.count(r.target_name) == 0; });
  std::set<std::string> historic_targets;
  for (const auto& r : historic) historic_targets.insert(r.target_name);
  if (historic_targets != current_targets) {
    std::string missing;
    for (const auto& t : current_targets)
      if (historic_targets.count(t) == 0) missing += " " + t;
    throw InsufficientDataError(RecordRole::Historic, "no historic benchmarks for" + missing);
  }
  // Whole-VM baselines are taken at the VM's own size; only attribute coverage
  // has to line up.
  for (auto& r : historic) r.container_mem_mb = container_mem_mb;
  const auto z_historic = normalise(organise_groups(historic, catalog));
  const auto scores = score_hybrid(z_current, z_historic, weights);
  return rank(scores, RankMethod::Hybrid);
}

}  // namespace benchlite
