#pragma once

// Append-only benchmark store.
//
// The backing file is a sequence of runs. Each run starts with a metadata line
//
//   #benchlite-run run=<id> mem=<MB> cores=<N> started=<ts> finished=<ts> role=<role> tool=<t> version=<v>
//
// followed by the run's records in canonical form (see ingestion.hpp). The
// in-memory index is rebuilt from the file on open.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <unistd.h>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/ingestion.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

enum class RoleFilter : std::uint8_t { Current, Historic, Both };

struct RecordQuery {
  std::optional<std::string> target;
  std::optional<std::int64_t> container_mem_mb;
  RoleFilter role = RoleFilter::Both;
};

enum class Availability : std::uint8_t { Available, Missing };

constexpr std::string_view to_string(Availability a) noexcept {
  return a == Availability::Available ? "Available" : "Missing";
}

struct TargetStatus {
  std::string target;
  Availability availability = Availability::Missing;
};

inline constexpr std::string_view kRunTag = "#benchlite-run";

inline std::string run_header_line(const RunMetadata& m) {
  return std::string(kRunTag) + " run=" + m.run_id + " mem=" + std::to_string(m.container_mem_mb) +
         " cores=" + std::to_string(m.cpu_cores) + " started=" + text::format_rfc3339(m.started) +
         " finished=" + text::format_rfc3339(m.finished) + " role=" + std::string(to_string(m.role)) +
         " tool=" + m.tool + " version=" + m.tool_version;
}

inline RunMetadata parse_run_header(std::string_view line) {
  RunMetadata m;
  bool has_run = false;
  for (const auto& [k, v] : text::key_values(line.substr(kRunTag.size()))) {
    if (k == "run") {
      m.run_id = std::string(v);
      has_run = !v.empty();
    } else if (k == "mem") {
      m.container_mem_mb = text::parse_int<std::int64_t>(v).value_or(0);
    } else if (k == "cores") {
      m.cpu_cores = text::parse_int<int>(v).value_or(0);
    } else if (k == "started" || k == "finished") {
      const auto t = text::parse_rfc3339(v);
      if (!t) throw Error(Errc::ParseError, "bad timestamp in run header: " + std::string(line));
      (k == "started" ? m.started : m.finished) = *t;
    } else if (k == "role") {
      const auto r = parse_role(v);
      if (!r) throw Error(Errc::ParseError, "bad role in run header: " + std::string(line));
      m.role = *r;
    } else if (k == "tool") {
      m.tool = std::string(v);
    } else if (k == "version") {
      m.tool_version = std::string(v);
    }
  }
  if (!has_run) throw Error(Errc::ParseError, "run header without run id: " + std::string(line));
  return m;
}

class Repository {
 public:
  // Opens (creating if needed) the store file and rebuilds the index.
  Repository(std::filesystem::path path, AttributeCatalog catalog)
      : path_(std::move(path)), catalog_(std::move(catalog)) {
    if (!std::filesystem::exists(path_)) {
      std::ofstream create(path_, std::ios::app);
      if (!create) throw Error(Errc::IoError, "cannot create store file: " + path_.string());
      return;
    }
    load(text::read_file(path_.string()));
  }

  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  const AttributeCatalog& catalog() const noexcept { return catalog_; }

  void append_run(const RunMetadata& meta, std::span<const BenchmarkRecord> records) {
    validate(meta);
    if (records.empty()) throw Error(Errc::InvalidArgument, "run " + meta.run_id + " has no records");
    std::unique_lock lock(mutex_);
    if (runs_.count(meta.run_id) != 0) throw Error(Errc::DuplicateRun, "run " + meta.run_id + " already stored");
    check_records(meta, records);

    std::string block = run_header_line(meta) + "\n" + emit_canonical(records);
    write_durably(block);

    std::vector<BenchmarkRecord> sorted(records.begin(), records.end());
    sort_canonical(sorted);
    index_run(meta, std::move(sorted));
  }

  // Imports self-describing canonical text as one historic run. The run id is
  // taken from the headers; all blocks must share it.
  RunMetadata import_canonical(std::string_view content, RecordRole role = RecordRole::Historic) {
    auto parsed = parse_canonical(content, catalog_);
    auto& recs = parsed.records;
    const auto& first = recs.front();
    RunMetadata meta;
    meta.run_id = first.run_id;
    meta.container_mem_mb = first.container_mem_mb;
    meta.cpu_cores = first.cpu_cores;
    meta.role = role;
    meta.tool = "import";
    meta.started = meta.finished = first.timestamp;
    for (auto& r : recs) {
      if (r.run_id != meta.run_id)
        throw Error(Errc::MixedRuns, "import spans runs " + meta.run_id + " and " + r.run_id);
      r.role = role;
      meta.started = std::min(meta.started, r.timestamp);
      meta.finished = std::max(meta.finished, r.timestamp);
    }
    // Whole-VM baselines may carry a different size per target.
    if (std::any_of(recs.begin(), recs.end(), [&](const auto& r) {
          return r.container_mem_mb != meta.container_mem_mb || r.cpu_cores != meta.cpu_cores;
        }))
      meta.container_mem_mb = 0, meta.cpu_cores = 0;
    append_run(meta, recs);
    return meta;
  }

  // Current = records of the latest appended current-role run per (target,
  // container size). Everything else is Historic. Returned records carry the
  // classified role; order is store order.
  std::vector<BenchmarkRecord> query(const RecordQuery& q) const {
    std::shared_lock lock(mutex_);
    std::vector<BenchmarkRecord> out;
    for (std::size_t run_pos = 0; run_pos < run_order_.size(); ++run_pos) {
      const auto& run = runs_.at(run_order_[run_pos]);
      for (const auto& r : run.records) {
        if (q.target && r.target_name != *q.target) continue;
        if (q.container_mem_mb && r.container_mem_mb != *q.container_mem_mb) continue;
        const bool current = is_current(run_pos, r);
        if (q.role == RoleFilter::Current && !current) continue;
        if (q.role == RoleFilter::Historic && current) continue;
        auto copy = r;
        copy.role = current ? RecordRole::Current : RecordRole::Historic;
        out.push_back(std::move(copy));
      }
    }
    return out;
  }

  // Historic baseline for ranking at one container size: per target, the
  // records of the most recently appended historic run that is either an older
  // run at that size or an imported historic run of any size.
  std::vector<BenchmarkRecord> historic_baseline(std::int64_t container_mem_mb) const {
    std::shared_lock lock(mutex_);
    std::map<std::string, std::size_t> chosen;  // target -> run position
    for (std::size_t run_pos = 0; run_pos < run_order_.size(); ++run_pos) {
      const auto& run = runs_.at(run_order_[run_pos]);
      for (const auto& r : run.records) {
        const bool imported = run.meta.role == RecordRole::Historic;
        const bool older_same_size =
            r.container_mem_mb == container_mem_mb && !is_current(run_pos, r);
        if (imported || older_same_size) chosen[r.target_name] = run_pos;
      }
    }
    std::vector<BenchmarkRecord> out;
    for (const auto& [target, run_pos] : chosen) {
      for (const auto& r : runs_.at(run_order_[run_pos]).records) {
        if (r.target_name != target) continue;
        auto copy = r;
        copy.role = RecordRole::Historic;
        out.push_back(std::move(copy));
      }
    }
    return out;
  }

  std::vector<TargetStatus> status(std::span<const TargetDescriptor> inventory) const {
    std::shared_lock lock(mutex_);
    std::vector<TargetStatus> out;
    out.reserve(inventory.size());
    for (const auto& t : inventory) {
      const bool has = targets_with_data_.count(t.name) != 0;
      out.push_back({t.name, has ? Availability::Available : Availability::Missing});
    }
    return out;
  }

  std::vector<RunMetadata> runs() const {
    std::shared_lock lock(mutex_);
    std::vector<RunMetadata> out;
    for (const auto& id : run_order_) out.push_back(runs_.at(id).meta);
    return out;
  }

  bool has_run(const std::string& run_id) const {
    std::shared_lock lock(mutex_);
    return runs_.count(run_id) != 0;
  }

  std::size_t record_count() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [id, run] : runs_) n += run.records.size();
    return n;
  }

 private:
  struct StoredRun {
    RunMetadata meta;
    std::vector<BenchmarkRecord> records;
  };
  using SizeKey = std::pair<std::string, std::int64_t>;

  void check_records(const RunMetadata& meta, std::span<const BenchmarkRecord> records) const {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
      const auto* attr = catalog_.find(r.attribute_id);
      if (attr == nullptr)
        throw Error(Errc::InvariantViolation, "unknown attribute " + r.attribute_id);
      if (r.unit != attr->unit)
        throw Error(Errc::InvariantViolation, "unit mismatch for " + r.attribute_id);
      if (r.run_id != meta.run_id)
        throw Error(Errc::InvariantViolation, "record run " + r.run_id + " != " + meta.run_id);
      if (!std::isfinite(r.value) || r.value < 0.0)
        throw Error(Errc::InvariantViolation, "invalid value for " + r.attribute_id);
      if (r.role != meta.role)
        throw Error(Errc::InvariantViolation, "record role differs from run role");
      if (r.target_name.empty() || text::has_whitespace_or_pipe(r.target_name))
        throw Error(Errc::InvariantViolation, "invalid target name '" + r.target_name + "'");
      if (r.container_mem_mb < 1 || r.cpu_cores < 1)
        throw Error(Errc::InvariantViolation, "invalid container size on record");
      if (meta.role == RecordRole::Current &&
          (r.container_mem_mb != meta.container_mem_mb || r.cpu_cores != meta.cpu_cores))
        throw Error(Errc::InvariantViolation, "record container size differs from run");
      if (!seen.emplace(r.target_name, r.attribute_id).second)
        throw Error(Errc::InvariantViolation,
                    "duplicate " + r.attribute_id + " for " + r.target_name);
    }
  }

  void write_durably(const std::string& block) {
    std::FILE* f = std::fopen(path_.c_str(), "ab");
    if (f == nullptr) throw Error(Errc::RepositoryWriteFailure, "cannot open " + path_.string());
    const bool ok = std::fwrite(block.data(), 1, block.size(), f) == block.size() &&
                    std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
    const bool closed = std::fclose(f) == 0;
    if (!ok || !closed)
      throw Error(Errc::RepositoryWriteFailure, "write to " + path_.string() + " failed");
  }

  void load(const std::string& content) {
    const auto all = text::lines(content);
    std::size_t i = 0;
    while (i < all.size()) {
      const auto line = text::trim(all[i]);
      if (line.empty()) {
        ++i;
        continue;
      }
      if (!line.starts_with(kRunTag))
        throw Error(Errc::ParseError, "store: expected run header, got '" + std::string(line) + "'");
      const auto meta = parse_run_header(line);
      std::size_t j = i + 1;
      std::string block;
      while (j < all.size() && !text::trim(all[j]).starts_with(kRunTag)) {
        block.append(all[j]);
        block.push_back('\n');
        ++j;
      }
      auto parsed = parse_canonical(block, catalog_);
      if (runs_.count(meta.run_id) != 0)
        throw Error(Errc::DuplicateRun, "store holds run " + meta.run_id + " twice");
      sort_canonical(parsed.records);
      index_run(meta, std::move(parsed.records));
      i = j;
    }
  }

  void index_run(const RunMetadata& meta, std::vector<BenchmarkRecord> records) {
    const std::size_t pos = run_order_.size();
    for (const auto& r : records) {
      targets_with_data_.insert(r.target_name);
      if (meta.role == RecordRole::Current) latest_current_[{r.target_name, r.container_mem_mb}] = pos;
    }
    run_order_.push_back(meta.run_id);
    runs_.emplace(meta.run_id, StoredRun{meta, std::move(records)});
  }

  bool is_current(std::size_t run_pos, const BenchmarkRecord& r) const {
    const auto it = latest_current_.find({r.target_name, r.container_mem_mb});
    return it != latest_current_.end() && it->second == run_pos &&
           runs_.at(run_order_[run_pos]).meta.role == RecordRole::Current;
  }

  std::filesystem::path path_;
  AttributeCatalog catalog_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> run_order_;
  std::map<std::string, StoredRun> runs_;
  std::map<SizeKey, std::size_t> latest_current_;
  std::set<std::string> targets_with_data_;
};

}  // namespace benchlite
