#pragma once

// Benchmark records and the canonical line format.
//
//   #benchlite-v1 run=<run_id> target=<name> mem=<MB> cores=<N> ts=<RFC3339> [role=historic]
//   attribute_id|unit|value
//
// Header lines set the context for the data lines that follow. Text without a
// header is attributed to the RunMetadata and target passed to parse_output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

enum class RecordRole : std::uint8_t { Current, Historic };

constexpr std::string_view to_string(RecordRole r) noexcept {
  return r == RecordRole::Current ? "current" : "historic";
}

inline std::optional<RecordRole> parse_role(std::string_view s) {
  s = text::trim(s);
  if (s == "current") return RecordRole::Current;
  if (s == "historic") return RecordRole::Historic;
  return std::nullopt;
}

struct BenchmarkRecord {
  std::string target_name;
  std::string attribute_id;
  double value = 0.0;
  std::string unit;
  std::int64_t container_mem_mb = 0;
  int cpu_cores = 0;
  std::string run_id;
  Timestamp timestamp{};
  RecordRole role = RecordRole::Current;

  bool operator==(const BenchmarkRecord&) const = default;
};

struct RunMetadata {
  std::string run_id;
  std::int64_t container_mem_mb = 0;
  int cpu_cores = 0;
  Timestamp started{};
  Timestamp finished{};
  std::string tool = "lmbench-summary";
  std::string tool_version = "1";
  RecordRole role = RecordRole::Current;

  bool operator==(const RunMetadata&) const = default;
};

inline void validate(const RunMetadata& meta) {
  if (meta.run_id.empty() || text::has_whitespace_or_pipe(meta.run_id))
    throw Error(Errc::InvalidArgument, "invalid run id '" + meta.run_id + "'");
  if (meta.finished < meta.started)
    throw Error(Errc::InvalidArgument, "run " + meta.run_id + " finishes before it starts");
  if (text::has_whitespace_or_pipe(meta.tool) || text::has_whitespace_or_pipe(meta.tool_version))
    throw Error(Errc::InvalidArgument, "tool name/version must not contain whitespace");
}

struct ParsedOutput {
  std::vector<BenchmarkRecord> records;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kCanonicalTag = "#benchlite-v1";

namespace detail {

struct BlockContext {
  std::string run_id;
  std::string target;
  std::int64_t mem = 0;
  int cores = 0;
  Timestamp ts{};
  RecordRole role = RecordRole::Current;
};

inline void apply_header(std::string_view line, std::size_t lineno, BlockContext& ctx) {
  const auto where = "line " + std::to_string(lineno) + ": ";
  bool has_run = false, has_target = false, has_mem = false, has_cores = false, has_ts = false;
  ctx.role = RecordRole::Current;
  for (const auto& [k, v] : text::key_values(line.substr(kCanonicalTag.size()))) {
    if (k == "run") {
      ctx.run_id = std::string(v);
      has_run = !v.empty();
    } else if (k == "target") {
      ctx.target = std::string(v);
      has_target = !v.empty();
    } else if (k == "mem") {
      const auto m = text::parse_int<std::int64_t>(v);
      if (!m || *m < 1) throw Error(Errc::ParseError, where + "bad mem in header");
      ctx.mem = *m;
      has_mem = true;
    } else if (k == "cores") {
      const auto c = text::parse_int<int>(v);
      if (!c || *c < 1) throw Error(Errc::ParseError, where + "bad cores in header");
      ctx.cores = *c;
      has_cores = true;
    } else if (k == "ts") {
      const auto t = text::parse_rfc3339(v);
      if (!t) throw Error(Errc::ParseError, where + "bad ts in header");
      ctx.ts = *t;
      has_ts = true;
    } else if (k == "role") {
      const auto r = parse_role(v);
      if (!r) throw Error(Errc::ParseError, where + "bad role in header");
      ctx.role = *r;
    } else {
      throw Error(Errc::ParseError, where + "unknown header key '" + std::string(k) + "'");
    }
  }
  if (!(has_run && has_target && has_mem && has_cores && has_ts))
    throw Error(Errc::ParseError, where + "header needs run, target, mem, cores and ts");
}

}  // namespace detail

// One record per recognized `attribute_id|unit|value` line. Lines that do not
// name a catalog attribute become warnings.
inline ParsedOutput parse_output(std::string_view text_in, const AttributeCatalog& catalog,
                                 const RunMetadata& meta, std::string_view target_name) {
  ParsedOutput out;
  detail::BlockContext ctx{meta.run_id,       std::string(target_name), meta.container_mem_mb,
                           meta.cpu_cores,    meta.started,             meta.role};
  std::size_t lineno = 0;
  for (const auto raw : text::lines(text_in)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.starts_with(kCanonicalTag) &&
        (line.size() == kCanonicalTag.size() || line[kCanonicalTag.size()] == ' ')) {
      detail::apply_header(line, lineno, ctx);
      continue;
    }
    if (text::is_blank_or_comment(line)) continue;

    const auto f = text::split_fields(line);
    const auto* attr = f.size() == 3 ? catalog.find(f[0]) : nullptr;
    if (attr == nullptr) {
      out.warnings.push_back("line " + std::to_string(lineno) + ": unrecognized '" +
                             std::string(line) + "'");
      continue;
    }
    const auto value = text::parse_double(f[2]);
    if (!value || !std::isfinite(*value) || *value < 0.0)
      throw Error(Errc::MalformedValue, "line " + std::to_string(lineno) + ": '" +
                                            std::string(line) + "'");
    if (f[1] != attr->unit)
      throw Error(Errc::UnitMismatch, "line " + std::to_string(lineno) + ": " + attr->id +
                                          " expects unit " + attr->unit + ", got " +
                                          std::string(f[1]));
    out.records.push_back({ctx.target, attr->id, *value, attr->unit, ctx.mem, ctx.cores,
                           ctx.run_id, ctx.ts, ctx.role});
  }
  if (out.records.empty())
    throw Error(Errc::NoRecognizedAttributes, "no recognized attribute lines in output");
  return out;
}

// Parses text that is entirely self-describing (every data line is preceded by
// a header).
inline ParsedOutput parse_canonical(std::string_view text_in, const AttributeCatalog& catalog) {
  for (const auto raw : text::lines(text_in)) {
    const auto line = text::trim(raw);
    if (line.starts_with(kCanonicalTag)) break;
    if (!text::is_blank_or_comment(line))
      throw Error(Errc::ParseError, "data line before the first #benchlite-v1 header");
  }
  return parse_output(text_in, catalog, RunMetadata{}, "");
}

namespace detail {

inline auto record_key(const BenchmarkRecord& r) {
  return std::tie(r.target_name, r.attribute_id, r.container_mem_mb, r.cpu_cores, r.timestamp,
                  r.role, r.value, r.unit);
}

inline std::string header_line(const BenchmarkRecord& r) {
  std::string h(kCanonicalTag);
  h += " run=" + r.run_id + " target=" + r.target_name + " mem=" +
       std::to_string(r.container_mem_mb) + " cores=" + std::to_string(r.cpu_cores) +
       " ts=" + text::format_rfc3339(r.timestamp);
  if (r.role == RecordRole::Historic) h += " role=historic";
  return h;
}

}  // namespace detail

// The order emit_canonical writes records in (target, then attribute).
inline void sort_canonical(std::vector<BenchmarkRecord>& records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return detail::record_key(a) < detail::record_key(b);
  });
}

// Stable, sorted canonical text for the records of one run. A header is written
// whenever the block context (target, size, timestamp, role) changes.
inline std::string emit_canonical(std::span<const BenchmarkRecord> records) {
  if (records.empty()) throw Error(Errc::InvalidArgument, "no records to emit");
  for (const auto& r : records) {
    if (r.run_id != records.front().run_id)
      throw Error(Errc::MixedRuns, "records span runs " + records.front().run_id + " and " + r.run_id);
  }
  std::vector<const BenchmarkRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return detail::record_key(*a) < detail::record_key(*b);
  });

  std::string out;
  std::string current_header;
  for (const auto* r : sorted) {
    auto header = detail::header_line(*r);
    if (header != current_header) {
      out += header;
      out += '\n';
      current_header = std::move(header);
    }
    out += r->attribute_id;
    out += '|';
    out += r->unit;
    out += '|';
    out += text::format_double(r->value);
    out += '\n';
  }
  return out;
}

}  // namespace benchlite
