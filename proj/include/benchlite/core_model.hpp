#pragma once

// Domain vocabulary: attribute groups, the attribute catalog, user weights,
// benchmark targets and container resource limits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "benchlite/error.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

enum class GroupId : std::uint8_t {
  MemoryProcess = 0,
  LocalCommunication = 1,
  Computation = 2,
  Storage = 3,
};

inline constexpr std::size_t kGroupCount = 4;

inline constexpr std::array<GroupId, kGroupCount> kAllGroups = {
    GroupId::MemoryProcess, GroupId::LocalCommunication, GroupId::Computation, GroupId::Storage};

constexpr std::size_t index_of(GroupId g) noexcept { return static_cast<std::size_t>(g); }

constexpr std::string_view to_string(GroupId g) noexcept {
  switch (g) {
    case GroupId::MemoryProcess: return "memory_process";
    case GroupId::LocalCommunication: return "local_communication";
    case GroupId::Computation: return "computation";
    case GroupId::Storage: return "storage";
  }
  return "unknown";
}

// Accepts the canonical names above and the short forms g1..g4.
inline std::optional<GroupId> parse_group(std::string_view s) {
  s = text::trim(s);
  for (const auto g : kAllGroups) {
    if (s == to_string(g)) return g;
  }
  if (s.size() == 2 && (s[0] == 'g' || s[0] == 'G') && s[1] >= '1' && s[1] <= '4')
    return static_cast<GroupId>(s[1] - '1');
  return std::nullopt;
}

enum class Direction : std::uint8_t { HigherIsBetter, LowerIsBetter };

constexpr std::string_view to_string(Direction d) noexcept {
  return d == Direction::HigherIsBetter ? "higher" : "lower";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  s = text::trim(s);
  if (s == "higher" || s == "HigherIsBetter") return Direction::HigherIsBetter;
  if (s == "lower" || s == "LowerIsBetter") return Direction::LowerIsBetter;
  return std::nullopt;
}

struct AttributeDescriptor {
  std::string id;
  std::string display_name;
  GroupId group = GroupId::MemoryProcess;
  std::string unit;
  Direction direction = Direction::HigherIsBetter;

  bool operator==(const AttributeDescriptor&) const = default;
};

class AttributeCatalog {
 public:
  AttributeCatalog() = default;
  explicit AttributeCatalog(int version) : version_(version) {}

  // Rejects duplicate ids and ids that cannot appear in the line formats.
  void add(AttributeDescriptor attr) {
    if (attr.id.empty() || text::has_whitespace_or_pipe(attr.id))
      throw Error(Errc::InvalidArgument, "invalid attribute id '" + attr.id + "'");
    if (attr.unit.empty() || text::has_whitespace_or_pipe(attr.unit))
      throw Error(Errc::InvalidArgument, "invalid unit for attribute " + attr.id);
    if (index_.count(attr.id) != 0)
      throw Error(Errc::DuplicateAttribute, "duplicate attribute id " + attr.id);
    index_.emplace(attr.id, attributes_.size());
    attributes_.push_back(std::move(attr));
  }

  const AttributeDescriptor* find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &attributes_[it->second];
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const std::vector<AttributeDescriptor>& attributes() const noexcept { return attributes_; }
  std::size_t size() const noexcept { return attributes_.size(); }
  bool empty() const noexcept { return attributes_.empty(); }
  int version() const noexcept { return version_; }

  std::size_t count_in(GroupId g) const {
    return static_cast<std::size_t>(std::count_if(attributes_.begin(), attributes_.end(),
                                                  [g](const auto& a) { return a.group == g; }));
  }

  // Throws EmptyGroup for the first group without attributes.
  void validate() const {
    if (attributes_.empty()) throw Error(Errc::EmptyGroup, "catalog has no attributes");
    for (const auto g : kAllGroups) {
      if (count_in(g) == 0)
        throw Error(Errc::EmptyGroup, "no attributes in group " + std::string(to_string(g)));
    }
  }

 private:
  int version_ = 1;
  std::vector<AttributeDescriptor> attributes_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Curated lmbench-style attribute set spanning all four groups.
inline AttributeCatalog default_catalog() {
  using enum GroupId;
  constexpr auto lower = Direction::LowerIsBetter;
  constexpr auto higher = Direction::HigherIsBetter;
  AttributeCatalog c(1);
  c.add({"mem.latency.main", "Main memory latency", MemoryProcess, "ns", lower});
  c.add({"mem.latency.random", "Random memory latency", MemoryProcess, "ns", lower});
  c.add({"mem.latency.l1", "L1 cache latency", MemoryProcess, "ns", lower});
  c.add({"mem.latency.l2", "L2 cache latency", MemoryProcess, "ns", lower});

  c.add({"mem.bw.read", "Memory read bandwidth", LocalCommunication, "MB/s", higher});
  c.add({"mem.bw.write", "Memory write bandwidth", LocalCommunication, "MB/s", higher});
  c.add({"ipc.bw.pipe", "Pipe bandwidth", LocalCommunication, "MB/s", higher});
  c.add({"ipc.bw.af_unix", "AF_UNIX socket bandwidth", LocalCommunication, "MB/s", higher});
  c.add({"ipc.bw.tcp", "TCP bandwidth", LocalCommunication, "MB/s", higher});

  c.add({"cpu.int.add", "Integer add", Computation, "ns", lower});
  c.add({"cpu.int.mul", "Integer multiply", Computation, "ns", lower});
  c.add({"cpu.int.div", "Integer divide", Computation, "ns", lower});
  c.add({"cpu.int.mod", "Integer modulus", Computation, "ns", lower});
  c.add({"cpu.float.add", "Float add", Computation, "ns", lower});
  c.add({"cpu.float.mul", "Float multiply", Computation, "ns", lower});
  c.add({"cpu.float.div", "Float divide", Computation, "ns", lower});
  c.add({"cpu.double.add", "Double add", Computation, "ns", lower});
  c.add({"cpu.double.mul", "Double multiply", Computation, "ns", lower});
  c.add({"cpu.double.div", "Double divide", Computation, "ns", lower});

  c.add({"fs.seq.create", "Sequential file create", Storage, "ops/s", higher});
  c.add({"fs.seq.read", "Sequential file read", Storage, "ops/s", higher});
  c.add({"fs.seq.delete", "Sequential file delete", Storage, "ops/s", higher});
  c.add({"fs.rand.create", "Random file create", Storage, "ops/s", higher});
  c.add({"fs.rand.read", "Random file read", Storage, "ops/s", higher});
  c.add({"fs.rand.delete", "Random file delete", Storage, "ops/s", higher});
  return c;
}

// Override file: `id|display_name|group|unit|direction` per line, '#' comments.
// An optional `#version=N` comment sets the catalog version.
inline AttributeCatalog parse_catalog(std::string_view content) {
  AttributeCatalog catalog;
  int version = 1;
  std::vector<AttributeDescriptor> attrs;
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.starts_with("#version=")) {
      const auto v = text::parse_int<int>(line.substr(9));
      if (!v) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad version");
      version = *v;
      continue;
    }
    if (text::is_blank_or_comment(line)) continue;
    const auto f = text::split_fields(line);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 5) throw Error(Errc::ParseError, where + "expected 5 fields");
    const auto group = parse_group(f[2]);
    if (!group) throw Error(Errc::ParseError, where + "unknown group '" + std::string(f[2]) + "'");
    const auto dir = parse_direction(f[4]);
    if (!dir)
      throw Error(Errc::ParseError, where + "unknown direction '" + std::string(f[4]) + "'");
    attrs.push_back({std::string(f[0]), std::string(f[1]), *group, std::string(f[3]), *dir});
  }
  catalog = AttributeCatalog(version);
  for (auto& a : attrs) catalog.add(std::move(a));
  catalog.validate();
  return catalog;
}

inline AttributeCatalog load_catalog(const std::optional<std::string>& override_path) {
  if (!override_path) return default_catalog();
  return parse_catalog(text::read_file(*override_path));
}

class WeightVector {
 public:
  static constexpr double kMin = 0.0;
  static constexpr double kMax = 5.0;

  WeightVector() = default;

  double operator[](GroupId g) const noexcept { return w_[index_of(g)]; }
  const std::array<double, kGroupCount>& values() const noexcept { return w_; }

  bool all_zero() const noexcept {
    return std::all_of(w_.begin(), w_.end(), [](double v) { return v == 0.0; });
  }

  bool operator==(const WeightVector&) const = default;

 private:
  explicit WeightVector(std::array<double, kGroupCount> w) : w_(w) {}
  friend WeightVector validate_weights(const std::map<GroupId, double>&);

  std::array<double, kGroupCount> w_{};
};

inline WeightVector validate_weights(const std::map<GroupId, double>& raw) {
  std::array<double, kGroupCount> w{};
  for (const auto g : kAllGroups) {
    const auto it = raw.find(g);
    if (it == raw.end())
      throw Error(Errc::MissingGroup, "missing weight for group " + std::string(to_string(g)));
    const double v = it->second;
    if (!(v >= WeightVector::kMin && v <= WeightVector::kMax))
      throw Error(Errc::OutOfRange, "weight " + text::format_double(v) + " for group " +
                                        std::string(to_string(g)) + " outside [0,5]");
    w[index_of(g)] = v;
  }
  return WeightVector(w);
}

inline WeightVector validate_weights(const WeightVector& w) {
  std::map<GroupId, double> raw;
  for (const auto g : kAllGroups) raw[g] = w[g];
  return validate_weights(raw);
}

inline WeightVector make_weights(double memory_process, double local_communication,
                                 double computation, double storage) {
  return validate_weights({{GroupId::MemoryProcess, memory_process},
                           {GroupId::LocalCommunication, local_communication},
                           {GroupId::Computation, computation},
                           {GroupId::Storage, storage}});
}

// "4,3,5,0" in group order.
inline WeightVector parse_weights(std::string_view s) {
  const auto parts = text::split_fields(s, ',');
  std::map<GroupId, double> raw;
  for (std::size_t i = 0; i < parts.size() && i < kGroupCount; ++i) {
    const auto v = text::parse_double(parts[i]);
    if (!v) throw Error(Errc::ParseError, "weight '" + std::string(parts[i]) + "' is not a number");
    raw[static_cast<GroupId>(i)] = *v;
  }
  if (parts.size() > kGroupCount)
    throw Error(Errc::InvalidArgument, "expected 4 comma-separated weights");
  return validate_weights(raw);
}

struct TargetDescriptor {
  std::string name;
  std::string address;
  int vcpus = 1;
  std::int64_t memory_mib = 1;
  std::map<std::string, std::string> metadata;

  bool operator==(const TargetDescriptor&) const = default;
};

struct ContainerSpec {
  std::int64_t memory_mb = 0;
  int cpu_cores = 0;

  bool operator==(const ContainerSpec&) const = default;
};

inline void validate(const ContainerSpec& spec) {
  if (spec.memory_mb < 1)
    throw Error(Errc::InvalidArgument, "container memory_mb must be >= 1");
  if (spec.cpu_cores < 1) throw Error(Errc::InvalidArgument, "container cpu_cores must be >= 1");
}

inline bool fits(const ContainerSpec& spec, const TargetDescriptor& target) noexcept {
  return spec.cpu_cores <= target.vcpus;
}

// Inventory file: `name|address|vcpus|memory_mib[|key=value...]`.
inline std::vector<TargetDescriptor> parse_inventory(std::string_view content) {
  std::vector<TargetDescriptor> out;
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto f = text::split_fields(raw);
    if (f.size() < 4) throw Error(Errc::ParseError, where + "expected name|address|vcpus|memory_mib");
    TargetDescriptor t;
    t.name = std::string(f[0]);
    if (t.name.empty() || text::has_whitespace_or_pipe(t.name))
      throw Error(Errc::ParseError, where + "invalid target name");
    t.address = std::string(f[1]);
    const auto vcpus = text::parse_int<int>(f[2]);
    const auto mem = text::parse_int<std::int64_t>(f[3]);
    if (!vcpus || *vcpus < 1) throw Error(Errc::ParseError, where + "vcpus must be a positive integer");
    if (!mem || *mem < 1) throw Error(Errc::ParseError, where + "memory_mib must be a positive integer");
    t.vcpus = *vcpus;
    t.memory_mib = *mem;
    for (std::size_t i = 4; i < f.size(); ++i) {
      const auto eq = f[i].find('=');
      if (eq == std::string_view::npos) throw Error(Errc::ParseError, where + "metadata must be key=value");
      t.metadata.emplace(std::string(f[i].substr(0, eq)), std::string(f[i].substr(eq + 1)));
    }
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.name == t.name; });
    if (dup) throw Error(Errc::DuplicateTarget, where + "duplicate target " + t.name);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<TargetDescriptor> load_inventory(const std::string& path) {
  return parse_inventory(text::read_file(path));
}

}  // namespace benchlite
