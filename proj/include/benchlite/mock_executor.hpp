#pragma once

// Deterministic stand-in for a container fleet. A profile gives, per target and
// attribute, a base value and a noise fraction; exec prints canonical lines with
// value = base * (1 + eps), |eps| <= noise, eps fixed by (seed, target,
// attribute, run id).
//
// Profile file: `target|attribute_id|base_value|noise_fraction` per line.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/orchestrator.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

struct ProfileEntry {
  std::string attribute_id;
  double base = 0.0;
  double noise = 0.0;
};

using MockProfile = std::map<std::string, std::vector<ProfileEntry>>;

inline MockProfile parse_profile(std::string_view content) {
  MockProfile profile;
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto f = text::split_fields(raw);
    if (f.size() != 4) throw Error(Errc::ParseError, where + "expected target|attribute|base|noise");
    const auto base = text::parse_double(f[2]);
    const auto noise = text::parse_double(f[3]);
    if (!base || !std::isfinite(*base) || *base < 0.0)
      throw Error(Errc::ParseError, where + "base must be a nonnegative number");
    if (!noise || !(*noise >= 0.0 && *noise < 1.0))
      throw Error(Errc::ParseError, where + "noise fraction must be in [0,1)");
    profile[std::string(f[0])].push_back({std::string(f[1]), *base, *noise});
  }
  return profile;
}

inline MockProfile load_profile(const std::string& path) { return parse_profile(text::read_file(path)); }

class MockExecutor final : public Executor {
 public:
  MockExecutor(MockProfile profile, std::uint64_t seed, AttributeCatalog catalog)
      : profile_(std::move(profile)), seed_(seed), catalog_(std::move(catalog)) {}

  ContainerHandle provision(const TargetDescriptor& target, const ContainerSpec& spec,
                            std::string_view run_id) override {
    validate(spec);
    if (profile_.count(target.name) == 0)
      throw Error(Errc::UnknownTarget, "mock profile has no target " + target.name);
    const auto n = counter_.fetch_add(1);
    std::lock_guard lock(mutex_);
    const std::string id = "mock-" + std::to_string(n);
    run_of_[id] = std::string(run_id);
    return {id, target.name};
  }

  ExecOutcome exec(const ContainerHandle& handle, std::string_view, std::chrono::seconds) override {
    std::string run_id;
    {
      std::lock_guard lock(mutex_);
      run_id = run_of_.at(handle.id);
    }
    return {render(handle.target, run_id), 0, false};
  }

  void teardown(const ContainerHandle& handle) noexcept override {
    std::lock_guard lock(mutex_);
    run_of_.erase(handle.id);
  }

  // eps in [-noise, noise], derived only from the seed and names.
  double epsilon(std::string_view target, std::string_view attribute, std::string_view run_id,
                 double noise) const {
    if (noise == 0.0) return 0.0;
    std::uint64_t h = text::fnv1a(target, seed_ ^ 0x9e3779b97f4a7c15ULL);
    h = text::fnv1a("|", h);
    h = text::fnv1a(attribute, h);
    h = text::fnv1a("|", h);
    h = text::fnv1a(run_id, h);
    std::mt19937_64 rng(h);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
    return noise * (2.0 * u - 1.0);
  }

  std::string render(const std::string& target, std::string_view run_id) const {
    const auto it = profile_.find(target);
    if (it == profile_.end()) throw Error(Errc::UnknownTarget, "mock profile has no target " + target);
    std::string out = "# mock suite output for " + target + "\n";
    for (const auto& e : it->second) {
      const auto* attr = catalog_.find(e.attribute_id);
      const std::string unit = attr != nullptr ? attr->unit : "unknown";
      const double v = e.base * (1.0 + epsilon(target, e.attribute_id, run_id, e.noise));
      out += e.attribute_id + "|" + unit + "|" + text::format_double(v) + "\n";
    }
    return out;
  }

  std::size_t open_containers() const {
    std::lock_guard lock(mutex_);
    return run_of_.size();
  }

 private:
  MockProfile profile_;
  std::uint64_t seed_;
  AttributeCatalog catalog_;
  std::atomic<std::uint64_t> counter_{0};
  mutable std::mutex mutex_;
  std::map<std::string, std::string> run_of_;
};

inline std::unique_ptr<MockExecutor> mock_executor(const std::string& profile_file, std::uint64_t seed,
                                                   const AttributeCatalog& catalog) {
  return std::make_unique<MockExecutor>(load_profile(profile_file), seed, catalog);
}

}  // namespace benchlite
