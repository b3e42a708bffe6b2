#pragma once

// Benchmark collection across an inventory: for every target, provision a
// resource-limited container, run the suite in it, parse the canonical output,
// tear the container down, then store all successful records as one run.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/ingestion.hpp"
#include "benchlite/repository.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

struct ContainerHandle {
  std::string id;
  std::string target;
};

struct ExecOutcome {
  std::string output;
  int exit_status = 0;
  bool timed_out = false;
};

// What the orchestrator needs from a container backend. teardown() is called
// exactly once for every handle provision() returned.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual ContainerHandle provision(const TargetDescriptor& target, const ContainerSpec& spec,
                                    std::string_view run_id) = 0;
  virtual ExecOutcome exec(const ContainerHandle& handle, std::string_view command,
                           std::chrono::seconds timeout) = 0;
  virtual void teardown(const ContainerHandle& handle) noexcept = 0;
};

struct RunPlan {
  std::string run_id;
  Timestamp created{};
  ContainerSpec container;
  std::vector<TargetDescriptor> targets;
  std::string suite_command = "benchlite-suite";
  int max_parallel_targets = 1;
  int timeout_s = 1800;
};

struct PlanOptions {
  // Both default to "now" and a random nonce; fix them for reproducible ids.
  std::optional<Timestamp> now;
  std::optional<std::uint32_t> nonce;
  std::vector<std::string> only_targets;
  std::string suite_command = "benchlite-suite";
  int max_parallel_targets = 1;
  int timeout_s = 1800;
};

inline std::string make_run_id(Timestamp ts, std::uint32_t nonce) {
  auto stamp = text::format_rfc3339(ts);
  std::erase(stamp, '-');
  std::erase(stamp, ':');
  char hex[9];
  std::snprintf(hex, sizeof(hex), "%08x", nonce);
  return "run-" + stamp + "-" + hex;
}

inline RunPlan plan_run(std::span<const TargetDescriptor> inventory, const ContainerSpec& container,
                        const PlanOptions& options = {}) {
  validate(container);
  if (inventory.empty()) throw Error(Errc::EmptyInventory, "inventory has no targets");
  if (options.max_parallel_targets < 1)
    throw Error(Errc::InvalidArgument, "max_parallel_targets must be >= 1");
  if (options.timeout_s < 1) throw Error(Errc::InvalidArgument, "timeout_s must be >= 1");

  RunPlan plan;
  plan.container = container;
  plan.suite_command = options.suite_command;
  plan.max_parallel_targets = options.max_parallel_targets;
  plan.timeout_s = options.timeout_s;
  plan.created = options.now.value_or(
      std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
  const auto nonce = options.nonce.value_or(static_cast<std::uint32_t>(std::random_device{}()));
  plan.run_id = make_run_id(plan.created, nonce);

  for (const auto& name : options.only_targets) {
    const bool known = std::any_of(inventory.begin(), inventory.end(),
                                   [&](const auto& t) { return t.name == name; });
    if (!known) throw Error(Errc::UnknownTarget, "target " + name + " is not in the inventory");
  }
  for (const auto& t : inventory) {
    if (!options.only_targets.empty() &&
        std::find(options.only_targets.begin(), options.only_targets.end(), t.name) ==
            options.only_targets.end())
      continue;
    if (!fits(container, t))
      throw Error(Errc::CoresExceedTarget, "container needs " + std::to_string(container.cpu_cores) +
                                               " cores but " + t.name + " has " +
                                               std::to_string(t.vcpus));
    plan.targets.push_back(t);
  }
  return plan;
}

enum class TargetState : std::uint8_t { Pending, Running, Succeeded, Failed, TimedOut };

constexpr std::string_view to_string(TargetState s) noexcept {
  switch (s) {
    case TargetState::Pending: return "Pending";
    case TargetState::Running: return "Running";
    case TargetState::Succeeded: return "Succeeded";
    case TargetState::Failed: return "Failed";
    case TargetState::TimedOut: return "TimedOut";
  }
  return "Unknown";
}

constexpr bool is_terminal(TargetState s) noexcept {
  return s == TargetState::Succeeded || s == TargetState::Failed || s == TargetState::TimedOut;
}

struct TargetOutcome {
  std::string target;
  TargetState status = TargetState::Pending;
  std::string reason;  // set for Failed
  double duration_s = 0.0;
  std::size_t record_count = 0;
  std::vector<std::string> warnings;
};

struct RunResult {
  std::string run_id;
  RunMetadata meta;
  std::vector<TargetOutcome> targets;  // plan order
  std::vector<BenchmarkRecord> records;

  std::size_t succeeded() const {
    return static_cast<std::size_t>(std::count_if(targets.begin(), targets.end(), [](const auto& t) {
      return t.status == TargetState::Succeeded;
    }));
  }
};

// Called from worker threads; implementations must be thread-safe.
using ProgressCallback = std::function<void(const std::string& target, TargetState state)>;

struct ExecuteOptions {
  ProgressCallback on_progress;
  // Where run output is written if the repository append fails. Defaults to
  // the directory of the store file.
  std::optional<std::filesystem::path> salvage_dir;
  std::string tool = "lmbench-summary";
  std::string tool_version = "1";
};

namespace detail {

class LeaseGuard {
 public:
  LeaseGuard(Executor& ex, ContainerHandle h) : ex_(ex), h_(std::move(h)) {}
  ~LeaseGuard() { ex_.teardown(h_); }
  LeaseGuard(const LeaseGuard&) = delete;
  LeaseGuard& operator=(const LeaseGuard&) = delete;
  const ContainerHandle& handle() const noexcept { return h_; }

 private:
  Executor& ex_;
  ContainerHandle h_;
};

inline TargetOutcome run_one(const RunPlan& plan, const TargetDescriptor& target, Executor& executor,
                             const AttributeCatalog& catalog, std::vector<BenchmarkRecord>& sink) {
  TargetOutcome outcome;
  outcome.target = target.name;
  if (!fits(plan.container, target)) {
    outcome.status = TargetState::Failed;
    outcome.reason = std::string(to_string(Errc::CoresExceedTarget));
    return outcome;
  }
  try {
    LeaseGuard lease(executor, executor.provision(target, plan.container, plan.run_id));
    const auto exec = executor.exec(lease.handle(), plan.suite_command,
                                    std::chrono::seconds(plan.timeout_s));
    if (exec.timed_out) {
      outcome.status = TargetState::TimedOut;
      outcome.reason = "timed out after " + std::to_string(plan.timeout_s) + "s";
      return outcome;
    }
    if (exec.exit_status != 0) {
      outcome.status = TargetState::Failed;
      outcome.reason = "exit status " + std::to_string(exec.exit_status);
      return outcome;
    }
    RunMetadata meta{plan.run_id, plan.container.memory_mb, plan.container.cpu_cores,
                     plan.created, plan.created};
    auto parsed = parse_output(exec.output, catalog, meta, target.name);
    for (auto& r : parsed.records) {
      // The suite may print its own header; the plan is authoritative.
      r.target_name = target.name;
      r.run_id = plan.run_id;
      r.container_mem_mb = plan.container.memory_mb;
      r.cpu_cores = plan.container.cpu_cores;
      r.timestamp = plan.created;
      r.role = RecordRole::Current;
    }
    outcome.status = TargetState::Succeeded;
    outcome.record_count = parsed.records.size();
    outcome.warnings = std::move(parsed.warnings);
    sink = std::move(parsed.records);
  } catch (const Error& e) {
    outcome.status = TargetState::Failed;
    outcome.reason = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    outcome.status = TargetState::Failed;
    outcome.reason = e.what();
  }
  return outcome;
}

}  // namespace detail

inline RunResult execute_run(const RunPlan& plan, Executor& executor, Repository& repository,
                             const ExecuteOptions& options = {}) {
  if (plan.targets.empty()) throw Error(Errc::EmptyInventory, "plan has no targets");
  const auto& catalog = repository.catalog();
  const auto n = plan.targets.size();
  std::vector<TargetOutcome> outcomes(n);
  std::vector<std::vector<BenchmarkRecord>> per_target(n);
  const auto notify = [&](const std::string& t, TargetState s) {
    if (options.on_progress) options.on_progress(t, s);
  };
  for (const auto& t : plan.targets) notify(t.name, TargetState::Pending);

  const auto wall_start = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const auto& target = plan.targets[i];
      notify(target.name, TargetState::Running);
      const auto t0 = std::chrono::steady_clock::now();
      outcomes[i] = detail::run_one(plan, target, executor, catalog, per_target[i]);
      outcomes[i].duration_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      notify(target.name, outcomes[i].status);
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(plan.max_parallel_targets), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  const auto elapsed = std::chrono::ceil<std::chrono::seconds>(std::chrono::steady_clock::now() - wall_start);

  RunResult result;
  result.run_id = plan.run_id;
  result.targets = std::move(outcomes);
  for (auto& recs : per_target)
    result.records.insert(result.records.end(), std::make_move_iterator(recs.begin()),
                          std::make_move_iterator(recs.end()));
  result.meta = RunMetadata{plan.run_id,       plan.container.memory_mb, plan.container.cpu_cores,
                            plan.created,      plan.created + elapsed,   options.tool,
                            options.tool_version, RecordRole::Current};

  if (result.records.empty()) {
    std::string why;
    for (const auto& t : result.targets) why += " " + t.target + "=" + std::string(to_string(t.status));
    throw Error(Errc::AllTargetsFailed, "no target produced benchmarks:" + why);
  }

  try {
    repository.append_run(result.meta, result.records);
  } catch (const Error& e) {
    const auto dir = options.salvage_dir.value_or(repository.path().parent_path());
    const auto salvage = dir / (plan.run_id + ".salvage");
    std::ofstream out(salvage, std::ios::binary);
    out << run_header_line(result.meta) << '\n' << emit_canonical(result.records);
    const bool saved = static_cast<bool>(out);
    throw Error(Errc::RepositoryWriteFailure,
                std::string(e.what()) + (saved ? "; output saved to " + salvage.string()
                                               : "; salvage to " + salvage.string() + " also failed"));
  }
  return result;
}

}  // namespace benchlite
