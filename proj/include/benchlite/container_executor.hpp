#pragma once

// Executor backed by a container runtime CLI (docker or podman). Targets whose
// address is "local" run on this host; any other address is reached over ssh.
// Not exercised by the default test suite beyond command construction.

#include <array>
#include <chrono>
#include <map>
#include <mutex>
#include <cstdio>
#include <string>
#include <string_view>
#include <sys/wait.h>

#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/orchestrator.hpp"

namespace benchlite {

struct ContainerRuntimeOptions {
  std::string runtime = "docker";
  std::string image = "benchlite/suite:latest";
  std::string ssh = "ssh -o BatchMode=yes";
};

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

class ContainerRuntimeExecutor final : public Executor {
 public:
  explicit ContainerRuntimeExecutor(ContainerRuntimeOptions options) : options_(std::move(options)) {}

  // Memory and CPU limits map to --memory and --cpuset-cpus.
  std::string provision_command(const TargetDescriptor& target, const ContainerSpec& spec,
                                std::string_view run_id) const {
    const std::string cpus = spec.cpu_cores == 1 ? "0" : "0-" + std::to_string(spec.cpu_cores - 1);
    const std::string cmd = options_.runtime + " run -d --rm --memory=" + std::to_string(spec.memory_mb) +
                            "m --memory-swap=" + std::to_string(spec.memory_mb) + "m --cpuset-cpus=" +
                            cpus + " --label benchlite.run=" + shell_quote(run_id) + " " +
                            shell_quote(options_.image) + " sleep infinity";
    return remote(target.address, cmd);
  }

  std::string exec_command(const TargetDescriptor& target, std::string_view container_id,
                           std::string_view suite_command, std::chrono::seconds timeout) const {
    const std::string cmd = "timeout " + std::to_string(timeout.count()) + " " + options_.runtime +
                            " exec " + shell_quote(container_id) + " sh -c " +
                            shell_quote(suite_command);
    return remote(target.address, cmd);
  }

  std::string teardown_command(const TargetDescriptor& target, std::string_view container_id) const {
    return remote(target.address, options_.runtime + " rm -f " + shell_quote(container_id));
  }

  ContainerHandle provision(const TargetDescriptor& target, const ContainerSpec& spec,
                            std::string_view run_id) override {
    validate(spec);
    const auto [out, status] = run(provision_command(target, spec, run_id));
    const auto id = std::string(text::trim(out));
    if (status != 0 || id.empty())
      throw Error(Errc::IoError, "container provision failed on " + target.name);
    remember(id, target);
    return {id, target.name};
  }

  ExecOutcome exec(const ContainerHandle& handle, std::string_view command,
                   std::chrono::seconds timeout) override {
    const auto [out, status] = run(exec_command(target_of(handle), handle.id, command, timeout));
    // coreutils timeout exits 124 when the limit is hit
    return {out, status, status == 124};
  }

  void teardown(const ContainerHandle& handle) noexcept override {
    try {
      (void)run(teardown_command(target_of(handle), handle.id));
      std::lock_guard lock(mutex_);
      targets_.erase(handle.id);
    } catch (...) {
    }
  }

 private:
  std::string remote(const std::string& address, const std::string& cmd) const {
    if (address.empty() || address == "local") return cmd;
    return options_.ssh + " " + shell_quote(address) + " " + shell_quote(cmd);
  }

  static std::pair<std::string, int> run(const std::string& cmd) {
    std::FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
    if (pipe == nullptr) throw Error(Errc::IoError, "cannot spawn: " + cmd);
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int raw = ::pclose(pipe);
    const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return {out, status};
  }

  void remember(const std::string& id, const TargetDescriptor& t) {
    std::lock_guard lock(mutex_);
    targets_[id] = t;
  }

  TargetDescriptor target_of(const ContainerHandle& h) const {
    std::lock_guard lock(mutex_);
    return targets_.at(h.id);
  }

  ContainerRuntimeOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, TargetDescriptor> targets_;
};

}  // namespace benchlite
