#pragma once

// HTTP API over the repository, orchestrator and ranking engine.
//
//   GET  /api/targets                     inventory with Available/Missing
//   POST /api/runs                        {mem_mb, cpu_cores, targets?, max_parallel?} -> 202 {run_id}
//   GET  /api/runs/{id}                   live per-target status
//   POST /api/rankings                    {weights, method, mem_mb} -> rank table
//   GET  /api/benchmarks?target=&mem_mb=  stored records
//
// Errors are JSON {code, message}. One run may be in flight at a time.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "benchlite/container_executor.hpp"
#include "benchlite/core_model.hpp"
#include "benchlite/error.hpp"
#include "benchlite/mock_executor.hpp"
#include "benchlite/orchestrator.hpp"
#include "benchlite/ranking.hpp"
#include "benchlite/repository.hpp"
#include "benchlite/text.hpp"

namespace benchlite {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string repository;
  std::string inventory;
  std::optional<std::string> catalog;
  int max_parallel_targets = 1;
  int timeout_s = 1800;
  std::string executor = "mock";  // mock | container
  std::optional<std::string> profile;
  std::uint64_t seed = 42;
  std::string image = "benchlite/suite:latest";
  std::string suite_command = "benchlite-suite";
  std::optional<std::string> static_dir;
};

// Line-oriented key=value; '#' comments.
inline ApiConfig parse_config(std::string_view content) {
  ApiConfig c;
  std::size_t lineno = 0;
  for (const auto raw : text::lines(content)) {
    ++lineno;
    if (text::is_blank_or_comment(raw)) continue;
    const auto line = text::trim(raw);
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw Error(Errc::ParseError, where + "expected key=value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = std::string(text::trim(line.substr(eq + 1)));
    const auto as_int = [&]() {
      const auto v = text::parse_int<std::int64_t>(value);
      if (!v) throw Error(Errc::ParseError, where + std::string(key) + " must be an integer");
      return *v;
    };
    if (key == "listen" || key == "host") c.host = value;
    else if (key == "port") c.port = static_cast<int>(as_int());
    else if (key == "repository" || key == "store") c.repository = value;
    else if (key == "inventory") c.inventory = value;
    else if (key == "catalog") c.catalog = value;
    else if (key == "max_parallel_targets") c.max_parallel_targets = static_cast<int>(as_int());
    else if (key == "timeout_s") c.timeout_s = static_cast<int>(as_int());
    else if (key == "executor") c.executor = value;
    else if (key == "profile") c.profile = value;
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "image") c.image = value;
    else if (key == "suite_command") c.suite_command = value;
    else if (key == "static_dir") c.static_dir = value;
    else throw Error(Errc::ParseError, where + "unknown key '" + std::string(key) + "'");
  }
  return c;
}

inline void validate(const ApiConfig& c, bool allow_any_port = false) {
  if (c.port < (allow_any_port ? 0 : 1) || c.port > 65535)
    throw Error(Errc::InvalidArgument, "port must be in [1, 65535]");
  if (c.max_parallel_targets < 1) throw Error(Errc::InvalidArgument, "max_parallel_targets must be >= 1");
  if (c.repository.empty()) throw Error(Errc::InvalidArgument, "config needs repository=");
  const auto parent = std::filesystem::path(c.repository).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw Error(Errc::IoError, "repository directory does not exist: " + parent.string());
  const auto must_exist = [](const std::optional<std::string>& p, std::string_view what) {
    if (p && !std::filesystem::exists(*p))
      throw Error(Errc::IoError, std::string(what) + " not found: " + *p);
  };
  if (c.inventory.empty()) throw Error(Errc::InvalidArgument, "config needs inventory=");
  must_exist(c.inventory, "inventory");
  must_exist(c.catalog, "catalog");
  must_exist(c.static_dir, "static_dir");
  if (c.executor == "mock") {
    if (!c.profile) throw Error(Errc::InvalidArgument, "mock executor needs profile=");
    must_exist(c.profile, "profile");
  } else if (c.executor != "container") {
    throw Error(Errc::InvalidArgument, "executor must be mock or container");
  }
}

struct TargetStatusView {
  std::string target;
  TargetState state = TargetState::Pending;
  std::string reason;
  double elapsed_s = 0.0;
};

struct RunStatusView {
  std::string run_id;
  Timestamp started{};
  double elapsed_s = 0.0;
  bool finished = false;
  std::string outcome;  // set when finished: Succeeded | Failed
  std::string error;
  std::vector<TargetStatusView> targets;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(ApiConfig config, std::unique_ptr<Executor> executor = nullptr)
      : config_(std::move(config)),
        catalog_(load_catalog(config_.catalog)),
        inventory_(load_inventory(config_.inventory)),
        repository_(config_.repository, catalog_),
        executor_(executor ? std::move(executor) : make_executor()) {
    routes();
  }

  ~Service() {
    stop();
    if (worker_.joinable()) worker_.join();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind() {
    if (config_.port == 0) return server_.bind_to_any_port(config_.host);
    if (!server_.bind_to_port(config_.host, config_.port))
      throw Error(Errc::IoError, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    return config_.port;
  }

  // Blocks until stop().
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

  // Waits for the in-flight run, if any.
  void wait_for_run() {
    std::unique_lock lock(run_mutex_);
    run_done_.wait(lock, [&] { return !run_active_; });
  }

  const Repository& repository() const noexcept { return repository_; }

  ApiResponse get_targets() const {
    nlohmann::json list = nlohmann::json::array();
    const auto status = repository_.status(inventory_);
    for (std::size_t i = 0; i < inventory_.size(); ++i) {
      const auto& t = inventory_[i];
      list.push_back({{"name", t.name},
                      {"address", t.address},
                      {"vcpus", t.vcpus},
                      {"memory_mib", t.memory_mib},
                      {"status", std::string(to_string(status[i].availability))}});
    }
    return {200, {{"targets", list}}};
  }

  ApiResponse post_runs(const std::string& body) {
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return error(400, "ParseError", "request body is not valid JSON");
    }
    ContainerSpec spec;
    PlanOptions options;
    options.max_parallel_targets = config_.max_parallel_targets;
    options.timeout_s = config_.timeout_s;
    options.suite_command = config_.suite_command;
    try {
      spec.memory_mb = req.at("mem_mb").get<std::int64_t>();
      spec.cpu_cores = req.at("cpu_cores").get<int>();
      if (req.contains("targets")) options.only_targets = req.at("targets").get<std::vector<std::string>>();
      if (req.contains("max_parallel")) options.max_parallel_targets = req.at("max_parallel").get<int>();
    } catch (const nlohmann::json::exception&) {
      return error(400, "InvalidArgument", "expected {mem_mb:int, cpu_cores:int, targets?:[string], max_parallel?:int}");
    }
    RunPlan plan;
    try {
      plan = plan_run(inventory_, spec, options);
    } catch (const Error& e) {
      return error(400, e);
    }

    std::unique_lock lock(run_mutex_);
    if (run_active_) return error(409, "RunInFlight", "a run is already in progress");
    if (worker_.joinable()) worker_.join();
    run_active_ = true;
    auto view = std::make_shared<RunStatusView>();
    view->run_id = plan.run_id;
    view->started = plan.created;
    for (const auto& t : plan.targets) {
      TargetStatusView tv;
      tv.target = t.name;
      view->targets.push_back(std::move(tv));
    }
    runs_[plan.run_id] = view;
    run_started_[plan.run_id] = std::chrono::steady_clock::now();
    worker_ = std::jthread([this, plan] { execute(plan); });
    return {202, {{"run_id", plan.run_id}}};
  }

  ApiResponse get_run(const std::string& run_id) const {
    std::lock_guard lock(status_mutex_);
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) return error(404, "NotFound", "unknown run " + run_id);
    const auto& v = *it->second;
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : v.targets) {
      nlohmann::json jt{{"target", t.target}, {"state", std::string(to_string(t.state))},
                        {"elapsed_s", t.elapsed_s}};
      if (!t.reason.empty()) jt["reason"] = t.reason;
      targets.push_back(std::move(jt));
    }
    double elapsed = v.elapsed_s;
    if (!v.finished)
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_started_.at(run_id)).count();
    nlohmann::json body{{"run_id", v.run_id},
                        {"started", text::format_rfc3339(v.started)},
                        {"elapsed_s", elapsed},
                        {"finished", v.finished},
                        {"targets", targets}};
    if (v.finished) body["outcome"] = v.outcome;
    if (!v.error.empty()) body["error"] = v.error;
    return {200, body};
  }

  ApiResponse post_rankings(const std::string& body) const {
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return error(400, "ParseError", "request body is not valid JSON");
    }
    WeightVector weights;
    RankMethod method = RankMethod::Native;
    std::int64_t mem_mb = 0;
    try {
      weights = weights_from_json(req.at("weights"));
      const auto m = parse_method(req.value("method", std::string("native")));
      if (!m || *m == RankMethod::Empirical)
        return error(400, "InvalidArgument", "method must be native or hybrid");
      method = *m;
      mem_mb = req.at("mem_mb").get<std::int64_t>();
    } catch (const Error& e) {
      return error(400, e);
    } catch (const nlohmann::json::exception&) {
      return error(400, "InvalidArgument", "expected {weights:{g1..g4}, method, mem_mb}");
    }
    if (weights.all_zero()) return error(400, "AllZeroWeights", "at least one group weight must be nonzero");
    try {
      const auto table = rank_targets(weights, repository_, method, mem_mb, catalog_);
      nlohmann::json ranking = nlohmann::json::array();
      for (const auto& e : table.entries)
        ranking.push_back({{"target", e.target}, {"score", std::round(e.score * 1e4) / 1e4}, {"rank", e.rank}});
      return {200, {{"method", std::string(to_string(method))}, {"mem_mb", mem_mb}, {"ranking", ranking}}};
    } catch (const InsufficientDataError& e) {
      auto r = error(422, e);
      r.body["role"] = e.role() == RecordRole::Current ? "Current" : "Historic";
      return r;
    } catch (const Error& e) {
      return error(422, e);
    }
  }

  ApiResponse get_benchmarks(std::optional<std::string> target, std::optional<std::string> mem_mb) const {
    RecordQuery q{std::move(target), std::nullopt, RoleFilter::Both};
    if (mem_mb && !mem_mb->empty()) {
      const auto m = text::parse_int<std::int64_t>(*mem_mb);
      if (!m) return error(400, "InvalidArgument", "mem_mb must be an integer");
      q.container_mem_mb = *m;
    }
    if (q.target && q.target->empty()) q.target.reset();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : repository_.query(q)) {
      list.push_back({{"target", r.target_name}, {"attribute", r.attribute_id}, {"value", r.value},
                      {"unit", r.unit}, {"mem_mb", r.container_mem_mb}, {"cores", r.cpu_cores},
                      {"run_id", r.run_id}, {"ts", text::format_rfc3339(r.timestamp)},
                      {"role", std::string(to_string(r.role))}});
    }
    return {200, {{"records", list}}};
  }

  // Accepts {"g1":..,"g4":..}, group names as keys, or a 4-element array.
  static WeightVector weights_from_json(const nlohmann::json& j) {
    std::map<GroupId, double> raw;
    if (j.is_array()) {
      if (j.size() != kGroupCount) throw Error(Errc::InvalidArgument, "weights array needs 4 values");
      for (std::size_t i = 0; i < kGroupCount; ++i) raw[static_cast<GroupId>(i)] = j.at(i).get<double>();
    } else if (j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        const auto g = parse_group(key);
        if (!g) throw Error(Errc::InvalidArgument, "unknown weight key '" + key + "'");
        if (!value.is_number()) throw Error(Errc::InvalidArgument, "weight " + key + " is not a number");
        raw[*g] = value.get<double>();
      }
    } else {
      throw Error(Errc::InvalidArgument, "weights must be an object or array");
    }
    return validate_weights(raw);
  }

 private:
  static ApiResponse error(int status, std::string_view code, const std::string& message) {
    return {status, {{"code", std::string(code)}, {"message", message}}};
  }
  static ApiResponse error(int status, const Error& e) { return error(status, to_string(e.code()), e.what()); }

  std::unique_ptr<Executor> make_executor() const {
    if (config_.executor == "container")
      return std::make_unique<ContainerRuntimeExecutor>(ContainerRuntimeOptions{"docker", config_.image});
    if (!config_.profile) throw Error(Errc::InvalidArgument, "mock executor needs a profile");
    return mock_executor(*config_.profile, config_.seed, catalog_);
  }

  void on_progress(const std::string& run_id, const std::string& target, TargetState state) {
    std::lock_guard lock(status_mutex_);
    auto& view = *runs_.at(run_id);
    for (auto& t : view.targets) {
      if (t.target != target) continue;
      const auto stage = [](TargetState s) { return s == TargetState::Pending ? 0 : s == TargetState::Running ? 1 : 2; };
      if (stage(state) <= stage(t.state)) return;  // states only advance
      if (state == TargetState::Running) target_started_[run_id + "|" + target] = std::chrono::steady_clock::now();
      if (is_terminal(state)) {
        const auto it = target_started_.find(run_id + "|" + target);
        if (it != target_started_.end())
          t.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - it->second).count();
      }
      t.state = state;
    }
  }

  void execute(RunPlan plan) {
    ExecuteOptions opts;
    opts.on_progress = [this, id = plan.run_id](const std::string& t, TargetState s) { on_progress(id, t, s); };
    std::string outcome = "Succeeded";
    std::string err;
    std::optional<RunResult> result;
    try {
      result = execute_run(plan, *executor_, repository_, opts);
    } catch (const Error& e) {
      outcome = "Failed";
      err = std::string(to_string(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      outcome = "Failed";
      err = e.what();
    }
    {
      std::lock_guard lock(status_mutex_);
      auto& view = *runs_.at(plan.run_id);
      view.finished = true;
      view.outcome = outcome;
      view.error = err;
      view.elapsed_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - run_started_.at(plan.run_id)).count();
      if (result) {
        for (auto& t : view.targets) {
          for (const auto& o : result->targets) {
            if (o.target != t.target) continue;
            t.state = o.status;
            t.reason = o.reason;
            t.elapsed_s = o.duration_s;
          }
        }
      }
    }
    {
      std::lock_guard lock(run_mutex_);
      run_active_ = false;
    }
    run_done_.notify_all();
  }

  void routes() {
    const auto send = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server_.Get("/api/targets", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, get_targets());
    });
    server_.Post("/api/runs", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, post_runs(req.body));
    });
    server_.Get("/api/runs/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, get_run(req.path_params.at("id")));
    });
    server_.Post("/api/rankings", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, post_rankings(req.body));
    });
    server_.Get("/api/benchmarks", [this, send](const httplib::Request& req, httplib::Response& res) {
      const auto param = [&](const char* k) -> std::optional<std::string> {
        if (!req.has_param(k)) return std::nullopt;
        return req.get_param_value(k);
      };
      send(res, get_benchmarks(param("target"), param("mem_mb")));
    });
    server_.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send(res, error(500, "Internal", "internal server error"));
    });
    server_.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, error(res.status, "NotFound", "no such resource"));
    });
    if (config_.static_dir) server_.set_mount_point("/", *config_.static_dir);
  }

  ApiConfig config_;
  AttributeCatalog catalog_;
  std::vector<TargetDescriptor> inventory_;
  Repository repository_;
  std::unique_ptr<Executor> executor_;
  httplib::Server server_;

  std::mutex run_mutex_;
  std::condition_variable run_done_;
  bool run_active_ = false;
  std::jthread worker_;

  mutable std::mutex status_mutex_;
  std::map<std::string, std::shared_ptr<RunStatusView>> runs_;
  std::map<std::string, std::chrono::steady_clock::time_point> run_started_;
  std::map<std::string, std::chrono::steady_clock::time_point> target_started_;
};

}  // namespace benchlite
