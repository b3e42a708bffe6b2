// benchlite command-line interface.
//
//   benchlite [--store FILE] [--catalog FILE] run --mem MB --cores N --inventory FILE
//             [--executor mock|container] [--profile FILE] [--seed N] ...
//   benchlite rank --weights 4,3,5,0 --method native --mem 100 [--out FILE]
//   benchlite compare --benchmark RANKFILE --empirical TIMINGFILE
//   benchlite compare --fixtures FILE
//   benchlite import --role historic FILE
//   benchlite serve --config FILE
//
// Failures print a single `error|<code>|<message>` line on stderr and exit
// nonzero (2 for usage and file errors, 1 otherwise).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "benchlite/benchlite.hpp"
#include "benchlite/container_executor.hpp"
#include "benchlite/service.hpp"

namespace {

using namespace benchlite;

struct Globals {
  std::string store = "benchlite.store";
  std::optional<std::string> catalog;
};

struct RunArgs {
  std::int64_t mem = 0;
  int cores = 0;
  std::string inventory;
  std::string executor = "mock";
  std::optional<std::string> profile;
  std::uint64_t seed = 42;
  int max_parallel = 1;
  int timeout_s = 1800;
  std::vector<std::string> targets;
  std::string image = "benchlite/suite:latest";
  std::string suite_command = "benchlite-suite";
  std::optional<std::uint32_t> nonce;
  std::optional<std::string> at;
};

struct RankArgs {
  std::string weights;
  std::string method = "native";
  std::int64_t mem = 0;
  std::optional<std::string> out;
};

struct CompareArgs {
  std::optional<std::string> benchmark;
  std::optional<std::string> empirical;
  std::optional<std::string> fixtures;
};

void require_file(const std::string& path, std::string_view what) {
  if (!std::filesystem::exists(path)) throw Error(Errc::IoError, std::string(what) + " not found: " + path);
}

int cmd_run(const Globals& g, const RunArgs& a) {
  require_file(a.inventory, "inventory file");
  const auto catalog = load_catalog(g.catalog);
  const auto inventory = load_inventory(a.inventory);

  PlanOptions opts;
  opts.nonce = a.nonce;
  if (a.at) {
    const auto ts = text::parse_rfc3339(*a.at);
    if (!ts) throw Error(Errc::InvalidArgument, "--at expects YYYY-MM-DDTHH:MM:SSZ");
    opts.now = *ts;
  }
  opts.only_targets = a.targets;
  opts.max_parallel_targets = a.max_parallel;
  opts.timeout_s = a.timeout_s;
  opts.suite_command = a.suite_command;
  const auto plan = plan_run(inventory, ContainerSpec{a.mem, a.cores}, opts);

  std::unique_ptr<Executor> executor;
  if (a.executor == "mock") {
    if (!a.profile) throw Error(Errc::InvalidArgument, "--executor mock needs --profile");
    require_file(*a.profile, "profile file");
    executor = mock_executor(*a.profile, a.seed, catalog);
  } else if (a.executor == "container") {
    executor = std::make_unique<ContainerRuntimeExecutor>(ContainerRuntimeOptions{"docker", a.image});
  } else {
    throw Error(Errc::InvalidArgument, "--executor must be mock or container");
  }

  Repository repo(g.store, catalog);
  const auto result = execute_run(plan, *executor, repo);
  std::size_t failed = 0, timed_out = 0;
  for (const auto& t : result.targets) {
    failed += t.status == TargetState::Failed;
    timed_out += t.status == TargetState::TimedOut;
    std::printf("target|%s|%s|%.6f|%zu|%s\n", t.target.c_str(), std::string(to_string(t.status)).c_str(),
                t.duration_s, t.record_count, t.reason.c_str());
  }
  std::printf("run|%s|succeeded=%zu|failed=%zu|timed_out=%zu\n", result.run_id.c_str(), result.succeeded(),
              failed, timed_out);
  return 0;
}

int cmd_rank(const Globals& g, const RankArgs& a) {
  const auto weights = parse_weights(a.weights);
  const auto method = parse_method(a.method);
  if (!method || *method == RankMethod::Empirical)
    throw Error(Errc::InvalidArgument, "--method must be native or hybrid");
  if (!std::filesystem::exists(g.store)) throw Error(Errc::IoError, "store not found: " + g.store);
  const auto catalog = load_catalog(g.catalog);
  Repository repo(g.store, catalog);
  const auto table = rank_targets(weights, repo, *method, a.mem, catalog);

  std::size_t width = 6;
  for (const auto& e : table.entries) width = std::max(width, e.target.size());
  std::printf("%-4s  %-*s  %10s\n", "rank", static_cast<int>(width), "target", "score");
  for (const auto& e : table.entries)
    std::printf("%-4d  %-*s  %10.4f\n", e.rank, static_cast<int>(width), e.target.c_str(), e.score);
  for (const auto& e : table.entries)
    std::printf("rank|%d|%s|%s\n", e.rank, e.target.c_str(), text::format_fixed(e.score, 4).c_str());
  if (a.out) {
    std::ofstream out(*a.out);
    out << format_rank_file(table);
    if (!out) throw Error(Errc::IoError, "cannot write " + *a.out);
  }
  return 0;
}

int cmd_compare(const CompareArgs& a) {
  if (a.fixtures) {
    const auto set = parse_fixtures(text::read_file(*a.fixtures));
    std::printf("# case|mode|method|size|d_s|corr_pct\n");
    for (const auto& [k, p] : set) {
      std::printf("cell|%d|%s|%s|%d|%lld|%s\n", k.case_study, k.mode.c_str(), k.method.c_str(), k.size_mb,
                  static_cast<long long>(rank_distance_sum(p.benchmark, p.empirical)),
                  format_percent(rank_correlation(p.benchmark, p.empirical)).c_str());
    }
    return 0;
  }
  if (!a.benchmark || !a.empirical)
    throw Error(Errc::InvalidArgument, "compare needs --benchmark and --empirical, or --fixtures");
  const auto benchmark = parse_rank_file(text::read_file(*a.benchmark));
  const auto empirical = empirical_ranks(parse_timings(text::read_file(*a.empirical), *a.empirical));
  std::fputs(format_report(compare_ranks(benchmark, empirical)).c_str(), stdout);
  return 0;
}

int cmd_import(const Globals& g, const std::string& role, const std::string& file) {
  const auto r = parse_role(role);
  if (!r) throw Error(Errc::InvalidArgument, "--role must be historic or current");
  const auto content = text::read_file(file);
  Repository repo(g.store, load_catalog(g.catalog));
  const auto meta = repo.import_canonical(content, *r);
  std::printf("import|%s|%s|%s\n", meta.run_id.c_str(), std::string(to_string(meta.role)).c_str(), file.c_str());
  return 0;
}

int cmd_serve(const std::string& config_path) {
  auto config = parse_config(text::read_file(config_path));
  validate(config);
  Service service(config);
  const int port = service.bind();
  std::printf("listening|%s|%d\n", config.host.c_str(), port);
  std::fflush(stdout);
  return service.listen_after_bind() ? 0 : 1;
}

int fail(std::string_view code, const std::string& message, int exit_code) {
  std::string one_line = message;
  for (auto& c : one_line)
    if (c == '\n') c = ' ';
  std::fprintf(stderr, "error|%s|%s\n", std::string(code).c_str(), one_line.c_str());
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchlite: container-slice cloud benchmarking and VM ranking"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "Benchmark store file")->capture_default_str();
  app.add_option("--catalog", g.catalog, "Attribute catalog override file");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Benchmark every inventory target in a container slice");
  run_cmd->add_option("--mem", run.mem, "Container memory (MB)")->required();
  run_cmd->add_option("--cores", run.cores, "Container CPU cores")->required();
  run_cmd->add_option("--inventory", run.inventory, "Inventory file")->required();
  run_cmd->add_option("--executor", run.executor, "mock or container")->capture_default_str();
  run_cmd->add_option("--profile", run.profile, "Mock profile file");
  run_cmd->add_option("--seed", run.seed, "Mock executor seed")->capture_default_str();
  run_cmd->add_option("--max-parallel", run.max_parallel, "Targets benchmarked concurrently")->capture_default_str();
  run_cmd->add_option("--timeout", run.timeout_s, "Per-target timeout (s)")->capture_default_str();
  run_cmd->add_option("--targets", run.targets, "Restrict to these targets")->delimiter(',');
  run_cmd->add_option("--image", run.image, "Suite container image")->capture_default_str();
  run_cmd->add_option("--suite-command", run.suite_command, "Command run inside the container")->capture_default_str();
  run_cmd->add_option("--nonce", run.nonce, "Fix the run-id nonce");
  run_cmd->add_option("--at", run.at, "Fix the run timestamp (RFC3339 UTC)");

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank targets from stored benchmarks");
  rank_cmd->add_option("--weights", rank.weights, "Group weights, e.g. 4,3,5,0")->required();
  rank_cmd->add_option("--method", rank.method, "native or hybrid")->capture_default_str();
  rank_cmd->add_option("--mem", rank.mem, "Container size (MB)")->required();
  rank_cmd->add_option("--out", rank.out, "Also write a rank file");

  CompareArgs compare;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare benchmark ranks with empirical timings");
  cmp_cmd->add_option("--benchmark", compare.benchmark, "Rank file (target|rank)");
  cmp_cmd->add_option("--empirical", compare.empirical, "Timing file (target|seconds)");
  cmp_cmd->add_option("--fixtures", compare.fixtures, "Rank-table fixture file; prints every cell");

  std::string role = "historic";
  std::string import_file;
  auto* imp_cmd = app.add_subcommand("import", "Import a canonical benchmark file");
  imp_cmd->add_option("--role", role, "historic or current")->capture_default_str();
  imp_cmd->add_option("file", import_file, "Canonical benchmark file")->required();

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
  serve_cmd->add_option("--config", config_path, "Service config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  }

  try {
    if (*run_cmd) return cmd_run(g, run);
    if (*rank_cmd) return cmd_rank(g, rank);
    if (*cmp_cmd) return cmd_compare(compare);
    if (*imp_cmd) return cmd_import(g, role, import_file);
    if (*serve_cmd) return cmd_serve(config_path);
  } catch (const Error& e) {
    const bool usage = e.code() == Errc::IoError || e.code() == Errc::InvalidArgument;
    return fail(to_string(e.code()), e.what(), usage ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("Internal", e.what(), 1);
  }
  return 2;
}
