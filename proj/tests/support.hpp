#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "benchlite/core_model.hpp"
#include "benchlite/ingestion.hpp"

namespace testing_support {

inline std::string data_path(const std::string& rel) { return std::string(BENCHLITE_DATA_DIR) + "/" + rel; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("benchlite-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline benchlite::Timestamp at(int y, unsigned m, unsigned d, int hh = 0) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}} + hours{hh};
}

// A full record set for one run: every catalog attribute for each target.
inline std::vector<benchlite::BenchmarkRecord> full_run(const benchlite::AttributeCatalog& catalog,
                                                        const std::vector<std::string>& targets,
                                                        const std::string& run_id, std::int64_t mem,
                                                        std::mt19937_64& rng,
                                                        benchlite::Timestamp ts = at(2024, 1, 1)) {
  std::uniform_real_distribution<double> value(1.0, 1000.0);
  std::vector<benchlite::BenchmarkRecord> out;
  for (const auto& t : targets)
    for (const auto& a : catalog.attributes())
      out.push_back({t, a.id, value(rng), a.unit, mem, 1, run_id, ts, benchlite::RecordRole::Current});
  return out;
}

// Arbitrary (possibly sparse, possibly multi-size) records sharing one run id.
inline std::vector<benchlite::BenchmarkRecord> random_records(const benchlite::AttributeCatalog& catalog,
                                                              std::mt19937_64& rng) {
  using benchlite::RecordRole;
  const auto& attrs = catalog.attributes();
  std::uniform_int_distribution<int> count(1, 60);
  std::uniform_int_distribution<std::size_t> pick_attr(0, attrs.size() - 1);
  std::uniform_int_distribution<int> pick_target(0, 11);
  std::uniform_int_distribution<int> pick_mem(0, 3);
  std::uniform_int_distribution<int> cores(1, 32);
  std::uniform_int_distribution<int> day(1, 28);
  std::uniform_int_distribution<int> exponent(-6, 9);
  std::uniform_real_distribution<double> mantissa(1.0, 10.0);
  std::bernoulli_distribution coin(0.3);
  const std::int64_t mems[] = {100, 500, 1000, 15360};
  const std::string run_id = "run-" + std::to_string(rng() % 1000000);

  std::vector<benchlite::BenchmarkRecord> out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const auto& a = attrs[pick_attr(rng)];
    const double v = coin(rng) ? 0.0 : mantissa(rng) * std::pow(10.0, exponent(rng));
    out.push_back({"vm-" + std::to_string(pick_target(rng)) + ".large", a.id, v, a.unit,
                   mems[pick_mem(rng)], cores(rng), run_id,
                   at(2023, 1 + static_cast<unsigned>(rng() % 12), static_cast<unsigned>(day(rng)),
                      static_cast<int>(rng() % 24)),
                   coin(rng) ? RecordRole::Historic : RecordRole::Current});
  }
  return out;
}

inline std::vector<std::string> ten_targets() {
  return {"m1.xlarge",  "m2.xlarge",   "m2.2xlarge",  "m2.4xlarge",  "m3.xlarge",
          "m3.2xlarge", "cr1.8xlarge", "cc2.8xlarge", "hi1.4xlarge", "hs1.8xlarge"};
}

}  // namespace testing_support
