#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "comb/harness.hpp"

using namespace comb;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config hash is stable and sensitive") {
  ExperimentConfig a{"green", 1, 0, 0, "out", json::object()};
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("experiments are byte-reproducible from (config, seed)") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  ExperimentConfig cfg;
  cfg.kind = "tentacle";
  cfg.seed = 7;
  cfg.replicas = 200;
  cfg.params = json{{"n", 5}, {"Rs", {10.0, 12.0}}};
  cfg.out_dir = "harness_det_a";
  ExperimentResult r1 = run_experiment(cfg);
  cfg.out_dir = "harness_det_b";
  ExperimentResult r2 = run_experiment(cfg);
  REQUIRE(r1.files.size() == r2.files.size());
  for (std::size_t i = 0; i < r1.files.size(); ++i)
    CHECK(slurp(r1.files[i]) == slurp(r2.files[i]));
  std::filesystem::remove_all("harness_det_a");
  std::filesystem::remove_all("harness_det_b");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("csv writer emits the schema header") {
  std::filesystem::create_directories("harness_csv_test");
  {
    CsvWriter w("harness_csv_test/x.csv", "deadbeef", {"a", "b"});
    w.row({"1", "2"});
  }
  std::string content = slurp("harness_csv_test/x.csv");
  CHECK(content == "# comb-idla/v1 config=deadbeef\na,b\n1,2\n");
  std::filesystem::remove_all("harness_csv_test");
}

TEST_CASE("cluster snapshot is stable given the seed") {
  Rng rng(5, 0);
  GrowResult g = grow(25, SettlementPolicy::standard(), rng);
  std::ostringstream s1, s2;
  write_cluster_jsonl(s1, g.cluster, 3.0, 5, "standard");
  write_cluster_jsonl(s2, g.cluster, 3.0, 5, "standard");
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().find("\"policy\":\"standard\"") != std::string::npos);
}

TEST_CASE("calibration measures positive constants") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  Calibration cal = calibrate();
  CHECK(cal.kappa_a > 0.0);
  CHECK(cal.kappa_iii > 0.0);
  CHECK(cal.c_g2 > 0.0);
  CHECK(cal.c_g2_upper > cal.c_g2);
  CHECK(cal.c_g2_upper / cal.c_g2 < 20.0);
  CHECK(cal.kappa_uniform_lo > 0.0);
  CHECK(cal.kappa_uniform_hi <= 27.0 / 4.0);
  CHECK(cal.k_obstacle > 0.0);
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 2, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
}
