#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "spchar/metrics.hpp"
#include "spchar/mtx_io.hpp"
#include "spchar/profile.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = spchar::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("SPCHAR_TEST_TMP");
  fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "spchar_cli_test";
  fs::path p = base / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count_ext(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

}  // namespace

TEST_CASE("generate") {
  const auto dir = scratch("gen_row");
  auto r = run({"generate", "--category", "row", "--n", "16", "--seed", "1", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(count_ext(dir, ".mtx") == 1);
  auto m = spchar::read_matrix_market_file(dir / "row_n16_s1_r0.mtx");
  CHECK(m.nnz() == 16);
  CHECK(m.row_length(0) == 16);
  const json meta = json::parse(slurp(dir / "row_n16_s1_r0.json"));
  CHECK(meta["category"] == "row");
  CHECK(meta["manifest"].is_string());
  CHECK(json::parse(slurp(dir / "manifest.json"))["spchar_schema"] == "spchar.manifest.v1");

  const auto all = scratch("gen_all");
  REQUIRE(run({"generate", "--category", "all", "--n", "64", "--seed", "2", "--replicates", "2", "--out", all.string(),
               "--jobs", "3"})
              .code == 0);
  CHECK(count_ext(all, ".mtx") == 18);

  const auto again = scratch("gen_all_again");
  auto a = run({"generate", "--category", "all", "--n", "64", "--seed", "2", "--replicates", "2", "--out", again.string()});
  auto b = run({"generate", "--category", "all", "--n", "64", "--seed", "2", "--replicates", "2", "--out", again.string()});
  CHECK(a.out == b.out);
  // Only the manifest depends on the command line.
  json ja = json::parse(slurp(again / "uniform_n64_s2_r1.json")), jb = json::parse(slurp(all / "uniform_n64_s2_r1.json"));
  ja.erase("manifest");
  jb.erase("manifest");
  CHECK(ja == jb);

  CHECK(run({"generate", "--category", "diagonal", "--out", dir.string()}).code == 2);
}

TEST_CASE("analyze") {
  const auto dir = scratch("analyze");
  REQUIRE(run({"generate", "--n", "100", "--seed", "5", "--out", (dir / "m").string()}).code == 0);
  spchar::write_matrix_market_file(spchar::CsrMatrix::identity(5), dir / "eye.mtx");

  auto r = run({"analyze", (dir / "m").string(), "--out", (dir / "metrics.csv").string()});
  REQUIRE(r.code == 0);
  std::ifstream f(dir / "metrics.csv");
  auto recs = spchar::read_metrics_csv(f);
  CHECK(recs.size() == 9);
  for (const auto& rec : recs) CHECK(rec.category.has_value());
  CHECK(slurp(dir / "metrics.csv").rfind("# spchar_schema=spchar.metrics.v1 manifest=", 0) == 0);

  auto one = run({"analyze", (dir / "eye.mtx").string(), "--threads", "1", "--out", (dir / "eye.json").string()});
  REQUIRE(one.code == 0);
  const json j = json::parse(slurp(dir / "eye.json"));
  CHECK(j["records"][0]["branch_entropy"] == 0.0);
  CHECK(j["records"][0]["thread_imbalance_T1"] == 0.0);

  auto t1 = run({"analyze", (dir / "m").string(), "--threads", "1"});
  REQUIRE(t1.code == 0);
  std::istringstream in(t1.out);
  for (const auto& rec : spchar::read_metrics_csv(in)) CHECK(rec.thread_imbalance.at(1) == 0.0);

  // Batch continues past a bad file; exit code and error list report it.
  std::ofstream(dir / "bad.mtx") << "%%MatrixMarket matrix coordinate real general\n2 2 1\n9 9 1\n";
  auto mixed = run({"analyze", (dir / "eye.mtx").string(), (dir / "bad.mtx").string(), "--jobs", "2"});
  CHECK(mixed.code == 1);
  const json errs = json::parse(mixed.err);
  CHECK(errs["errors"].size() == 1);
  CHECK(errs["errors"][0]["error"].get<std::string>().find(":3:") != std::string::npos);
  CHECK(mixed.out.find("eye") != std::string::npos);
}

TEST_CASE("bench") {
  const auto dir = scratch("bench");
  spchar::write_matrix_market_file(spchar::CsrMatrix::identity(8), dir / "eye.mtx");
  auto r = run({"bench", "--kernel", "spmv", "--reps", "3", "--warmup", "0", "--out", (dir / "r.json").string(),
                (dir / "eye.mtx").string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(dir / "r.json"));
  CHECK(j["timings_ns"].size() == 3);
  CHECK(j["manifest"]["digest"].is_string());

  CHECK(run({"bench", "--kernel", "spadd", (dir / "eye.mtx").string()}).code == 2);
  spchar::write_matrix_market_file(spchar::CsrMatrix::identity(9), dir / "eye9.mtx");
  CHECK(run({"bench", "--kernel", "spadd", (dir / "eye.mtx").string(), (dir / "eye9.mtx").string()}).code == 1);

  auto p = run({"bench", "--kernel", "spgemm", "--warmup", "0", "--reps", "1", "--proxy-profile", "default",
                "--profile-out", (dir / "p.csv").string(), (dir / "eye.mtx").string(), (dir / "eye.mtx").string()});
  REQUIRE(p.code == 0);
  run({"bench", "--kernel", "spgemm", "--warmup", "0", "--reps", "1", "--proxy-profile", "default", "--profile-out",
       (dir / "p.csv").string(), (dir / "eye.mtx").string(), (dir / "eye.mtx").string()});
  std::ifstream f(dir / "p.csv");
  auto rows = spchar::ingest_perf_csv(f, "");
  CHECK(rows.size() == 2);
  for (auto id : spchar::kCounterSchema) CHECK(rows[0].counter(id).has_value());

  std::ofstream(dir / "cache.json") << spchar::cache_config_to_json(spchar::CacheConfig::graviton3_default()).dump();
  auto s = run({"bench", "--kernel", "spmv", "--warmup", "0", "--reps", "1", "--proxy-profile",
                (dir / "cache.json").string(), (dir / "eye.mtx").string()});
  CHECK(s.code == 0);
  CHECK(s.out.find("matrix_id,kernel,platform,wall_time_ns,CPU_CYCLES") != std::string::npos);
}

TEST_CASE("train and report") {
  const auto dir = scratch("train");
  REQUIRE(run({"generate", "--n", "300", "--seed", "1", "--replicates", "5", "--stride-max-row-nnz", "8", "--out",
               (dir / "m").string(), "--jobs", "4"})
              .code == 0);
  REQUIRE(run({"analyze", (dir / "m").string(), "--out", (dir / "metrics.csv").string()}).code == 0);
  std::vector<fs::path> mats;
  for (const auto& e : fs::directory_iterator(dir / "m")) {
    if (e.path().extension() == ".mtx") mats.push_back(e.path());
  }
  std::sort(mats.begin(), mats.end());
  REQUIRE(mats.size() == 45);
  for (const auto& m : mats) {
    REQUIRE(run({"bench", "--kernel", "spmv", "--warmup", "0", "--reps", "1", "--proxy-profile", "default",
                 "--profile-out", (dir / "p.csv").string(), m.string()})
                .code == 0);
  }
  // 40 of 45 rows in the profile table.
  std::ifstream pf(dir / "p.csv");
  auto profs = spchar::ingest_perf_csv(pf, "");
  const std::string platform = profs.front().platform;
  profs.resize(40);
  {
    std::ofstream of(dir / "p40.csv");
    spchar::write_profile_csv(profs, of);
  }

  auto t = run({"train", "--metrics", (dir / "metrics.csv").string(), "--profiles", (dir / "p40.csv").string(),
                "--target", "gflops", "--platform", platform, "--kernel", "spmv", "--kfold", "10", "--out",
                (dir / "model.json").string(), "--report-out", (dir / "val.json").string()});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  const json model = json::parse(slurp(dir / "model.json"));
  CHECK(model["dataset_digest"].is_string());
  CHECK(model["metadata"]["leakage_removed"] == json::array({"wall_time", "VFP_SPEC", "ASE_SPEC"}));
  for (const auto& f : model["feature_names"]) {
    CHECK(f != "ASE_SPEC");
    CHECK(f != "VFP_SPEC");
    CHECK(f != "wall_time");
  }
  const json val = json::parse(slurp(dir / "val.json"));
  CHECK(val["kfold"]["folds"].size() == 10);
  for (const auto& fold : val["kfold"]["folds"]) CHECK(fold["size"] == 4);

  CHECK(run({"train", "--metrics", (dir / "metrics.csv").string(), "--profiles", (dir / "p40.csv").string(), "--target",
             "ipc", "--platform", platform, "--kernel", "spmv"})
            .code == 2);
  auto empty = run({"train", "--metrics", (dir / "metrics.csv").string(), "--profiles", (dir / "p40.csv").string(),
                    "--platform", "nowhere", "--kernel", "spmv"});
  CHECK(empty.code == 1);
  CHECK(empty.err.find("empty join") != std::string::npos);

  auto single = run({"report", (dir / "model.json").string(), "--out", (dir / "r1.json").string()});
  REQUIRE(single.code == 0);
  const json r1 = json::parse(slurp(dir / "r1.json"));
  CHECK(r1["models"].size() == 1);
  CHECK(!r1["models"][0]["ranked"].empty());

  auto pair = run({"report", (dir / "model.json").string(), (dir / "model.json").string(), "--min-importance", "0",
                   "--out", (dir / "r2.json").string()});
  REQUIRE(pair.code == 0);
  const json r2 = json::parse(slurp(dir / "r2.json"));
  CHECK(r2["distinct"].empty());
  CHECK(r2["common"].size() == r2["models"][0]["ranked"].size());

  auto strict = run({"report", (dir / "model.json").string(), "--min-importance", "1.0", "--out",
                     (dir / "r3.json").string()});
  const json r3 = json::parse(slurp(dir / "r3.json"));
  CHECK(r3["common"].empty());
  CHECK(!r3["notes"].empty());

  std::ofstream(dir / "junk.json") << "{not json";
  CHECK(run({"report", (dir / "junk.json").string()}).code == 1);
}
