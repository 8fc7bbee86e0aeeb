#include "doctest.h"
#include "spchar/dataset.hpp"

using namespace spchar;

namespace {
MetricRecord metric(const std::string& id, double entropy) {
  MetricRecord m;
  m.matrix_id = id;
  m.rows = m.cols = 10;
  m.nnz = 20;
  m.density = 0.2;
  m.branch_entropy = entropy;
  m.reuse_affinity = 0.5;
  m.index_affinity = 0.4;
  m.thread_imbalance = {{2, 0.1}};
  return m;
}
ProfileRecord profile(const std::string& id, std::uint64_t wall) {
  ProfileRecord p;
  p.matrix_id = id;
  p.kernel = "spmv";
  p.platform = "p";
  p.wall_time_ns = wall;
  p.counters = {{"CPU_CYCLES", 100}, {"ASE_SPEC", 1},  {"VFP_SPEC", 2},         {"OP_FLOPS", 40},
                {"OP_BYTES", 400},   {"OP_INNER_ITERS", 20}, {"L1D_CACHE_REFILL", 3}};
  return p;
}
}  // namespace

TEST_CASE("join and leakage") {
  std::vector<MetricRecord> ms{metric("a", 0.1), metric("b", 0.2), metric("c", 0.3)};
  std::vector<ProfileRecord> ps{profile("a", 10), profile("b", 20), profile("zz", 5)};
  auto d = build_dataset(ms, ps, Target::Gflops, "p", "spmv");
  CHECK(d.rows.size() == 2);
  CHECK(d.target_name == "gflops");
  CHECK(d.rows[0].target == doctest::Approx(40.0 / 10.0));
  for (const auto& f : {"branch_entropy", "wall_time", "ASE_SPEC", "VFP_SPEC", "CPU_CYCLES", "L1D_CACHE_REFILL"}) {
    CHECK_NOTHROW(static_cast<void>(d.feature_index(f)));
  }
  CHECK_THROWS(static_cast<void>(d.feature_index("OP_FLOPS")));

  auto [clean, removed] = exclude_leakage(d);
  CHECK(removed == std::vector<std::string>{"wall_time", "VFP_SPEC", "ASE_SPEC"});
  CHECK_THROWS(static_cast<void>(clean.feature_index("ASE_SPEC")));
  CHECK_NOTHROW(static_cast<void>(clean.feature_index("branch_entropy")));
  CHECK_NOTHROW(static_cast<void>(clean.feature_index("thread_imbalance_T2")));
  CHECK(exclude_leakage(clean).dataset == clean);

  auto bw = build_dataset(ms, ps, Target::Bandwidth, "p", "spmv");
  CHECK(bw.rows[1].target == doctest::Approx(400.0 / 20.0));
  auto [bclean, bremoved] = exclude_leakage(bw);
  CHECK(bremoved == std::vector<std::string>{"wall_time"});
  CHECK_NOTHROW(static_cast<void>(bclean.feature_index("ASE_SPEC")));
}

TEST_CASE("join errors") {
  std::vector<MetricRecord> ms{metric("a", 0.1)};
  CHECK_THROWS_WITH_AS(build_dataset(ms, {profile("b", 1)}, Target::Gflops, "p", "spmv"), doctest::Contains("empty join"),
                       DatasetError);
  CHECK_THROWS_AS(build_dataset({metric("a", 0), metric("a", 1)}, {profile("a", 1)}, Target::Gflops, "p", "spmv"),
                  DatasetError);
  CHECK_THROWS_AS(build_dataset(ms, {profile("a", 1), profile("a", 2)}, Target::Gflops, "p", "spmv"), DatasetError);
  CHECK_THROWS_AS(build_dataset(ms, {profile("a", 1)}, Target::Gflops, "other", "spmv"), DatasetError);
  CHECK(parse_target("throughput") == Target::Throughput);
  CHECK(!parse_target("ipc"));
}

TEST_CASE("digest tracks content") {
  std::vector<MetricRecord> ms{metric("a", 0.1), metric("b", 0.2)};
  std::vector<ProfileRecord> ps{profile("a", 10), profile("b", 20)};
  auto d1 = build_dataset(ms, ps, Target::Gflops, "p", "spmv");
  auto d2 = d1;
  CHECK(d1.digest() == d2.digest());
  d2.rows[0].target += 1e-9;
  CHECK(d1.digest() != d2.digest());
}
