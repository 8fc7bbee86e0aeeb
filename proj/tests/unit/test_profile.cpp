#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "spchar/matgen.hpp"
#include "spchar/profile.hpp"

using namespace spchar;

namespace {
std::vector<ProfileRecord> ingest(const std::string& s, const std::string& platform = "a64fx") {
  std::istringstream in(s);
  return ingest_perf_csv(in, platform);
}
}  // namespace

TEST_CASE("ingest a minimal row") {
  auto r = ingest("matrix_id,kernel,wall_time_ns,CPU_CYCLES,BR_RETIRED\nm1,spmv,500,1000,10\n");
  REQUIRE(r.size() == 1);
  CHECK(r[0].platform == "a64fx");
  CHECK(r[0].counters.size() == 2);
  CHECK(r[0].counter("CPU_CYCLES") == 1000u);
  CHECK(r[0].counter("BR_RETIRED") == 10u);
  CHECK(!r[0].counter("L2_CACHE_REFILL"));
  CHECK(r[0].wall_time_ns == 500);
}

TEST_CASE("ingest edge cases") {
  CHECK(ingest("matrix_id,kernel,wall_time_ns,CPU_CYCLES\n").empty());
  auto foo = ingest("matrix_id,kernel,platform,wall_time_ns,FOO,L1D_CACHE\nm,spadd,kunpeng,7,3,<not counted>\n");
  REQUIRE(foo.size() == 1);
  CHECK(foo[0].platform == "kunpeng");
  CHECK(foo[0].counter("FOO") == 3u);
  CHECK(!foo[0].counter("L1D_CACHE"));
  CHECK_THROWS(ingest("matrix_id,kernel,wall_time_ns,CPU_CYCLES\nm,spmv,10,-5\n"));
  CHECK_THROWS(ingest("matrix_id,kernel,wall_time_ns\nm,spmv,0\n"));
  CHECK_THROWS(ingest("matrix_id,kernel,wall_time_ns\nm,spmv,10,11\n"));
  CHECK_THROWS(ingest("matrix_id,wall_time_ns\nm,10\n"));
}

TEST_CASE("ingest then serialize is the identity") {
  const std::string csv =
      "matrix_id,kernel,platform,wall_time_ns,CPU_CYCLES,INST_RETIRED,ZZZ\n"
      "a,spmv,g3,100,1,2,\n"
      "\"b,1\",spgemm,g3,200,3,,9\n";
  auto recs = ingest(csv);
  std::stringstream out;
  write_profile_csv(recs, out);
  CHECK(ingest(out.str()) == recs);
}

TEST_CASE("derive targets") {
  ProfileRecord r;
  r.wall_time_ns = 1'000'000'000;
  OpCounts ops;
  ops.flops = 2'000'000'000;
  ops.bytes_moved = 300'000'000;
  ops.inner_iterations = 1'000'000;
  auto t = derive_targets(r, ops);
  CHECK(t.gflops == doctest::Approx(2.0));
  CHECK(t.bandwidth_gbs == doctest::Approx(0.3));
  r.wall_time_ns = 500'000'000;
  CHECK(derive_targets(r, ops).throughput == doctest::Approx(2e6));
  r.wall_time_ns = 0;
  CHECK_THROWS(derive_targets(r, ops));
}

TEST_CASE("proxy profile invariants") {
  const auto cfg = CacheConfig::graviton3_default();
  auto a = generate(GenSpec{Category::Exponential, 800, 5, {}});
  auto b = generate(GenSpec{Category::Spatial, 800, 6, {}});
  for (auto k : {KernelId::SpMV, KernelId::SpADD, KernelId::SpGEMM}) {
    for (index_t t : {1u, 3u}) {
      ProxyBreakdown bd;
      auto r = proxy_profile(k, KernelInputs{a, &b}, cfg, ProxyOptions{t, 16, "m"}, &bd);
      CHECK(r.platform == proxy_platform(cfg));
      CHECK(r.platform.rfind("proxy:", 0) == 0);
      CHECK(*r.counter("L1D_CACHE") == proxy_trace_length(k, a, &b));
      CHECK(*r.counter("BR_MIS_PRED") <= *r.counter("BR_RETIRED"));
      CHECK(*r.counter("L2_CACHE_REFILL") <= *r.counter("L1D_CACHE_REFILL"));
      CHECK(r.wall_time_ns > 0);
      for (auto id : kCounterSchema) CHECK(r.counter(id).has_value());
      const auto ops = op_counts_from_record(r);
      REQUIRE(ops.has_value());
      const auto want = count_ops(k, a, &b);
      CHECK(ops->flops == want.flops);
      CHECK(ops->inner_iterations == want.inner_iterations);
      CHECK(ops->bytes_moved == want.bytes_moved);
      auto again = proxy_profile(k, KernelInputs{a, &b}, cfg, ProxyOptions{t, 16, "other"});
      again.matrix_id = "m";
      CHECK(again == r);
    }
  }
}

TEST_CASE("documented trace lengths") {
  auto a = generate(GenSpec{Category::Uniform, 300, 1, {}});
  auto b = generate(GenSpec{Category::Normal, 300, 2, {}});
  CHECK(proxy_trace_length(KernelId::SpMV, a) == 3 * 300 + 3 * a.nnz());
  const auto add = count_ops(KernelId::SpADD, a, &b);
  CHECK(proxy_trace_length(KernelId::SpADD, a, &b) == 10 * 300 + 8 * add.sum_count + 5 * add.copy_count);
  const auto mul = count_ops(KernelId::SpGEMM, a, &b);
  CHECK(proxy_trace_length(KernelId::SpGEMM, a, &b) == 6 * 300 + 7 * a.nnz() + 7 * mul.multiply_count + 5 * mul.output_nnz);
}

TEST_CASE("proxy CSV row conforms to the profile schema") {
  auto r = proxy_profile(KernelId::SpMV, KernelInputs{CsrMatrix::identity(50)}, CacheConfig::graviton3_default(),
                         ProxyOptions{1, 16, "eye"});
  std::stringstream ss;
  write_profile_csv({r}, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header.rfind("matrix_id,kernel,platform,wall_time_ns,CPU_CYCLES,INST_RETIRED,STALL_FRONTEND,STALL_BACKEND,", 0) ==
        0);
  ss.seekg(0);
  CHECK(ingest_perf_csv(ss, "x") == std::vector<ProfileRecord>{r});
}
