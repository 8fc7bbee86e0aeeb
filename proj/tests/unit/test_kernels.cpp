#include "doctest.h"
#include "oracles.hpp"
#include "spchar/kernels.hpp"
#include "spchar/matgen.hpp"

using namespace spchar;

namespace {
const ExecConfig kSeq{1, 16};
value_t at(const CsrMatrix& m, index_t i, index_t j) {
  for (index_t k = m.row_ptrs[i]; k < m.row_ptrs[i + 1]; ++k) {
    if (m.col_idxs[k] == j) return m.nnz_vals[k];
  }
  return 0.0f;
}
}  // namespace

TEST_CASE("spmv small cases") {
  std::vector<value_t> x{3, 4};
  CHECK(spmv(CsrMatrix::identity(2), x) == std::vector<value_t>{3, 4});
  CsrMatrix d{2, 2, {0, 1, 2}, {0, 1}, {1, 2}};
  CHECK(spmv(d, x) == std::vector<value_t>{3, 8});
  CHECK_THROWS_AS(spmv(d, std::vector<value_t>{1}), KernelError);
}

TEST_CASE("spmv against dense oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = oracle::random_csr(rng, 64, 64, 0.1);
    std::vector<value_t> x(64);
    for (auto& v : x) v = static_cast<value_t>(std::uniform_real_distribution<double>(-1, 1)(rng));
    const auto y = spmv(a, x, ExecConfig{4, 16});
    const auto want = oracle::dense_spmv(a, x);
    for (index_t i = 0; i < 64; ++i) CHECK(std::abs(y[i] - want[i]) <= 1e-6 * std::max(1.0, std::abs(want[i])) * 8);
  }
}

TEST_CASE("spmv is linear in x") {
  std::mt19937_64 rng(2);
  auto a = oracle::random_csr(rng, 16, 16, 0.3);
  std::vector<value_t> x(16, 0.5f);
  const auto y0 = spmv(a, x);
  const float eps = 1e-3f;
  for (index_t j = 0; j < 16; ++j) {
    auto xp = x;
    xp[j] += eps;
    const auto y1 = spmv(a, xp);
    for (index_t i = 0; i < 16; ++i) CHECK(std::abs((y1[i] - y0[i]) / eps - at(a, i, j)) < 1e-2);
  }
}

TEST_CASE("spadd semantics") {
  CsrMatrix a{1, 6, {0, 2}, {0, 2}, {1, 2}};
  CsrMatrix b{1, 6, {0, 2}, {2, 5}, {3, 4}};
  CHECK(spadd_symbolic(a, b) == std::vector<index_t>{0, 3});
  auto c = spadd(a, b);
  CHECK(c.col_idxs == std::vector<index_t>{0, 2, 5});
  CHECK(c.nnz_vals == std::vector<value_t>{1, 5, 4});
  CHECK(spadd_symbolic(a, CsrMatrix::zeros(1, 6)) == a.row_ptrs);

  std::mt19937_64 rng(3);
  auto m = oracle::random_csr(rng, 20, 20, 0.3);
  auto z = spadd(m, oracle::negate(m));
  CHECK(z.row_ptrs == m.row_ptrs);
  CHECK(z.col_idxs == m.col_idxs);
  CHECK(std::all_of(z.nnz_vals.begin(), z.nnz_vals.end(), [](value_t v) { return v == 0.0f; }));

  CHECK_THROWS_AS(spadd(a, CsrMatrix::zeros(2, 6)), KernelError);
  CHECK_THROWS_AS(spadd_numeric(a, b, {0, 2}), KernelError);
}

TEST_CASE("spgemm semantics") {
  std::mt19937_64 rng(4);
  auto b = oracle::random_csr(rng, 12, 9, 0.3);
  const auto eye = CsrMatrix::identity(12);
  const auto sym = spgemm_symbolic(eye, b);
  CHECK(sym == b.row_ptrs);
  CHECK(spgemm(eye, b) == b);
  CHECK(spgemm(b, CsrMatrix::identity(9)) == b);

  CsrMatrix a{1, 2, {0, 2}, {0, 1}, {1, 1}};
  CsrMatrix bb{2, 6, {0, 1, 2}, {5, 5}, {2, 3}};
  CHECK(spgemm_symbolic(a, bb) == std::vector<index_t>{0, 1});
  CHECK(spgemm(a, bb).nnz_vals == std::vector<value_t>{5});

  CHECK_THROWS_AS(spgemm(a, CsrMatrix::identity(3)), KernelError);
  CHECK_THROWS_AS(spgemm_numeric(a, bb, {0, 2}), KernelError);
}

TEST_CASE("binary kernels against dense oracles at 32x32") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const bool integral = trial % 3 == 0;
    auto a = oracle::random_csr(rng, 32, 32, 0.15, integral);
    auto b = oracle::random_csr(rng, 32, 32, 0.15, integral);
    std::string why;
    CHECK_MESSAGE(oracle::matches(spadd(a, b, ExecConfig{3, 4}), oracle::dense_add(a, b), 1e-6, &why), why);
    CHECK_MESSAGE(oracle::matches(spgemm(a, b, ExecConfig{3, 4}), oracle::dense_mul(a, b), 1e-5, &why), why);
    CHECK(spadd(a, b) == spadd(b, a));
  }
}

TEST_CASE("phase structure equals numeric structure") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = oracle::random_csr(rng, 40, 30, 0.1 * (1 + trial % 5));
    auto b = oracle::random_csr(rng, 40, 30, 0.1);
    auto bt = oracle::random_csr(rng, 30, 25, 0.1);
    CHECK(spadd_symbolic(a, b) == spadd(a, b).row_ptrs);
    CHECK(spgemm_symbolic(a, bt) == spgemm(a, bt).row_ptrs);
  }
}

TEST_CASE("spgemm associativity on small instances") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = oracle::random_csr(rng, 10, 12, 0.3);
    auto b = oracle::random_csr(rng, 12, 8, 0.3);
    auto c = oracle::random_csr(rng, 8, 11, 0.3);
    const auto left = to_dense(spgemm(spgemm(a, b), c));
    const auto right = to_dense(spgemm(a, spgemm(b, c)));
    for (std::size_t e = 0; e < left.size(); ++e) {
      CHECK(std::abs(left[e] - right[e]) <= 1e-4 * std::max({1.0, std::abs(left[e]), std::abs(right[e])}));
    }
  }
}

TEST_CASE("parallel results are bit-identical to sequential") {
  for (auto cat : {Category::Exponential, Category::Spatial, Category::Row}) {
    auto a = generate(GenSpec{cat, 500, 3, {}});
    auto b = generate(GenSpec{Category::Uniform, 500, 4, {}});
    std::vector<value_t> x(500);
    for (index_t i = 0; i < 500; ++i) x[i] = static_cast<value_t>(i % 7) * 0.25f - 0.5f;
    const auto y = spmv(a, x, kSeq);
    const auto s = spadd(a, b, kSeq);
    const auto g = spgemm(a, b, kSeq);
    for (index_t t : {2u, 3u, 8u, 33u}) {
      for (index_t grain : {1u, 16u, 1000u}) {
        const ExecConfig ex{t, grain};
        CHECK(spmv(a, x, ex) == y);
        CHECK(spadd(a, b, ex) == s);
        CHECK(spgemm(a, b, ex) == g);
      }
    }
  }
}

TEST_CASE("empty and degenerate shapes") {
  auto z = CsrMatrix::zeros(0, 0);
  CHECK(spmv(z, std::vector<value_t>{}).empty());
  CHECK(spadd(z, z) == z);
  auto e = CsrMatrix::zeros(3, 4);
  CHECK(spgemm(e, CsrMatrix::zeros(4, 2)) == CsrMatrix::zeros(3, 2));
  CHECK(spgemm(CsrMatrix::identity(4), CsrMatrix::zeros(4, 4), ExecConfig{8, 1}) == CsrMatrix::zeros(4, 4));
}
