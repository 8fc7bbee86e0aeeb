#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "spchar/csr.hpp"
#include "spchar/kernels.hpp"
#include "spchar/matgen.hpp"
#include "spchar/metrics.hpp"
#include "spchar/mtx_io.hpp"

namespace py = pybind11;
using namespace spchar;

namespace {

py::dict record_to_dict(const MetricRecord& r) {
  py::dict d;
  d["matrix_id"] = r.matrix_id;
  d["rows"] = r.rows;
  d["cols"] = r.cols;
  d["nnz"] = r.nnz;
  d["density"] = r.density;
  d["branch_entropy"] = r.branch_entropy;
  d["reuse_affinity"] = r.reuse_affinity;
  d["index_affinity"] = r.index_affinity;
  d["thread_imbalance"] = r.thread_imbalance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = SPCHAR_VERSION;

  py::class_<CsrMatrix>(m, "CsrMatrix")
      .def(py::init<>())
      .def(py::init([](index_t rows, index_t cols, std::vector<index_t> row_ptrs, std::vector<index_t> col_idxs,
                       std::vector<value_t> vals) {
             CsrMatrix c{rows, cols, std::move(row_ptrs), std::move(col_idxs), std::move(vals)};
             require_valid(c);
             return c;
           }),
           py::arg("rows"), py::arg("cols"), py::arg("row_ptrs"), py::arg("col_idxs"), py::arg("nnz_vals"))
      .def_readonly("rows", &CsrMatrix::rows)
      .def_readonly("cols", &CsrMatrix::cols)
      .def_readonly("row_ptrs", &CsrMatrix::row_ptrs)
      .def_readonly("col_idxs", &CsrMatrix::col_idxs)
      .def_readonly("nnz_vals", &CsrMatrix::nnz_vals)
      .def_property_readonly("nnz", &CsrMatrix::nnz)
      .def("to_dense", &to_dense)
      .def("digest", &matrix_digest)
      .def("__eq__", [](const CsrMatrix& a, const CsrMatrix& b) { return a == b; })
      .def("__repr__", [](const CsrMatrix& c) {
        return "CsrMatrix(" + std::to_string(c.rows) + "x" + std::to_string(c.cols) + ", nnz=" +
               std::to_string(c.nnz()) + ")";
      });

  m.def("validate", [](const CsrMatrix& c) {
    const auto v = validate_csr(c);
    return v.ok() ? std::string("ok") : v.summary();
  });

  m.def(
      "generate",
      [](const std::string& category, index_t n, std::uint64_t seed) {
        const auto c = parse_category(category);
        if (!c) throw py::value_error("unknown category '" + category + "'");
        return generate(GenSpec{*c, n, seed, {}});
      },
      py::arg("category"), py::arg("n"), py::arg("seed") = 0);

  m.def("read_matrix_market", &read_matrix_market_file, py::arg("path"));
  m.def(
      "write_matrix_market", [](const CsrMatrix& c, const std::filesystem::path& p) { write_matrix_market_file(c, p); },
      py::arg("matrix"), py::arg("path"));

  m.def(
      "analyze",
      [](const CsrMatrix& c, const std::vector<index_t>& threads) { return record_to_dict(analyze(c, threads)); },
      py::arg("matrix"), py::arg("threads") = kDefaultThreadCounts);

  m.def(
      "spmv", [](const CsrMatrix& a, const std::vector<value_t>& x, index_t threads) {
        return spmv(a, x, ExecConfig{threads, 16});
      },
      py::arg("a"), py::arg("x"), py::arg("threads") = 1);
  m.def(
      "spadd", [](const CsrMatrix& a, const CsrMatrix& b, index_t threads) { return spadd(a, b, ExecConfig{threads, 16}); },
      py::arg("a"), py::arg("b"), py::arg("threads") = 1);
  m.def(
      "spgemm",
      [](const CsrMatrix& a, const CsrMatrix& b, index_t threads) { return spgemm(a, b, ExecConfig{threads, 16}); },
      py::arg("a"), py::arg("b"), py::arg("threads") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
