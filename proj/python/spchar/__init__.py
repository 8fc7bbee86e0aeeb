"""Python bindings for the spchar sparse characterization toolkit."""

from ._core import (
    CsrMatrix,
    __version__,
    analyze,
    generate,
    read_matrix_market,
    run_cli,
    spadd,
    spgemm,
    spmv,
    validate,
    write_matrix_market,
)

__all__ = [
    "CsrMatrix",
    "__version__",
    "analyze",
    "generate",
    "read_matrix_market",
    "run_cli",
    "spadd",
    "spgemm",
    "spmv",
    "validate",
    "write_matrix_market",
]
