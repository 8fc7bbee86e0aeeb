import os
import tempfile

import numpy as np
import spchar


def test_generate_and_analyze():
    m = spchar.generate("column", 64, seed=1)
    assert m.nnz == 64
    rec = spchar.analyze(m, [1, 4])
    assert rec["reuse_affinity"] == 1.0
    assert rec["thread_imbalance"][1] == 0.0


def dense(m):
    return np.array(m.to_dense()).reshape(m.rows, m.cols)


def test_kernels_match_numpy():
    a = spchar.generate("uniform", 40, seed=3)
    b = spchar.generate("normal", 40, seed=4)
    da, db = dense(a), dense(b)
    x = np.linspace(-1.0, 1.0, 40).astype(np.float32)
    np.testing.assert_allclose(spchar.spmv(a, x.tolist()), da @ x, rtol=1e-5, atol=1e-5)
    np.testing.assert_allclose(dense(spchar.spadd(a, b, threads=2)), da + db, rtol=1e-6)
    np.testing.assert_allclose(dense(spchar.spgemm(a, b, threads=4)), da @ db, rtol=1e-5, atol=1e-6)


def test_matrix_market_round_trip():
    m = spchar.generate("spatial", 30, seed=9)
    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "m.mtx")
        spchar.write_matrix_market(m, p)
        assert spchar.read_matrix_market(p) == m


def test_validate_and_reject_noncanonical():
    assert spchar.validate(spchar.CsrMatrix()) == "ok"
    try:
        spchar.CsrMatrix(1, 4, [0, 2], [3, 3], [1.0, 1.0])
    except ValueError as e:
        assert "strictly increasing" in str(e)
    else:
        raise AssertionError("expected ValueError")


def test_cli_usage_error():
    code, _, err = spchar.run_cli(["bench", "--kernel", "spadd", "missing.mtx"])
    assert code == 2
    assert "operand" in err
