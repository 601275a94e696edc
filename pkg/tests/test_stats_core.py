import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from maxcorr import oracle
from maxcorr.dataio import DataFormatError, read_csv_matrix
from maxcorr.stats_core import (
    ZeroVarianceError,
    as_data_matrix,
    correlation_matrix,
    l_statistic,
    max_product_rows,
    max_product_statistic,
    standardize_columns,
    t_statistic,
    w_statistic,
)

FIXTURES = Path(__file__).parent / "fixtures"


def test_standardize_hand_example():
    z, rep = standardize_columns(np.array([[1.0, 5.0], [2.0, 1.0], [3.0, 0.0]]))
    s = 1 / math.sqrt(2)
    assert z[:, 0] == pytest.approx([-s, 0.0, s], abs=1e-15)
    assert rep.kept == [0, 1] and rep.dropped == []
    np.testing.assert_allclose(z.sum(axis=0), 0, atol=1e-15)
    np.testing.assert_allclose((z * z).sum(axis=0), 1, rtol=1e-15)


def test_standardize_idempotent():
    rng = np.random.default_rng(0)
    z, _ = standardize_columns(rng.standard_normal((50, 6)))
    z2, _ = standardize_columns(z)
    assert np.max(np.abs(z2 - z)) < 1e-14


def test_zero_variance_policies():
    x = np.array([[1.0, 2.0, 3.0], [1.0, 4.0, 3.0], [1.0, 5.0, 3.0]])
    with pytest.raises(ZeroVarianceError) as info:
        standardize_columns(x)
    assert info.value.columns == [0, 2]
    z, rep = standardize_columns(x, "drop")
    assert rep.kept == [1] and rep.dropped == [0, 2]
    assert z.shape == (3, 1)
    with pytest.raises(ValueError):
        standardize_columns(x, "ignore")


def test_non_finite_rejected_with_coordinates():
    x = np.ones((4, 3))
    x[2, 1] = np.nan
    with pytest.raises(ValueError, match="row 2, column 1"):
        as_data_matrix(x)


def test_perfect_correlations():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((25, 4))
    x = np.column_stack([x, x[:, 1], -x[:, 2]])
    c = correlation_matrix(x)
    assert c[1, 4] == pytest.approx(1.0, abs=1e-12)
    assert c[2, 5] == pytest.approx(-1.0, abs=1e-12)
    assert c[4, 1] == c[1, 4] and c[3, 3] == 1.0
    res = l_statistic(x)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    dense = c.to_dense()
    assert np.array_equal(dense, dense.T)


def test_p_equals_two():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((12, 2))
    r = np.corrcoef(x.T)[0, 1]
    assert l_statistic(x).value == pytest.approx(abs(r), abs=1e-14)
    u, v = rng.standard_normal((2, 9, 2))
    expect = max(abs(u[:, 0] @ v[:, 1]), abs(u[:, 1] @ v[:, 0]))
    assert t_statistic(u, v).value == pytest.approx(expect, abs=1e-13)


def test_all_ones():
    x = np.ones((7, 5))
    assert w_statistic(x) == (7.0, 0, 1)
    assert t_statistic(x, x) == (7.0, 0, 1)


def test_ties_go_to_smallest_pair():
    x = np.array([[1.0, 1.0, -1.0, 1.0], [1.0, 1.0, -1.0, 1.0]])
    assert w_statistic(x)[1:] == (0, 1)
    # same tie spread across panels of one column each
    assert w_statistic(x, panel=1)[1:] == (0, 1)
    assert t_statistic(x, x, panel=1)[1:] == (0, 1)


def test_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        t_statistic(np.ones((3, 3)), np.ones((3, 4)))


def test_fixture_20x10_matches_oracle_file():
    x, header = read_csv_matrix(FIXTURES / "matrix_20x10.csv")
    ref = json.loads((FIXTURES / "matrix_20x10_oracle.json").read_text())
    assert header == [f"x{j}" for j in range(10)]
    c = correlation_matrix(x)
    for i, j, rho in ref["rho"]:
        assert abs(c[i, j] - rho) <= 1e-12
    L = l_statistic(x)
    assert abs(L.value - ref["L"]["value"]) <= 1e-12 and (L.i, L.j) == (ref["L"]["i"], ref["L"]["j"])
    W = w_statistic(x)
    assert abs(W.value - ref["W"]["value"]) <= 1e-12 and (W.i, W.j) == (ref["W"]["i"], ref["W"]["j"])


@pytest.mark.parametrize("seed", range(5))
def test_oracle_random_15x8_pair(seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 15, 8))
    val, (i, j) = oracle.naive_t_statistic(u, v)
    res = t_statistic(u, v, panel=3)
    assert abs(res.value - val) <= 1e-12 and (res.i, res.j) == (i, j)


def test_max_product_examples():
    assert max_product_statistic([1, -3, 2], 2) == 6.0
    x = np.random.default_rng(3).standard_normal(13)
    assert max_product_statistic(x, 1) == np.abs(x).max()
    with pytest.raises(ValueError):
        max_product_statistic([1, 2], 3)


@settings(max_examples=100, deadline=None)
@given(x=hnp.arrays(np.float64, st.integers(3, 15), elements=st.floats(-1e3, 1e3)),
       m=st.integers(1, 3))
def test_max_product_matches_enumeration(x, m):
    m = min(m, x.size)
    exact = oracle.naive_max_product(x, m)
    assert max_product_statistic(x, m) == pytest.approx(exact, rel=1e-15, abs=0)
    rows = max_product_rows(np.vstack([x, x[::-1]]), m)
    assert rows[0] == rows[1] == max_product_statistic(x, m)


def test_compensated_row_blocks():
    # 25,000 row blocks: a plain running sum of the block partials drifts by
    # about 20 ulp here, the compensated fold stays within one
    n = 200_000
    rng = np.random.default_rng(4)
    a = np.column_stack([rng.random(n), 3 * rng.random(n)])
    ref = math.fsum(a[:, 0] * a[:, 1])
    got = w_statistic(a, row_block=8).value
    assert abs(got - ref) <= np.finfo(float).eps * ref


def _finite_matrix(min_n=3, max_n=30, max_p=12):
    return st.tuples(st.integers(min_n, max_n), st.integers(2, max_p), st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(shape=_finite_matrix())
def test_l_bounded(shape):
    n, p, seed = shape
    x = np.random.default_rng(seed).standard_t(2, size=(n, p))
    L = l_statistic(x).value
    assert 0.0 <= L <= 1.0 + 1e-12
    c = correlation_matrix(x)
    assert np.all(np.abs(c.values) <= 1 + 1e-12)


def test_csv_reader_errors(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("a,b\n1,2\n3,oops\n")
    with pytest.raises(DataFormatError, match="row 3, column 2"):
        read_csv_matrix(f)
    f.write_text("1,2\n3\n")
    with pytest.raises(DataFormatError, match="row 2 has 1 fields"):
        read_csv_matrix(f)
    f.write_text("1,2\ninf,3\n")
    with pytest.raises(DataFormatError, match="row 2, column 1: non-finite"):
        read_csv_matrix(f)
    f.write_text("a,b\n")
    with pytest.raises(DataFormatError):
        read_csv_matrix(f)
    f.write_text("1,2\n3,4\n")
    x, header = read_csv_matrix(f)
    assert header is None and x.tolist() == [[1, 2], [3, 4]] and x.flags.f_contiguous


def test_oracle_definitions_agree_on_pairs():
    x = np.random.default_rng(9).standard_normal((11, 5))
    r = oracle.naive_correlation(x)
    for i, j in itertools.combinations(range(5), 2):
        assert r[i, j] == pytest.approx(np.corrcoef(x[:, i], x[:, j])[0, 1], abs=1e-14)
