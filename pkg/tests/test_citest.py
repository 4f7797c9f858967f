import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from causalaba.citest import Dataset, FisherZ, OracleTester, TableTester, canonical, fisher_z
from causalaba.errors import DegenerateDataError, QueryError, SampleSizeError
from causalaba.graph import d_separated
from strategies import dags, queries


def _reference_p(values, x, y, z):
    """Partial correlation by regression residuals, then the Fisher-Z p-value."""
    n = values.shape[0]
    if z:
        design = np.column_stack([np.ones(n), values[:, sorted(z)]])
        rx = values[:, x] - design @ np.linalg.lstsq(design, values[:, x], rcond=None)[0]
        ry = values[:, y] - design @ np.linalg.lstsq(design, values[:, y], rcond=None)[0]
    else:
        rx, ry = values[:, x], values[:, y]
    r = np.corrcoef(rx, ry)[0, 1]
    stat = np.sqrt(n - len(z) - 3) * np.arctanh(r)
    return 2 * stats.norm.sf(abs(stat))


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.integers(4, 6), st.data())
def test_fisher_z_matches_regression_reference(seed, d, data):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((200, d)) @ rng.standard_normal((d, d))
    x, y, z = data.draw(queries(d))
    res = FisherZ(Dataset(values))(x, y, z)
    assert res.p == pytest.approx(_reference_p(values, x, y, z), rel=1e-6, abs=1e-12)
    assert 0.0 <= res.p <= 1.0


def test_fisher_z_detects_dependence():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(2000)
    b = a + 0.5 * rng.standard_normal(2000)
    c = b + 0.5 * rng.standard_normal(2000)
    data = Dataset(np.column_stack([a, b, c]))
    assert fisher_z(data, 0, 2).p < 1e-10
    assert fisher_z(data, 0, 2, {1}).p > 0.01


def test_fisher_z_canonical_order():
    rng = np.random.default_rng(1)
    t = FisherZ(Dataset(rng.standard_normal((100, 3))))
    assert t(2, 0, {1}) == t(0, 2, {1})
    assert (t(2, 0).x, t(2, 0).y) == (0, 2)


def test_fisher_z_errors():
    rng = np.random.default_rng(2)
    values = rng.standard_normal((50, 3))
    values[:, 1] = 3.0
    t = FisherZ(Dataset(values))
    with pytest.raises(DegenerateDataError):
        t(0, 1)
    dup = rng.standard_normal((50, 4))
    dup[:, 3] = dup[:, 2]
    with pytest.raises(DegenerateDataError):
        FisherZ(Dataset(dup))(0, 1, {2, 3})
    with pytest.raises(SampleSizeError):
        FisherZ(Dataset(rng.standard_normal((4, 4))))(0, 1, {2, 3})
    with pytest.raises(QueryError):
        t(0, 0)
    with pytest.raises(QueryError):
        Dataset(np.array([[1.0, np.nan]]))


@given(dags(max_d=5), st.data())
def test_oracle_tester_is_dseparation(g, data):
    x, y, z = data.draw(queries(g.d))
    assert OracleTester(g)(x, y, z).p == (1.0 if d_separated(g, x, y, z) else 0.0)


def test_table_tester():
    t = TableTester(3, {(1, 0, ()): 0.4}, default=None)
    assert t(0, 1).p == 0.4
    with pytest.raises(QueryError):
        t(0, 2)
    assert TableTester(3, {}, default=0.01)(0, 2, {1}).p == 0.01


def test_canonical():
    assert canonical(3, 1, [0], 4) == (1, 3, frozenset({0}))
    with pytest.raises(QueryError):
        canonical(1, 3, [3], 4)
