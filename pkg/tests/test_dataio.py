import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalaba.citest import Dataset
from causalaba.dataio import (FIXTURES, SemSpec, ancestral_sample, load_fixture, parse_bif, random_dag,
                              read_csv, sem_sample, serialize_bif, write_csv)
from causalaba.errors import BifError, FormatError, QueryError

TINY = """
network tiny {
  property author = test;
}
variable a {
  type discrete [ 2 ] { yes, no };
}
variable b {
  type discrete [ 3 ] { lo, mid, hi };
}
probability ( a ) {
  table 0.3, 0.7;
}
probability ( b | a ) {
  (yes) 0.1, 0.2, 0.7;
  (no) 0.5, 0.25, 0.25;
}
"""

EXPECTED_EDGES = {"cancer": 4, "earthquake": 4, "survey": 6, "asia": 8}


def test_parse_tiny():
    net = parse_bif(TINY)
    assert net.names == ["a", "b"]
    assert net.variables[1].states == ("lo", "mid", "hi")
    parents, table = net.cpts["b"]
    assert parents == ("a",) or list(parents) == ["a"]
    assert table.shape == (2, 3)
    assert np.allclose(table[1], [0.5, 0.25, 0.25])
    assert net.structure.edges == frozenset({(0, 1)})


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_roundtrip(name):
    net = load_fixture(name)
    assert len(net.structure.edges) == EXPECTED_EDGES[name]
    assert parse_bif(serialize_bif(net)) == net


def test_unknown_fixture():
    with pytest.raises(QueryError):
        load_fixture("alarm")


@pytest.mark.parametrize("text,line", [
    ("variable a {\n  type discrete [ 2 ] { x, y };\n}\nprobability ( a ) {\n  table 0.5, 0.6;\n}\n", None),
    ("variable a {\n  type discrete [ 3 ] { x, y };\n}\n", None),
    ("variable a {\n  type discrete [ 2 ] { x, y }\n}\n", 3),
    ("variable a {\n  type discrete [ 2 ] { x, y };\n}\nprobability ( a | b ) {\n  table 0.5, 0.5;\n}\n", None),
])
def test_bif_errors(text, line):
    with pytest.raises(BifError) as exc:
        parse_bif(text)
    if line is not None:
        assert exc.value.line == line


def test_bif_rejects_cycle():
    text = """
variable a { type discrete [ 2 ] { x, y }; }
variable b { type discrete [ 2 ] { x, y }; }
probability ( a | b ) { (x) 0.5, 0.5; (y) 0.5, 0.5; }
probability ( b | a ) { (x) 0.5, 0.5; (y) 0.5, 0.5; }
"""
    with pytest.raises(BifError):
        parse_bif(text)


def test_ancestral_sample_marginals():
    net = parse_bif(TINY)
    data = ancestral_sample(net, 40_000, seed=3)
    a = data.values[:, 0]
    b = data.values[:, 1]
    assert abs(np.mean(a == 0) - 0.3) < 0.01
    assert abs(np.mean(b[a == 0] == 2) - 0.7) < 0.015
    assert abs(np.mean(b[a == 1] == 0) - 0.5) < 0.015
    again = ancestral_sample(net, 100, seed=3)
    assert np.array_equal(again.values, ancestral_sample(net, 100, seed=3).values)


@given(st.integers(1, 9), st.integers(0, 1000), st.data())
def test_random_dag_edge_count(d, seed, data):
    m = data.draw(st.integers(0, d * (d - 1) // 2))
    g = random_dag(d, m, seed)
    assert g.d == d and len(g.edges) == m
    assert random_dag(d, m, seed) == g


def test_random_dag_errors():
    with pytest.raises(QueryError):
        random_dag(3, 4, 0)


def test_sem_regression_recovers_weights():
    g = random_dag(4, 4, seed=5)
    spec = SemSpec.random(g, seed=5)
    assert all(0.5 <= abs(w) <= 1.5 for w in spec.weights.values())
    x = sem_sample(spec, 50_000).values
    for v in range(4):
        pa = sorted(g.parents(v))
        if not pa:
            continue
        coef = np.linalg.lstsq(x[:, pa], x[:, v], rcond=None)[0]
        assert np.allclose(coef, [spec.weights[(p, v)] for p in pa], atol=0.03)


def test_sem_validation():
    g = random_dag(3, 2, 0)
    with pytest.raises(QueryError):
        SemSpec(g, {})
    with pytest.raises(QueryError):
        SemSpec(g, {e: 0.0 for e in g.edges})


@settings(max_examples=20)
@given(st.integers(0, 1000))
def test_csv_roundtrip(seed):
    rng = np.random.default_rng(seed)
    data = Dataset(rng.standard_normal((5, 3)), ("a", "b", "c"))
    back = read_csv(write_csv(data))
    assert back.names == data.names
    assert np.array_equal(back.values, data.values)


def test_csv_file_and_errors(tmp_path):
    data = Dataset(np.array([[0.0, 1.0], [1.0, 0.0]]), ("u", "v"))
    path = tmp_path / "d.csv"
    write_csv(data, path)
    assert path.read_text().splitlines()[1] == "0,1"
    assert np.array_equal(read_csv(path).values, data.values)
    with pytest.raises(FormatError) as exc:
        read_csv("a,b\n1,2\n3\n")
    assert exc.value.line == 3
    with pytest.raises(FormatError):
        read_csv("a,b\n1,x\n")
    with pytest.raises(FormatError):
        read_csv("a,b\n")
