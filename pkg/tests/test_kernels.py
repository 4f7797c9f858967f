import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalaba import kernels
from causalaba.graph import Dag, d_separated_by_paths, descendants
from causalaba.solver import SolverConfig, causalaba, encode_facts
from conftest import available_backends
from strategies import dags, fact_sets, queries

BACKENDS = available_backends()


@given(dags(max_d=6))
def test_closure_is_reachability(g):
    for name in BACKENDS:
        clos = kernels.get_backend(name).closure(np.ascontiguousarray(g.adj))
        for v in range(g.d):
            assert {w for w in range(g.d) if clos[v, w] and w != v} == set(descendants(g, v))


@given(dags(max_d=6), st.data())
def test_dconnected_backends_agree_with_paths(g, data):
    x, y, z = data.draw(queries(g.d))
    inz = np.zeros(g.d, dtype=np.bool_)
    inz[list(z)] = True
    expect = not d_separated_by_paths(g, x, y, z)
    for name in BACKENDS:
        assert bool(kernels.get_backend(name).dconnected(np.ascontiguousarray(g.adj), x, y, inz)) == expect


@given(st.lists(dags(min_d=4, max_d=4), min_size=1, max_size=5), st.data())
def test_fact_table_parity(models, data):
    facts = data.draw(fact_sets(4, max_facts=6))
    if not facts:
        return
    adjs = np.stack([np.asarray(g.adj, dtype=np.uint8) for g in models])
    fx, fy, fz, _, _ = encode_facts(4, facts)
    tables = [kernels.get_backend(n).fact_table(adjs, fx, fy, fz) for n in BACKENDS]
    for t in tables[1:]:
        assert np.array_equal(t, tables[0])
    for m, g in enumerate(models):
        for k, f in enumerate(facts):
            assert bool(tables[0][m, k]) == d_separated_by_paths(g, f.x, f.y, f.z)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="numba unavailable")
@settings(max_examples=40)
@given(st.integers(3, 5).flatmap(lambda d: st.tuples(st.just(d), fact_sets(d, max_facts=6))),
       st.sampled_from(["hard", "soft", "find_one"]))
def test_search_backends_identical(case, mode):
    d, facts = case
    one = mode == "find_one"
    cfg = SolverConfig(mode="hard" if one else mode)
    a = causalaba(d, facts, cfg, find_one=one, backend="numpy")
    b = causalaba(d, facts, cfg, find_one=one, backend="numba")
    assert a.models == b.models
    assert a.outcome == b.outcome
    assert (a.nodes, a.prunes) == (b.nodes, b.prunes)
    assert a.weights == b.weights


def test_get_backend_errors():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
    assert kernels.get_backend("numpy") is not None
    assert kernels.BACKEND_NAME in ("numba", "numpy")


def test_env_flag_forces_numpy():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CAUSALABA_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from causalaba import kernels; print(kernels.BACKEND_NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
