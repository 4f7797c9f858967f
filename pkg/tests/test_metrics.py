import itertools
import json

import pytest
from hypothesis import given, strategies as st

from causalaba.errors import QueryError
from causalaba.graph import Dag, Pdag, all_dags, cpdag_of, mec_members
from causalaba.metrics import (METRIC_KEYS, evaluate, metrics_json, precision_recall_f1, shd, sid_cpdag,
                               sid_dag, sid_dag_naive, sid_parents, valid_adjustment,
                               valid_adjustment_naive)
from strategies import dags

TRUE_C = Pdag(4, frozenset({(0, 2), (1, 2)}), frozenset({(2, 3)}))
EST_C = Pdag(4, frozenset({(0, 2), (2, 1)}), frozenset({(0, 3)}))


def test_shd_golden():
    s = shd(TRUE_C, EST_C)
    assert (s.extra, s.missing, s.reversed) == (1, 1, 1)
    assert int(s) == 3
    # directed versus undirected counts as one orientation error
    assert shd(Dag(3, frozenset({(0, 1)})), Pdag(3, frozenset(), frozenset({(0, 1)}))).total == 1
    assert shd(TRUE_C, TRUE_C).total == 0


def test_precision_recall_golden():
    pr = precision_recall_f1(TRUE_C, EST_C)
    assert (pr.tp, pr.fp, pr.fn) == (1, 1, 1)
    assert pr.precision == pytest.approx(0.5)
    assert pr.recall == pytest.approx(0.5)
    assert pr.f1 == pytest.approx(0.5)
    empty = precision_recall_f1(Pdag(3), Pdag(3))
    assert empty.precision == empty.recall == empty.f1 == 0.0
    assert set(empty.undefined) == {"precision", "recall"}


def test_sid_golden_two_nodes():
    g = Dag(2, frozenset({(0, 1)}))
    assert sid_dag(g, g) == 0
    assert sid_dag(g, Dag(2)) == 1
    assert sid_dag(g, Dag(2, frozenset({(1, 0)}))) == 2
    assert sid_dag(Dag(2), g) == 0


def test_sid_chain_vs_fork():
    chain = Dag(3, frozenset({(0, 1), (1, 2)}))
    fork = Dag(3, frozenset({(1, 0), (1, 2)}))
    # the fork claims 0 has no effect (wrong for 1 and 2) and gets 1 -> 0 wrong
    assert sid_dag(chain, fork) == sid_dag_naive(chain, fork)
    assert sid_dag(chain, fork) > 0
    assert sid_dag(fork, chain) == sid_dag_naive(fork, chain)


def test_sid_exhaustive_d3():
    graphs = list(all_dags(3))
    for t, e in itertools.product(graphs, graphs):
        assert sid_dag(t, e) == sid_dag_naive(t, e)


@given(dags(min_d=4, max_d=5), st.data())
def test_valid_adjustment_matches_naive(g, data):
    i, j = data.draw(st.lists(st.integers(0, g.d - 1), min_size=2, max_size=2, unique=True))
    rest = [v for v in range(g.d) if v not in (i, j)]
    z = frozenset(data.draw(st.lists(st.sampled_from(rest), unique=True)))
    assert valid_adjustment(g, i, j, z) == valid_adjustment_naive(g, i, j, z)


@given(dags(min_d=3, max_d=5))
def test_sid_zero_on_self_and_bounds(g):
    assert sid_dag(g, g) == 0
    lo, hi = sid_cpdag(g, cpdag_of(g))
    assert lo == 0
    assert hi == max(sid_dag(g, m) for m in mec_members(cpdag_of(g)))


def test_sid_parents_handles_cycles():
    g = Dag(3, frozenset({(0, 1), (1, 2)}))
    cyclic = [frozenset({2}), frozenset({0}), frozenset({1})]
    assert sid_parents(g, cyclic) == sid_parents(g, cyclic, naive=True)
    with pytest.raises(QueryError):
        sid_parents(g, cyclic[:2])


def test_evaluate_and_json():
    t = Dag(4, frozenset({(0, 2), (1, 2), (2, 3)}))
    rep = evaluate(t, cpdag_of(t))
    assert rep.shd == 0 and rep.sid_low == 0 and rep.precision == 1.0 and rep.true_edges == 3
    row = rep.row(dataset="x", seed=0, method="m", elapsed_s=0.1)
    out = json.loads(metrics_json([row]))
    assert list(out[0]) == list(METRIC_KEYS)
    with pytest.raises(QueryError):
        metrics_json([{"dataset": "x"}])
    with pytest.raises(QueryError):
        shd(Pdag(3), Pdag(4))
