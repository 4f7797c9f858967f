import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalaba.errors import QueryError, UnsupportedDimensionError
from causalaba.facts import FactSet, arrow_fact, make_fact, noedge_fact
from causalaba.graph import Dag
from causalaba.kernels import ABS, ALL, BWD, FWD
from causalaba.solver import (CAPPED_OUT, SAT, TIMED_OUT, UNSAT, SolverConfig, brute_force, causalaba,
                              check_model, dag_states, decode, initial_domains, propagate,
                              satisfaction_table)
from oracles import best_weight_models, dag_space, filter_models, satisfies
from strategies import dags, fact_sets

small_cases = st.integers(3, 4).flatmap(lambda d: st.tuples(st.just(d), fact_sets(d, max_facts=6)))


def test_zero_facts_counts():
    assert len(causalaba(3, []).models) == 25
    assert len(causalaba(4, []).models) == 543
    assert causalaba(4, []).models == dag_space(4)


@given(small_cases)
def test_hard_mode_equals_filter(case):
    d, facts = case
    res = causalaba(d, facts)
    expected = filter_models(d, facts)
    assert res.models == expected
    assert res.outcome == (SAT if expected else UNSAT)
    assert brute_force(d, facts) == expected


@given(small_cases)
def test_soft_mode_maximises_weight(case):
    d, facts = case
    res = causalaba(d, facts, SolverConfig(mode="soft"))
    expected, top = best_weight_models(d, facts)
    assert res.models == expected
    assert all(w == pytest.approx(top) for w in res.weights)


@given(small_cases)
def test_find_one_agrees_on_satisfiability(case):
    d, facts = case
    one = causalaba(d, facts, find_one=True)
    full = filter_models(d, facts)
    assert one.satisfiable == bool(full)
    if full:
        assert len(one.models) == 1 and one.models[0] in full


@settings(max_examples=20)
@given(small_cases)
def test_workers_do_not_change_result(case):
    d, facts = case
    assert causalaba(d, facts, SolverConfig(workers=3)).models == causalaba(d, facts).models


def test_arrow_and_noedge_facts():
    facts = [arrow_fact(2, 0), noedge_fact(0, 1), noedge_fact(1, 2)]
    res = causalaba(3, facts)
    assert res.models == [Dag(3, frozenset({(2, 0)}))]
    assert res.models == filter_models(3, facts)


def test_mixed_hardness():
    # an independence and its contradicting dependence: only one can be hard
    f1 = make_fact(0, 1, (), 0.4, 0.05, 4)
    f2 = make_fact(0, 1, (2,), 0.01, 0.05, 4)
    f3 = make_fact(0, 1, (), 0.04, 0.05, 4)
    res = causalaba(4, [f1, f2], SolverConfig(mode="soft"), hard=[True, False])
    assert res.models == filter_models(4, [f1, f2])
    # a hard fact is never traded away, however strong the soft one
    assert f3.strength < f1.strength
    res = causalaba(4, [f1, f3], SolverConfig(mode="soft"), hard=[False, True])
    assert res.models == filter_models(4, [f3])


def test_unsat():
    # 0 _||_ 1 and 0 not_||_ 1 | 2 force the collider 0 -> 2 <- 1, so 0 and 2 stay dependent given 1
    facts = [make_fact(0, 1, (), 0.4, 0.05, 3), make_fact(0, 1, (2,), 0.01, 0.05, 3),
             make_fact(0, 2, (1,), 0.4, 0.05, 3)]
    res = causalaba(3, facts)
    assert res.outcome == UNSAT and res.models == []
    assert filter_models(3, facts) == []


def test_cap_and_timeout():
    res = causalaba(4, [], SolverConfig(cap=10))
    assert res.outcome == CAPPED_OUT and len(res.models) == 10
    assert res.stats()["cap"] == 10
    res = causalaba(6, [], SolverConfig(budget_s=1e-4))
    assert res.outcome == TIMED_OUT


def test_config_validation():
    with pytest.raises(QueryError):
        SolverConfig(mode="fuzzy")
    with pytest.raises(QueryError):
        SolverConfig(budget_s=0)
    with pytest.raises(UnsupportedDimensionError):
        causalaba(2, [])
    with pytest.raises(QueryError):
        causalaba(3, FactSet([], 0.05, 4))
    with pytest.raises(QueryError):
        causalaba(3, [], SolverConfig(mode="soft"), find_one=True)


@given(dags(max_d=5))
def test_states_roundtrip(g):
    assert decode(g.d, dag_states(g)[None, :]) == [g]


@given(small_cases)
def test_propagate_is_sound(case):
    d, facts = case
    dom = propagate(d, initial_domains(d, facts, [True] * len(facts)), facts)
    models = filter_models(d, facts)
    if dom is None:
        assert models == []
        return
    for g in models:
        st_ = dag_states(g)
        assert np.all(st_ & dom)


@given(small_cases, st.data())
def test_satisfaction_table_matches_oracle(case, data):
    d, facts = case
    g = data.draw(dags(min_d=d, max_d=d))
    ok, sat = check_model(g, facts)
    assert list(sat) == [satisfies(g, f) for f in facts]
    assert ok == all(sat)
    assert satisfaction_table([], facts).shape == (0, len(facts))


def test_stats_and_write(tmp_path):
    res = causalaba(3, [make_fact(0, 1, (), 0.4, 0.05, 3)])
    st_ = res.stats()
    assert st_["outcome"] == SAT and st_["models"] == len(res) == 6
    assert st_["nodes"] >= 1
    res.write(tmp_path)
    assert len(list(tmp_path.glob("model_*.edges"))) == 6
    assert json.loads((tmp_path / "stats.json").read_text())["models"] == 6


def test_domain_bits():
    assert ALL == FWD | BWD | ABS


@given(small_cases, st.data())
def test_find_one_with_arrow_facts(case, data):
    # arrow facts are not equivalence-class invariant, so the covered-edge shortcut must stay off
    d, facts = case
    a, b = data.draw(st.lists(st.integers(0, d - 1), min_size=2, max_size=2, unique=True))
    facts = facts + [arrow_fact(max(a, b), min(a, b))]
    one = causalaba(d, facts, find_one=True)
    assert one.satisfiable == bool(filter_models(d, facts))
