import pytest
from hypothesis import given, settings, strategies as st

from causalaba.aba import (AbaFramework, attacks, build_causal_abaf, build_dag_abaf, derives, dump,
                           independences, is_closed, parse, project, semantics_enumerate, simple_cycles,
                           stable_extensions, theory, to_setaf)
from causalaba.errors import CapacityError, FormatError, QueryError
from causalaba.graph import all_dags, d_separated
from causalaba.solver import causalaba
from oracles import filter_models
from strategies import fact_sets

MUTUAL = """
contrary(a)=p
contrary(b)=q
p <- b
q <- a
"""

ODD = """
contrary(a)=na
contrary(b)=nb
contrary(c)=nc
nb <- a
nc <- b
na <- c
"""


def _sets(*xs):
    return [frozenset(x) for x in xs]


def test_parse_dump_roundtrip():
    f = parse(MUTUAL)
    assert f.assumptions == ("a", "b")
    assert parse(dump(f)) == f
    with pytest.raises(FormatError):
        parse("contrary(a)=p\nnonsense here\n")
    with pytest.raises(FormatError):
        parse("contrary(a)=p\ncontrary(a)=q\n")


def test_framework_validation():
    with pytest.raises(QueryError):
        AbaFramework(("a", "b"), {"a": "x"}, ())
    with pytest.raises(QueryError):
        AbaFramework(("a", "b"), {"a": "x", "b": "x"}, ())


def test_derivation_and_attacks():
    f = parse(MUTUAL)
    assert derives(f, {"a"}, "q")
    assert not derives(f, {"a"}, "p")
    assert theory(f, ()) == frozenset()
    assert attacks(f, {"a"}, {"b"})
    assert not attacks(f, {"a"}, {"a"})


@pytest.mark.parametrize("sem,expected", [
    ("conflict-free", [(), ("a",), ("b",)]),
    ("admissible", [(), ("a",), ("b",)]),
    ("complete", [(), ("a",), ("b",)]),
    ("grounded", [()]),
    ("preferred", [("a",), ("b",)]),
    ("stable", [("a",), ("b",)]),
])
def test_mutual_attack_semantics(sem, expected):
    assert semantics_enumerate(parse(MUTUAL), sem) == _sets(*expected)


def test_odd_cycle_has_no_stable_extension():
    f = parse(ODD)
    assert semantics_enumerate(f, "stable") == []
    assert stable_extensions(f) == []
    assert semantics_enumerate(f, "preferred") == _sets(())
    assert semantics_enumerate(f, "grounded") == _sets(())


def test_non_flat_closure():
    f = parse("contrary(a)=na\ncontrary(b)=nb\nb <- a\n")
    assert not f.is_flat
    assert not is_closed(f, {"a"})
    assert is_closed(f, {"a", "b"})
    # {a} is not closed, so only {a, b} is stable
    assert semantics_enumerate(f, "stable") == _sets(("a", "b"))
    assert stable_extensions(f) == _sets(("a", "b"))


def test_semantics_errors():
    f = parse(MUTUAL)
    with pytest.raises(QueryError):
        semantics_enumerate(f, "ideal")
    with pytest.raises(QueryError):
        semantics_enumerate(f, "preferred", method="search")
    with pytest.raises(CapacityError):
        semantics_enumerate(f, "stable", bound=1)


def test_setaf_mutual():
    s = to_setaf(parse(MUTUAL))
    assert s.attacks == frozenset({(frozenset({"b"}), "a"), (frozenset({"a"}), "b")})


def test_simple_cycles_count():
    # directed simple cycles of length >= 3 on K4: 8 triangles + 6 four-cycles
    assert len(simple_cycles(3)) == 2
    assert len(simple_cycles(4)) == 14


def test_dag_framework_d3_bijects_to_dags():
    f = build_dag_abaf(3)
    graphs = [project(e, 3) for e in stable_extensions(f)]
    assert len(graphs) == 25
    assert sorted(graphs) == sorted(all_dags(3))


def test_stable_search_matches_naive_on_dag_framework():
    f = build_dag_abaf(3)
    assert stable_extensions(f) == semantics_enumerate(f, "stable")


def test_independence_assumptions_follow_dseparation():
    f = build_causal_abaf(3)
    for ext in stable_extensions(f):
        g = project(ext, 3)
        accepted = independences(ext)
        for x, y, z in [(0, 1, ()), (0, 1, (2,)), (0, 2, ()), (0, 2, (1,)), (1, 2, ()), (1, 2, (0,))]:
            assert ((x, y, frozenset(z)) in accepted) == d_separated(g, x, y, z)


@settings(max_examples=15)
@given(fact_sets(3, max_facts=4))
def test_causal_framework_matches_solver(facts):
    f = build_causal_abaf(3, facts)
    graphs = sorted({project(e, 3) for e in stable_extensions(f)}, key=lambda g: g.sorted_edges())
    assert graphs == causalaba(3, facts).models == filter_models(3, facts)
