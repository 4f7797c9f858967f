import math

import pytest

from causalaba.bench import (bar_chart_svg, completions, make_case, paired_comparison, run_grid, run_method,
                             summarise)
from causalaba.graph import Dag, Pdag, cpdag_of, mec_members


def test_make_case():
    case = make_case("sem6", 3, n=200)
    assert case.truth.d == 6 and len(case.truth.edges) == 6
    assert case.data.n == 200
    assert make_case("earthquake", 0, n=50).truth.d == 5
    with pytest.raises(ValueError):
        make_case("alarm", 0)


def test_completions():
    chain = cpdag_of(Dag(3, frozenset({(0, 1), (1, 2)})))
    assert len(completions(chain)) == len(mec_members(chain)) == 3
    # a directed cycle has no acyclic orientation: its parent sets are used as given
    cyc = Pdag(3, frozenset({(0, 1), (1, 2), (2, 0)}))
    assert completions(cyc) == [[frozenset({2}), frozenset({0}), frozenset({1})]]
    # a PDAG whose only extension would add a v-structure falls back to acyclic orientations
    odd = Pdag(3, frozenset({(0, 1)}), frozenset({(1, 2)}))
    assert len(completions(odd)) >= 1


def test_run_method_oracle_is_perfect():
    case = make_case("cancer", 0, n=100)
    row = run_method(case, "oracle")
    assert row["error"] is None
    assert row["shd"] == 0 and row["nsid_low"] == 0


def test_grid_and_summary():
    rows = run_grid(["sem5"], range(3), ("abapc", "mpc", "random"), n=1000)
    assert len(rows) == 9
    assert all(r["error"] is None for r in rows)
    summ = summarise(rows)
    assert set(summ) == {("sem5", "abapc"), ("sem5", "mpc"), ("sem5", "random")}
    assert all(n == 3 for _, _, n in summ.values())
    ma, mb, p, n = paired_comparison(rows, "sem5")
    assert n == 3 and 0 <= p <= 1
    assert ma == pytest.approx(summ[("sem5", "abapc")][0])


def test_paired_comparison_edge_cases():
    rows = [{"dataset": "x", "seed": s, "method": m, "nsid_high": 0.5} for s in range(3) for m in ("abapc", "mpc")]
    assert paired_comparison(rows, "x")[2] == 1.0
    rows[0]["nsid_high"] = float("nan")
    assert paired_comparison(rows, "x")[3] == 2
    assert math.isnan(paired_comparison(rows, "y")[0])


def test_bar_chart(tmp_path):
    path = tmp_path / "c.svg"
    bar_chart_svg({("a", "abapc"): (0.5, 0.1, 3), ("a", "mpc"): (0.7, 0.2, 3)}, path)
    assert "<svg" in path.read_text()
