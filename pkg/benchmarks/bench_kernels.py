"""Compare the numba and numpy kernel backends on identical workloads.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each workload is run once on each backend to warm up (numba compiles on
first call) and then timed ``--repeat`` times; the best time is reported.
The two backends must return identical results, which is asserted.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from causalaba import kernels
from causalaba.citest import OracleTester
from causalaba.dataio import random_dag
from causalaba.facts import mpc_source_facts
from causalaba.graph import all_dags
from causalaba.solver import SolverConfig, causalaba, encode_facts


def _solve(d, facts, mode="hard", find_one=False):
    def run(backend):
        ms = causalaba(d, facts, SolverConfig(mode=mode), find_one=find_one, backend=backend)
        return [g.sorted_edges() for g in ms.models], ms.nodes
    return run


def _fact_table(d, n_models, seed):
    rng = np.random.default_rng(seed)
    graphs = list(all_dags(d)) if d <= 4 else [random_dag(d, int(rng.integers(0, d * (d - 1) // 2)), s)
                                             for s in range(n_models)]
    adjs = np.stack([np.asarray(g.adj, dtype=np.uint8) for g in graphs[:n_models]])
    facts = mpc_source_facts(OracleTester(random_dag(d, d, seed)), 0.05).facts
    fx, fy, fz, _, _ = encode_facts(d, facts)

    def run(backend):
        return kernels.get_backend(backend).fact_table(adjs, fx, fy, fz).tolist()
    return run


def workloads(quick: bool):
    out = [("enumerate d=4, no facts", _solve(4, []))]
    if not quick:
        out.append(("enumerate d=5, no facts", _solve(5, [])))
    g = random_dag(6, 6, 1)
    facts = mpc_source_facts(OracleTester(g), 0.05).facts
    out.append(("d=6 oracle facts, hard", _solve(6, facts)))
    out.append(("d=6 oracle facts, soft", _solve(6, facts.facts, mode="soft")))
    out.append(("d=6 oracle facts, find_one", _solve(6, facts, find_one=True)))
    out.append(("fact table d=6, 2000 graphs", _fact_table(6, 2000 if not quick else 300, 2)))
    return out


def best_time(fn, backend, repeat):
    fn(backend)
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("numba")
    except RuntimeError:
        print("numba backend unavailable (CAUSALABA_NO_NUMBA set?); nothing to compare")
        return 1
    print(f"{'workload':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fn in workloads(args.quick):
        t_nb, r_nb = best_time(fn, "numba", args.repeat)
        t_np, r_np = best_time(fn, "numpy", 1)
        assert r_nb == r_np, f"backends disagree on {name}"
        print(f"{name:34s} {t_nb:10.4f} {t_np:10.4f} {t_np / max(t_nb, 1e-9):8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
