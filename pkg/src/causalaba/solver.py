"""Exact enumeration of the DAGs consistent with a set of (in)dependence facts.

The search assigns each unordered pair one of forward / backward / absent,
propagating acyclicity and checking facts against sound bounds on partial
assignments.  In hard mode the result is exactly the set of DAGs satisfying
every fact; in soft mode only the models maximising the total weight of
satisfied facts are kept.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import QueryError, UnsupportedDimensionError
from .facts import CiFact, FactSet, Kind
from .graph import Dag, write_edgelist
from .kernels import ABS, ALL, BWD, CAPPED, FWD, TIMEOUT
from .kernels._common import WEIGHT_EPS

_KIND_CODE = {Kind.INDEP: kernels.K_INDEP, Kind.DEP: kernels.K_DEP,
              Kind.ARROW: kernels.K_ARROW, Kind.NOEDGE: kernels.K_NOEDGE}

SAT, UNSAT, TIMED_OUT, CAPPED_OUT = "sat", "unsat", "timeout", "capped"


@dataclass(frozen=True)
class SolverConfig:
    """Search settings.

    Parameters
    ----------
    mode : {"hard", "soft"}
        Hard mode treats every fact as a constraint.  Soft mode maximises the
        summed strength of satisfied facts (facts listed as ``hard`` in the
        call stay constraints).
    budget_s : float
        Wall-clock budget per call, in seconds.
    workers : int
        Number of threads the root of the search tree is split across.
    cap : int
        Maximum number of models kept before the outcome becomes ``capped``.
    """

    mode: str = "hard"
    budget_s: float = 600.0
    workers: int = 1
    cap: int = 100_000

    def __post_init__(self):
        if self.mode not in ("hard", "soft"):
            raise QueryError(f"unknown solver mode {self.mode!r}")
        if not self.budget_s > 0 or self.cap < 1 or self.workers < 1:
            raise QueryError("budget, cap and workers must be positive")


@dataclass
class ModelSet:
    models: list
    weights: list | None
    outcome: str
    nodes: int = 0
    prunes: int = 0
    elapsed_s: float = 0.0
    cap: int | None = None

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    @property
    def satisfiable(self) -> bool:
        return self.outcome in (SAT, CAPPED_OUT)

    def stats(self) -> dict:
        out = {"outcome": self.outcome, "models": len(self.models), "nodes": self.nodes,
               "prunes": self.prunes, "elapsed_s": round(self.elapsed_s, 6)}
        if self.outcome == CAPPED_OUT:
            out["cap"] = self.cap
        return out

    def stats_json(self) -> str:
        return json.dumps(self.stats(), sort_keys=True)

    def write(self, directory, names: Sequence[str] | None = None) -> None:
        """Write ``model_<k>.edges`` files and ``stats.json`` into ``directory``."""
        from pathlib import Path

        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        width = max(1, len(str(len(self.models))))
        for k, g in enumerate(self.models):
            (root / f"model_{k:0{width}d}.edges").write_text(write_edgelist(g, names))
        (root / "stats.json").write_text(self.stats_json() + "\n")


# ---------------------------------------------------------------- encoding


def pair_index(d: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    pi = np.array([p[0] for p in pairs], dtype=np.int64)
    pj = np.array([p[1] for p in pairs], dtype=np.int64)
    return pi, pj


def _pid(d: int) -> dict:
    pi, pj = pair_index(d)
    return {(int(a), int(b)): k for k, (a, b) in enumerate(zip(pi, pj))}


def encode_facts(d: int, facts: Sequence[CiFact]):
    n = len(facts)
    fx = np.zeros(n, dtype=np.int64)
    fy = np.zeros(n, dtype=np.int64)
    fz = np.zeros((n, d), dtype=np.bool_)
    fk = np.zeros(n, dtype=np.int64)
    fw = np.zeros(n, dtype=np.float64)
    for k, f in enumerate(facts):
        for v in (f.x, f.y, *f.z):
            if not 0 <= v < d:
                raise QueryError(f"fact {f} references variable outside d={d}")
        fx[k], fy[k], fk[k], fw[k] = f.x, f.y, _KIND_CODE[f.kind], f.strength
        for v in f.z:
            fz[k, v] = True
    return fx, fy, fz, fk, fw


def initial_domains(d: int, facts: Sequence[CiFact], hard: Sequence[bool]) -> np.ndarray:
    """Root domains after the forced deductions of hard facts.

    An independence fact removes its pair (adjacent variables are never
    d-separated); arrow and no-edge facts fix their pair's state.
    """
    pid = _pid(d)
    dom = np.full(len(pid), ALL, dtype=np.int8)
    for f, h in zip(facts, hard):
        if not h:
            continue
        a, b = min(f.x, f.y), max(f.x, f.y)
        p = pid[(a, b)]
        if f.kind in (Kind.INDEP, Kind.NOEDGE):
            dom[p] &= ABS
        elif f.kind == Kind.ARROW:
            dom[p] &= FWD if f.x < f.y else BWD
    return dom


def decode(d: int, states: np.ndarray) -> list[Dag]:
    pi, pj = pair_index(d)
    out = []
    for row in states:
        edges = set()
        for k, s in enumerate(row):
            if s == FWD:
                edges.add((int(pi[k]), int(pj[k])))
            elif s == BWD:
                edges.add((int(pj[k]), int(pi[k])))
        out.append(Dag(d, frozenset(edges)))
    return out


def dag_states(g: Dag) -> np.ndarray:
    pid = _pid(g.d)
    row = np.full(len(pid), ABS, dtype=np.int8)
    for a, b in g.edges:
        row[pid[(min(a, b), max(a, b))]] = FWD if a < b else BWD
    return row


# ---------------------------------------------------------------- checks


def propagate(d: int, dom: np.ndarray, facts: Sequence[CiFact]) -> np.ndarray | None:
    """Apply forced deductions to a partial assignment (all facts treated as hard).

    Returns the narrowed domain array, or ``None`` when the assignment is
    contradictory.
    """
    dom = np.array(dom, dtype=np.int8, copy=True)
    pi, pj = pair_index(d)
    if dom.shape != pi.shape:
        raise QueryError(f"expected {pi.size} pair states for d={d}")
    hard = [True] * len(facts)
    dom &= initial_domains(d, facts, hard)
    if (dom == 0).any():
        return None
    fx, fy, fz, fk, fw = encode_facts(d, facts)
    pid = np.full((d, d), -1, dtype=np.int64)
    pid[pi, pj] = np.arange(pi.size)
    be = kernels.get_backend()
    ok, _ = be._propagate(dom, pi, pj, d, pid, fx, fy, fz, fk, np.ones(len(facts), np.bool_), fw, False)
    return dom if ok else None


def check_model(g: Dag, facts: Sequence[CiFact]) -> tuple[bool, np.ndarray]:
    """Per-fact satisfaction of a complete DAG and their conjunction."""
    facts = list(facts)
    if not facts:
        return True, np.zeros(0, dtype=bool)
    sat = satisfaction_table([g], facts)[0]
    return bool(sat.all()), sat


def satisfaction_table(models: Sequence[Dag], facts: Sequence[CiFact]) -> np.ndarray:
    """Boolean matrix ``[model, fact]``: True where the model satisfies the fact."""
    facts = list(facts)
    if not models:
        return np.zeros((0, len(facts)), dtype=bool)
    d = models[0].d
    adjs = np.stack([np.asarray(g.adj, dtype=np.uint8) for g in models])
    fx, fy, fz, fk, _ = encode_facts(d, facts)
    sep = kernels.fact_table(adjs, fx, fy, fz) if facts else np.zeros((len(models), 0), bool)
    out = np.empty_like(sep)
    for k, f in enumerate(facts):
        if f.kind == Kind.INDEP:
            out[:, k] = sep[:, k]
        elif f.kind == Kind.DEP:
            out[:, k] = ~sep[:, k]
        elif f.kind == Kind.ARROW:
            out[:, k] = adjs[:, f.x, f.y] == 1
        else:
            out[:, k] = (adjs[:, f.x, f.y] == 0) & (adjs[:, f.y, f.x] == 0)
    return out


# ---------------------------------------------------------------- search


def _split(dom0, pi, pj, d, depth_pairs):
    """Expand the root on its first open pairs to get independent subtrees."""
    roots = [dom0]
    for p in depth_pairs:
        nxt = []
        for r in roots:
            for bit in (FWD, BWD, ABS):
                if r[p] & bit:
                    c = r.copy()
                    c[p] = bit
                    nxt.append(c)
        roots = nxt
    return roots


def causalaba(d: int, facts, cfg: SolverConfig | None = None, hard: Sequence[bool] | None = None,
              find_one: bool = False, backend: str | None = None) -> ModelSet:
    """Enumerate DAGs on ``d`` nodes consistent with ``facts``.

    Parameters
    ----------
    d : int
        Number of variables (at least 3).
    facts : FactSet or sequence of CiFact
    cfg : SolverConfig, optional
    hard : sequence of bool, optional
        Per-fact hardness.  Defaults to all hard in hard mode and all soft in
        soft mode.
    find_one : bool
        Stop at the first model (hard mode only); used for satisfiability checks.
    backend : {"numba", "numpy"}, optional
        Kernel override; defaults to the active backend.

    Returns
    -------
    ModelSet
        Models in canonical (sorted edge list) order.  An empty set with
        outcome ``unsat`` means the facts are inconsistent.
    """
    cfg = cfg or SolverConfig()
    if d < 3:
        raise UnsupportedDimensionError(f"solver needs d >= 3, got {d}")
    if isinstance(facts, FactSet):
        if facts.d != d:
            raise QueryError(f"fact set is over d={facts.d}, solver called with d={d}")
        facts = facts.facts
    facts = list(facts)
    soft = cfg.mode == "soft"
    if hard is None:
        hard = [not soft] * len(facts)
    hard = list(hard)
    if len(hard) != len(facts):
        raise QueryError("one hardness flag per fact required")
    if soft and find_one:
        raise QueryError("find_one is only meaningful in hard mode")

    be = kernels.get_backend(backend)
    t0 = time.perf_counter()
    pi, pj = pair_index(d)
    fx, fy, fz, fk, fw = encode_facts(d, facts)
    fhard = np.array(hard, dtype=np.bool_)
    dom0 = initial_domains(d, facts, hard)
    if (dom0 == 0).any():
        return ModelSet([], [] if soft else None, UNSAT, 1, 1, time.perf_counter() - t0)

    open_pairs = [p for p in range(pi.size) if dom0[p] in (FWD | BWD, FWD | ABS, BWD | ABS, ALL)]
    roots = [dom0]
    if cfg.workers > 1 and not find_one and open_pairs:
        roots = _split(dom0, pi, pj, d, open_pairs[:2])

    def run(root):
        left = max(cfg.budget_s - (time.perf_counter() - t0), 1e-6)
        return be.search(d, pi, pj, root, fx, fy, fz, fk, fhard, fw, soft, cfg.cap, left, find_one)

    if len(roots) == 1:
        results = [run(roots[0])]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, roots))

    states = [r[0] for r in results]
    wts = [r[1] for r in results]
    outcomes = [int(r[2]) for r in results]
    nodes = sum(int(r[3]) for r in results)
    prunes = sum(int(r[4]) for r in results)
    states = np.concatenate(states) if states else np.zeros((0, pi.size), np.int8)
    wts = np.concatenate(wts) if wts else np.zeros(0)
    if soft and len(wts):
        keep = wts >= wts.max() - WEIGHT_EPS
        states, wts = states[keep], wts[keep]

    models = decode(d, states)
    order = sorted(range(len(models)), key=lambda k: models[k].sorted_edges())
    models = [models[k] for k in order]
    weights = [float(wts[k]) for k in order] if soft else None

    if TIMEOUT in outcomes:
        outcome = TIMED_OUT
    elif CAPPED in outcomes or len(models) > cfg.cap:
        outcome = CAPPED_OUT
        models = models[: cfg.cap]
        weights = weights[: cfg.cap] if weights is not None else None
    else:
        outcome = SAT if models else UNSAT
    return ModelSet(models, weights, outcome, nodes, prunes, time.perf_counter() - t0, cfg.cap)


def brute_force(d: int, facts: Sequence[CiFact]) -> list[Dag]:
    """Reference filter over every DAG on ``d`` nodes; exponential, for tests."""
    from .graph import all_dags

    facts = list(facts)
    dags = sorted(all_dags(d), key=Dag.sorted_edges)
    if not facts:
        return dags
    sat = satisfaction_table(dags, facts)
    return [g for g, row in zip(dags, sat) if row.all()]
