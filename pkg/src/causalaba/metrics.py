"""Graph comparison metrics: SHD, SID (DAG and CPDAG bounds), precision, recall, F1."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CappedError, QueryError
from .graph import Dag, Pdag, ancestors, d_separated, descendants, enumerate_paths, mec_members, path_is_active

MEC_CAP = 10_000


def _as_pdag(g) -> Pdag:
    if isinstance(g, Dag):
        return g.to_pdag()
    if isinstance(g, Pdag):
        return g
    raise TypeError(f"expected Dag or Pdag, got {type(g).__name__}")


def _same_d(a, b):
    if a.d != b.d:
        raise QueryError(f"dimension mismatch: {a.d} vs {b.d}")


def _marks(p: Pdag) -> dict:
    """Map each skeleton pair ``(min, max)`` to ``"->"``, ``"<-"`` or ``"--"``."""
    out = {}
    for a, b in p.directed:
        out[(min(a, b), max(a, b))] = "->" if a < b else "<-"
    for a, b in p.undirected:
        out[(a, b)] = "--"
    return out


@dataclass(frozen=True)
class Shd:
    extra: int
    missing: int
    reversed: int

    @property
    def total(self) -> int:
        return self.extra + self.missing + self.reversed

    def __int__(self):
        return self.total


def shd(true_g, est_g) -> Shd:
    """Structural Hamming distance ``E + M + R``.

    An orientation mismatch on a shared pair (reversed, or directed versus
    undirected) counts once in ``R``.
    """
    t, e = _as_pdag(true_g), _as_pdag(est_g)
    _same_d(t, e)
    tm, em = _marks(t), _marks(e)
    extra = sum(1 for p in em if p not in tm)
    missing = sum(1 for p in tm if p not in em)
    rev = sum(1 for p in em if p in tm and em[p] != tm[p])
    return Shd(extra, missing, rev)


@dataclass(frozen=True)
class PrecisionRecall:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    undefined: tuple = ()


def precision_recall_f1(true_g, est_g) -> PrecisionRecall:
    """Edge-mark precision and recall.

    TP counts estimated edges whose mark matches the truth exactly (an
    undirected estimate of a directed true edge is not a TP).  FP counts
    estimated edges outside the true skeleton and FN true edges missing from
    the estimate.  A zero denominator gives 0 and is listed in ``undefined``.
    """
    t, e = _as_pdag(true_g), _as_pdag(est_g)
    _same_d(t, e)
    tm, em = _marks(t), _marks(e)
    tp = sum(1 for p, m in em.items() if tm.get(p) == m)
    fp = sum(1 for p in em if p not in tm)
    fn = sum(1 for p in tm if p not in em)
    undefined = []
    if tp + fp == 0:
        prec = 0.0
        undefined.append("precision")
    else:
        prec = tp / (tp + fp)
    if tp + fn == 0:
        rec = 0.0
        undefined.append("recall")
    else:
        rec = tp / (tp + fn)
    f1 = 0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec)
    return PrecisionRecall(prec, rec, f1, tp, fp, fn, tuple(undefined))


# ---------------------------------------------------------------- SID


def _causal_nodes(g: Dag, i: int, j: int) -> set:
    """Nodes other than ``i`` lying on a directed i-to-j path."""
    if j not in descendants(g, i):
        return set()
    return (set(descendants(g, i)) & (set(ancestors(g, j)) | {j}))


def _forbidden(g: Dag, i: int, j: int) -> set:
    out = set()
    for w in _causal_nodes(g, i, j):
        out.add(w)
        out |= descendants(g, w)
    return out


def valid_adjustment(g: Dag, i: int, j: int, z) -> bool:
    """Generalised back-door check: no forbidden node in ``z`` and ``z`` blocks
    every non-causal i-j path, tested as d-separation in the proper back-door graph."""
    z = frozenset(z)
    if z & _forbidden(g, i, j):
        return False
    on_causal = _causal_nodes(g, i, j)
    pbd = Dag(g.d, frozenset((a, b) for a, b in g.edges if not (a == i and b in on_causal)))
    return d_separated(pbd, i, j, z)


def valid_adjustment_naive(g: Dag, i: int, j: int, z) -> bool:
    """Literal definition over explicit paths; exponential, for tests."""
    z = frozenset(z)
    causal, noncausal = [], []
    for p in enumerate_paths(g, i, j):
        directed = all((p[k], p[k + 1]) in g.edges for k in range(len(p) - 1))
        (causal if directed else noncausal).append(p)
    forb = set()
    for p in causal:
        for w in p[1:]:
            forb.add(w)
            forb |= descendants(g, w)
    if z & forb:
        return False
    return not any(path_is_active(g, p, z) for p in noncausal)


def _sid_pairs(true_g: Dag, est_g: Dag, naive: bool) -> int:
    _same_d(true_g, est_g)
    return sid_parents(true_g, [est_g.parents(i) for i in range(est_g.d)], naive)


def sid_parents(true_g: Dag, parents, naive: bool = False) -> int:
    """SID from the estimated parent set of each node.

    Only parent sets enter the count, so this also scores directed graphs
    that contain a cycle.
    """
    if len(parents) != true_g.d:
        raise QueryError(f"dimension mismatch: {true_g.d} vs {len(parents)}")
    check = valid_adjustment_naive if naive else valid_adjustment
    errors = 0
    for i in range(true_g.d):
        pa = frozenset(parents[i])
        de = descendants(true_g, i)
        for j in range(true_g.d):
            if j == i:
                continue
            if j in pa:
                errors += j in de
            elif not check(true_g, i, j, pa):
                errors += 1
    return errors


def sid_dag(true_g: Dag, est_g: Dag) -> int:
    """Number of ordered pairs ``(i, j)`` whose interventional effect is
    mis-estimated when adjusting for the estimated parents of ``i``.

    If ``j`` is an estimated parent of ``i`` the estimate claims no effect,
    which is wrong exactly when ``j`` descends from ``i`` in the truth.
    """
    return _sid_pairs(true_g, est_g, naive=False)


def sid_dag_naive(true_g: Dag, est_g: Dag) -> int:
    return _sid_pairs(true_g, est_g, naive=True)


def _members(g, cap):
    if isinstance(g, Dag):
        return [g]
    try:
        return mec_members(g, cap)
    except CappedError as exc:
        raise CappedError(str(exc), partial=exc.partial) from None


def sid_cpdag(true_g, est_c, cap: int = MEC_CAP) -> tuple[int, int]:
    """Best and worst SID over the DAGs of the estimate's equivalence class.

    When the truth is given as a partially directed graph its members are
    enumerated too and the bounds range over all pairs.
    """
    ests = _members(est_c, cap)
    try:
        trues = _members(true_g, cap)
    except CappedError as exc:
        raise CappedError(f"true class too large: {exc}", partial=None) from None
    vals = []
    for t in trues:
        for k, e in enumerate(ests):
            vals.append(sid_dag(t, e))
    return min(vals), max(vals)


# ---------------------------------------------------------------- report


@dataclass
class MetricsReport:
    shd: int
    nshd: float
    sid_low: int
    sid_high: int
    nsid_low: float
    nsid_high: float
    precision: float
    recall: float
    f1: float
    est_edges: int
    true_edges: int

    def row(self, **extra) -> dict:
        out = dict(extra)
        out.update(asdict(self))
        return out


def _n_edges(g) -> int:
    return len(g.edges) if isinstance(g, Dag) else g.n_edges


def evaluate(true_g, est_g, cap: int = MEC_CAP) -> MetricsReport:
    """All metrics of an estimate (DAG or CPDAG) against the truth."""
    s = shd(true_g, est_g).total
    lo, hi = sid_cpdag(true_g, est_g, cap)
    pr = precision_recall_f1(true_g, est_g)
    ne = _n_edges(true_g)
    norm = float(ne) if ne else float("nan")
    return MetricsReport(s, s / norm, lo, hi, lo / norm, hi / norm, pr.precision, pr.recall, pr.f1,
                         _n_edges(est_g), ne)


METRIC_KEYS = ("dataset", "seed", "method", "shd", "nshd", "sid_low", "sid_high", "nsid_low", "nsid_high",
               "precision", "recall", "f1", "elapsed_s", "est_edges", "true_edges")


def metrics_json(rows) -> str:
    """Serialise metric rows with the fixed key set and order."""
    clean = []
    for r in rows:
        missing = [k for k in METRIC_KEYS if k not in r]
        if missing:
            raise QueryError(f"metrics row lacks {missing}")
        clean.append({k: _jsonable(r[k]) for k in METRIC_KEYS})
    return json.dumps(clean, indent=1)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if v != v else v
    if isinstance(v, np.integer):
        return int(v)
    return v
