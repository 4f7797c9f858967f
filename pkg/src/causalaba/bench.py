"""Benchmark harness: run methods over seeds and datasets, emit metric rows."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .abapc import run_abapc
from .citest import Dataset, FisherZ, OracleTester
from .dataio import FIXTURES, SemSpec, ancestral_sample, load_fixture, random_dag, sem_sample
from .errors import CausalAbaError, NotExtendableError
from .facts import mpc_source_facts
from .graph import Dag, Pdag, cpdag_of, is_acyclic, mec_members
from .metrics import precision_recall_f1, shd, sid_parents
from .solver import SolverConfig

METHODS = ("abapc", "mpc", "random")
SEM_EDGES = {5: 5, 6: 6, 8: 8}


@dataclass(frozen=True)
class BenchCase:
    dataset: str
    seed: int
    truth: Dag
    data: Dataset


def make_case(dataset: str, seed: int, n: int = 5000) -> BenchCase:
    """``dataset`` is a fixture name or ``sem<d>`` (e.g. ``sem6``) for a random linear-Gaussian SEM."""
    if dataset in FIXTURES:
        net = load_fixture(dataset)
        return BenchCase(dataset, seed, net.structure, ancestral_sample(net, n, seed))
    if dataset.startswith("sem"):
        d = int(dataset[3:])
        g = random_dag(d, SEM_EDGES.get(d, d), seed)
        spec = SemSpec.random(g, seed)
        return BenchCase(dataset, seed, g, sem_sample(spec, n))
    raise ValueError(f"unknown dataset {dataset!r}")


def completions(p: Pdag, cap: int = 10_000) -> list[list[frozenset]]:
    """Parent sets of the DAG members of ``p``.

    A non-extendable output falls back to its acyclic orientations, and an
    output with no acyclic orientation (a directed cycle) to all orientations.
    """
    try:
        return [[g.parents(v) for v in range(p.d)] for g in mec_members(p, cap)]
    except NotExtendableError:
        pass
    und = sorted(p.undirected)
    acyclic, cyclic = [], []
    for bits in itertools.product((0, 1), repeat=len(und)):
        edges = set(p.directed) | {(a, b) if s == 0 else (b, a) for (a, b), s in zip(und, bits)}
        pa = [frozenset(a for a, b in edges if b == v) for v in range(p.d)]
        (acyclic if is_acyclic(p.d, edges) else cyclic).append(pa)
        if len(acyclic) >= cap:
            break
    return acyclic or cyclic[:cap]


def _score(truth: Dag, est: Pdag) -> dict:
    sids = [sid_parents(truth, pa) for pa in completions(est)]
    ne = len(truth.edges)
    s = shd(cpdag_of(truth), est).total
    pr = precision_recall_f1(cpdag_of(truth), est)
    lo, hi = min(sids), max(sids)
    return {"shd": s, "nshd": s / ne, "sid_low": lo, "sid_high": hi, "nsid_low": lo / ne, "nsid_high": hi / ne,
            "precision": pr.precision, "recall": pr.recall, "f1": pr.f1, "est_edges": est.n_edges,
            "true_edges": ne}


def run_method(case: BenchCase, method: str, alpha: float = 0.05, budget_s: float = 600.0) -> dict:
    """One metrics row.  Estimates are compared as CPDAGs against the true DAG's class."""
    t0 = time.perf_counter()
    row = {"dataset": case.dataset, "seed": case.seed, "method": method}
    try:
        if method == "random":
            rng = np.random.default_rng(case.seed + 10_007)
            g = random_dag(case.truth.d, len(case.truth.edges), int(rng.integers(2**31)))
            est = cpdag_of(g)
        else:
            tester = FisherZ(case.data) if method != "oracle" else OracleTester(case.truth)
            src = mpc_source_facts(tester, alpha)
            if method == "mpc":
                est = src.cpdag
            elif method in ("abapc", "oracle"):
                run = run_abapc(src.facts, SolverConfig(budget_s=budget_s))
                est = cpdag_of(run.selected)
            else:
                raise ValueError(f"unknown method {method!r}")
        row.update(_score(case.truth, est))
        row["error"] = None
    except CausalAbaError as exc:
        row.update({k: float("nan") for k in ("shd", "nshd", "sid_low", "sid_high", "nsid_low", "nsid_high",
                                                "precision", "recall", "f1", "est_edges")})
        row["true_edges"] = len(case.truth.edges)
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["elapsed_s"] = time.perf_counter() - t0
    return row


def run_grid(datasets, seeds, methods=METHODS, n: int = 5000, alpha: float = 0.05, budget_s: float = 600.0,
             progress=None) -> list[dict]:
    rows = []
    for ds in datasets:
        for seed in seeds:
            case = make_case(ds, seed, n)
            for m in methods:
                rows.append(run_method(case, m, alpha, budget_s))
                if progress:
                    progress(rows[-1])
    return rows


def summarise(rows, key: str = "nsid_high") -> dict:
    """Mean and standard deviation of ``key`` per (dataset, method), skipping failed rows."""
    out = {}
    for r in rows:
        v = r.get(key)
        if v is None or v != v:
            continue
        out.setdefault((r["dataset"], r["method"]), []).append(float(v))
    return {k: (float(np.mean(v)), float(np.std(v)), len(v)) for k, v in sorted(out.items())}


def paired_comparison(rows, dataset: str, a: str = "abapc", b: str = "mpc", key: str = "nsid_high"):
    """One-sided paired t-test of ``H1: mean(a) > mean(b)`` on seeds where both succeeded.

    Returns ``(mean_a, mean_b, p_value, n_pairs)``.
    """
    from scipy.stats import ttest_rel

    by = {}
    for r in rows:
        if r["dataset"] == dataset and r["method"] in (a, b) and r.get(key) == r.get(key):
            by.setdefault(r["seed"], {})[r["method"]] = float(r[key])
    pairs = [(v[a], v[b]) for v in by.values() if a in v and b in v]
    if not pairs:
        return float("nan"), float("nan"), float("nan"), 0
    xa = np.array([p[0] for p in pairs])
    xb = np.array([p[1] for p in pairs])
    if np.allclose(xa, xb):
        p = 1.0
    else:
        p = float(ttest_rel(xa, xb, alternative="greater").pvalue)
    return float(xa.mean()), float(xb.mean()), p, len(pairs)


def bar_chart_svg(summary: dict, path, title: str = "NSID (high)") -> None:
    """Grouped bar chart (one group per dataset, one bar per method) as a static SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    datasets = sorted({k[0] for k in summary})
    methods = sorted({k[1] for k in summary})
    width = 0.8 / max(1, len(methods))
    fig, ax = plt.subplots(figsize=(1.6 + 1.4 * len(datasets), 3.2))
    for k, m in enumerate(methods):
        xs = [i + k * width for i in range(len(datasets))]
        means = [summary.get((d, m), (np.nan, 0, 0))[0] for d in datasets]
        stds = [summary.get((d, m), (0, np.nan, 0))[1] for d in datasets]
        ax.bar(xs, means, width, yerr=stds, label=m, capsize=2)
    ax.set_xticks([i + width * (len(methods) - 1) / 2 for i in range(len(datasets))])
    ax.set_xticklabels(datasets)
    ax.set_ylabel(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
