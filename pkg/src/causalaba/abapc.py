"""The ABA-PC loop: drop the weakest facts until the solver finds a model, then score."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import QueryError, SolverTimeout, UnsupportedDimensionError
from .facts import FactSet, Kind, sort_facts
from .graph import Dag
from .solver import CAPPED_OUT, TIMED_OUT, UNSAT, ModelSet, SolverConfig, causalaba, satisfaction_table


def score_models(models, all_facts: FactSet, symmetric: bool = False) -> np.ndarray:
    """Score each model against every performed test.

    Independence facts add their strength when the model d-separates the
    pair and subtract it otherwise.  Dependence facts always subtract their
    strength; with ``symmetric=True`` they add it when the model d-connects.
    Arrow and no-edge facts are scored like independence facts (satisfied adds,
    violated subtracts).
    """
    facts = list(all_facts)
    if not models:
        return np.zeros(0)
    if not facts:
        return np.zeros(len(models))
    sat = satisfaction_table(models, facts)
    w = np.array([f.strength for f in facts])
    sign = np.where(sat, 1.0, -1.0)
    if not symmetric:
        dep = np.array([f.kind == Kind.DEP for f in facts])
        sign[:, dep] = -1.0
    return sign @ w


def score_model(g: Dag, all_facts: FactSet, symmetric: bool = False) -> float:
    return float(score_models([g], all_facts, symmetric)[0])


@dataclass
class AbapcRun:
    input_facts: FactSet
    kept: FactSet
    dropped: list
    models: list
    scores: list
    selected: Dag | None
    iterations: int
    solver_stats: list = field(default_factory=list)
    rescored_soft: bool = False
    elapsed_s: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "d": self.input_facts.d,
            "alpha": self.input_facts.alpha,
            "n_facts": len(self.input_facts),
            "iterations": self.iterations,
            "dropped": [_fact_dict(f) for f in self.dropped],
            "n_kept": len(self.kept),
            "n_models": len(self.models),
            "models": [[list(e) for e in g.sorted_edges()] for g in self.models],
            "scores": [round(s, 12) for s in self.scores],
            "selected": None if self.selected is None else [list(e) for e in self.selected.sorted_edges()],
            "soft_rerun": self.rescored_soft,
        }
        if timing:
            out["elapsed_s"] = round(self.elapsed_s, 6)
            out["solver"] = self.solver_stats
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=1)


def _fact_dict(f) -> dict:
    return {"kind": f.kind.value, "x": f.x, "y": f.y, "z": sorted(f.z),
            "p": None if f.p != f.p else f.p, "strength": f.strength}


def select(models, scores) -> int:
    """Index of the best-scoring model; ties go to the smallest sorted edge list."""
    best = max(scores)
    tied = [k for k, s in enumerate(scores) if s >= best - 1e-9]
    return min(tied, key=lambda k: models[k].sorted_edges())


def run_abapc(facts: FactSet, cfg: SolverConfig | None = None, symmetric: bool = False) -> AbapcRun:
    """Weakest-first fact dropping followed by model scoring.

    The facts are sorted by ascending strength.  While the kept facts are
    unsatisfiable the weakest one is dropped; each satisfiability check stops
    at the first model.  Since satisfiability is monotone in the number of
    dropped facts the cut point is located by bisection, and every model a
    check returns also rules out the suffixes it satisfies.  The surviving
    facts are then enumerated in full and
    each model is scored against every input fact.  If the enumeration hits
    its cap the model set is recomputed in soft mode, with the kept facts as
    constraints and the input independence facts as weighted preferences, which
    returns exactly the best-scoring models.

    Raises
    ------
    SolverTimeout
        When the budget runs out; ``log`` carries the partial run.
    """
    cfg = cfg or SolverConfig()
    d = facts.d
    if d < 3:
        raise UnsupportedDimensionError(f"ABA-PC needs d >= 3, got {d}")
    if len(facts) == 0:
        raise QueryError("ABA-PC needs at least one fact")
    t0 = time.perf_counter()
    deadline = t0 + cfg.budget_s
    order = sort_facts(facts).facts
    dropped = []
    stats = []
    start = 0

    def remaining():
        left = deadline - time.perf_counter()
        if left <= 0:
            raise SolverTimeout("time budget exhausted", _partial(facts, order, start, dropped, stats, t0))
        return SolverConfig("hard", left, cfg.workers, cfg.cap)

    def probe(k):
        ms = causalaba(d, order[k:], remaining(), find_one=True)
        stats.append(ms.stats())
        if ms.outcome == TIMED_OUT:
            raise SolverTimeout("solver timed out in the drop loop",
                                _partial(facts, order, start, dropped, stats, t0))
        return ms.models[0] if ms.outcome != UNSAT else None

    # dropping more of the weakest facts never removes a model, so the first
    # satisfiable suffix found by bisection equals the one-at-a-time answer
    if probe(0) is None:
        lo, hi = 0, len(order)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            g = probe(mid)
            if g is not None:
                # the witness may satisfy a longer suffix than the one probed
                hi = _first_satisfied(g, order)
            else:
                lo = mid
                start, dropped = lo, list(order[:lo])
        start = hi
        dropped = list(order[:start])

    kept = order[start:]
    ms = causalaba(d, kept, remaining())
    stats.append(ms.stats())
    if ms.outcome == TIMED_OUT:
        raise SolverTimeout("solver timed out enumerating models",
                            _partial(facts, order, start, dropped, stats, t0))
    soft_rerun = False
    if ms.outcome == CAPPED_OUT:
        ms = _soft_rerun(d, kept, facts, remaining(), symmetric)
        stats.append(ms.stats())
        soft_rerun = True
        if ms.outcome == TIMED_OUT:
            raise SolverTimeout("solver timed out in the soft re-run",
                                _partial(facts, order, start, dropped, stats, t0))

    models = ms.models
    scores = score_models(models, facts, symmetric).tolist()
    selected = models[select(models, scores)] if models else None
    return AbapcRun(facts, facts.replace(kept), dropped, models, scores, selected, len(dropped) + 1,
                    stats, soft_rerun, time.perf_counter() - t0)


def _first_satisfied(g: Dag, order) -> int:
    """Smallest ``k`` such that ``g`` satisfies every fact in ``order[k:]``."""
    sat = satisfaction_table([g], order)[0]
    k = len(order)
    while k > 0 and sat[k - 1]:
        k -= 1
    return k


def _soft_rerun(d, kept, facts: FactSet, cfg: SolverConfig, symmetric: bool) -> ModelSet:
    # maximising the satisfied weight of independence facts maximises the
    # literal score: the dependence terms do not depend on the graph
    prefs = [f for f in facts if f.kind != Kind.DEP or symmetric]
    prefs = [f for f in prefs if f not in kept]
    soft_cfg = SolverConfig("soft", cfg.budget_s, cfg.workers, cfg.cap)
    return causalaba(d, list(kept) + prefs, soft_cfg, hard=[True] * len(kept) + [False] * len(prefs))


def _partial(facts, order, start, dropped, stats, t0) -> AbapcRun:
    return AbapcRun(facts, facts.replace(order[start:]), list(dropped), [], [], None, len(dropped) + 1,
                    list(stats), False, time.perf_counter() - t0)
