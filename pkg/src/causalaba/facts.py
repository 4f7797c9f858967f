"""Weighted (in)dependence facts and MPC-style fact sourcing."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .citest import Tester, canonical
from .errors import FormatError, QueryError, UnsupportedDimensionError
from .graph import Pdag, _pair, meek_closure


class Kind(str, Enum):
    INDEP = "indep"
    DEP = "dep"
    ARROW = "arrow"
    NOEDGE = "noedge"


# dependence facts come first among equal strengths
_KIND_ORDER = {Kind.DEP: 0, Kind.INDEP: 1, Kind.ARROW: 2, Kind.NOEDGE: 3}


def gamma(p: float, alpha: float) -> float:
    """Normalised evidence in [0.5, 1]: 1 at p=0 and p=1, 0.5 at p=alpha."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise QueryError(f"p-value {p} outside [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise QueryError(f"alpha {alpha} outside (0, 1)")
    if p < alpha:
        return 1.0 - p / (2.0 * alpha)
    return (2.0 * alpha - p - 1.0) / (2.0 * (alpha - 1.0))


def strength(p: float, alpha: float, s: int, d: int) -> float:
    """Fact weight: gamma scaled down linearly in the conditioning-set size ``s``."""
    if d < 3:
        raise UnsupportedDimensionError(f"strength needs d >= 3, got {d}")
    if not 0 <= s <= d - 2:
        raise QueryError(f"conditioning size {s} outside [0, {d - 2}]")
    return (1.0 - s / (d - 2)) * gamma(p, alpha)


@dataclass(frozen=True)
class CiFact:
    kind: Kind
    x: int
    y: int
    z: frozenset = frozenset()
    p: float = float("nan")
    strength: float = 1.0

    @property
    def key(self) -> tuple:
        if self.kind in (Kind.INDEP, Kind.DEP):
            return ("ci", self.x, self.y, self.z)
        return (self.kind.value, self.x, self.y)

    def sort_key(self) -> tuple:
        return (self.strength, _KIND_ORDER[self.kind], self.x, self.y, tuple(sorted(self.z)))

    def __str__(self) -> str:
        zs = ",".join(map(str, sorted(self.z)))
        sym = {Kind.INDEP: "_||_", Kind.DEP: "not _||_", Kind.ARROW: "->", Kind.NOEDGE: "-/-"}[self.kind]
        tail = f" | {{{zs}}}" if self.z else ""
        return f"{self.x} {sym} {self.y}{tail} (p={self.p:.3g}, S={self.strength:.3f})"


def make_fact(x: int, y: int, z: Iterable[int], p: float, alpha: float, d: int) -> CiFact:
    """Classify a test result (p >= alpha is independence) and weight it."""
    x, y, z = canonical(x, y, z, d)
    kind = Kind.INDEP if p >= alpha else Kind.DEP
    return CiFact(kind, x, y, z, float(p), strength(p, alpha, len(z), d))


def arrow_fact(x: int, y: int, weight: float = 1.0) -> CiFact:
    if x == y:
        raise QueryError("arrow needs two distinct variables")
    return CiFact(Kind.ARROW, x, y, frozenset(), float("nan"), weight)


def noedge_fact(x: int, y: int, weight: float = 1.0) -> CiFact:
    x, y = _pair(x, y)
    if x == y:
        raise QueryError("no-edge fact needs two distinct variables")
    return CiFact(Kind.NOEDGE, x, y, frozenset(), float("nan"), weight)


@dataclass
class FactSet:
    facts: list = field(default_factory=list)
    alpha: float = 0.05
    d: int = 3

    def __post_init__(self):
        self.facts = list(self.facts)
        seen = set()
        for f in self.facts:
            if f.key in seen:
                raise QueryError(f"duplicate fact {f}")
            seen.add(f.key)
            for v in (f.x, f.y, *f.z):
                if not 0 <= v < self.d:
                    raise QueryError(f"fact {f} references variable outside d={self.d}")

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    def __getitem__(self, i):
        return self.facts[i]

    def replace(self, facts) -> "FactSet":
        return FactSet(list(facts), self.alpha, self.d)


def sort_facts(fs: FactSet) -> FactSet:
    """Ascending strength; ties: dependence first, then x, y and the sorted conditioning set."""
    return fs.replace(sorted(fs.facts, key=CiFact.sort_key))


# ---------------------------------------------------------------- TSV


_TSV_HEADER = "kind\tx\ty\tz\tp\tstrength"


def write_facts_tsv(fs: FactSet) -> str:
    lines = [f"# alpha={fs.alpha!r} d={fs.d}", _TSV_HEADER]
    for f in fs.facts:
        z = ",".join(map(str, sorted(f.z)))
        lines.append(f"{f.kind.value}\t{f.x}\t{f.y}\t{z}\t{f.p!r}\t{f.strength!r}")
    return "\n".join(lines) + "\n"


def read_facts_tsv(text: str, alpha: float | None = None, d: int | None = None) -> FactSet:
    meta = {}
    facts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
            continue
        if line.strip() == _TSV_HEADER:
            continue
        cols = line.split("\t")
        if len(cols) != 6:
            raise FormatError(f"expected 6 columns, got {len(cols)}", lineno)
        try:
            kind = Kind(cols[0])
            z = frozenset(int(v) for v in cols[3].split(",") if v != "")
            facts.append(CiFact(kind, int(cols[1]), int(cols[2]), z, float(cols[4]), float(cols[5])))
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
    alpha = alpha if alpha is not None else float(meta.get("alpha", 0.05))
    if d is None:
        d = int(meta["d"]) if "d" in meta else 1 + max((max(f.x, f.y, *f.z) for f in facts), default=2)
    return FactSet(facts, alpha, d)


# ---------------------------------------------------------------- MPC sourcing


@dataclass
class MpcResult:
    facts: FactSet
    cpdag: Pdag
    skeleton: frozenset
    sepsets: dict
    collider_votes: dict
    levels: int


def mpc_source_facts(tester: Tester, alpha: float = 0.05, max_cond: int | None = None) -> MpcResult:
    """Order-independent PC skeleton search plus majority-rule v-structures.

    Every test actually performed is returned as a weighted fact.  At each level
    every adjacent pair is tested against all size-l subsets of either current
    neighbourhood (no early stop within a level) and removals are applied only
    when the level ends.
    """
    d = tester.d
    if d < 3:
        raise UnsupportedDimensionError(f"fact sourcing needs d >= 3, got {d}")
    if not 0.0 < alpha < 1.0:
        raise QueryError("alpha must lie in (0, 1)")
    max_cond = d - 2 if max_cond is None else min(max_cond, d - 2)

    performed: dict = {}

    def test(x, y, z):
        key = canonical(x, y, z, d)
        if key not in performed:
            performed[key] = tester(*key).p
        return performed[key]

    adj = {v: set(range(d)) - {v} for v in range(d)}
    sepsets: dict = {}
    level = 0
    while level <= max_cond:
        snapshot = {v: frozenset(n) for v, n in adj.items()}
        removals = set()
        tested_any = False
        for x, y in itertools.combinations(range(d), 2):
            if y not in snapshot[x]:
                continue
            cands = set()
            for a, b in ((x, y), (y, x)):
                pool = sorted(snapshot[a] - {b})
                cands.update(itertools.combinations(pool, level))
            for z in sorted(cands):
                tested_any = True
                if test(x, y, z) >= alpha:
                    removals.add((x, y))
                    sepsets.setdefault((x, y), set()).add(frozenset(z))
        for x, y in removals:
            adj[x].discard(y)
            adj[y].discard(x)
        if not tested_any:
            break
        level += 1

    skeleton = frozenset((x, y) for x in range(d) for y in adj[x] if x < y)

    votes = {}
    arrowheads = set()
    for c in range(d):
        for a, b in itertools.combinations(sorted(adj[c]), 2):
            if b in adj[a]:
                continue
            cands = set()
            for u, w in ((a, b), (b, a)):
                pool = sorted(adj[u] - {w})
                for k in range(0, min(len(pool), max_cond) + 1):
                    cands.update(itertools.combinations(pool, k))
            seps = [frozenset(z) for z in sorted(cands) if test(a, b, z) >= alpha]
            with_c = sum(1 for s in seps if c in s)
            without = len(seps) - with_c
            if not seps or with_c == without:
                verdict = "ambiguous"
            elif with_c < without:
                verdict = "collider"
                arrowheads.add((a, c))
                arrowheads.add((b, c))
            else:
                verdict = "noncollider"
            votes[(a, c, b)] = (verdict, with_c, without)

    directed = {(u, v) for u, v in arrowheads if (v, u) not in arrowheads}
    undirected = {(x, y) for x, y in skeleton if (x, y) not in directed and (y, x) not in directed}
    cpdag = meek_closure(Pdag(d, frozenset(directed), frozenset(undirected)))

    facts = [make_fact(x, y, z, p, alpha, d) for (x, y, z), p in performed.items()]
    facts.sort(key=lambda f: (f.x, f.y, len(f.z), tuple(sorted(f.z))))
    return MpcResult(FactSet(facts, alpha, d), cpdag, skeleton, sepsets, votes, level)


def n_possible_tests(d: int) -> int:
    """Number of distinct (x, y, Z) triples: d(d-1)/2 * 2^(d-2)."""
    return d * (d - 1) // 2 * 2 ** (d - 2)


def from_results(results: Sequence, alpha: float, d: int) -> FactSet:
    return FactSet([make_fact(r.x, r.y, r.z, r.p, alpha, d) for r in results], alpha, d)
