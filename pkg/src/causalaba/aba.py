"""Assumption-based argumentation at desk scale, plus the causal frameworks.

Frameworks may be non-flat (assumptions can appear in rule heads), so every
extension is required to be closed.  Two enumerators are provided: a naive
one over all assumption subsets (every semantics, bounded size) and a
propagating in/out search for stable extensions that scales to the causal
frameworks used as a ground truth for the solver.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, FormatError, QueryError
from .graph import Dag, enumerate_paths

SEMANTICS = ("conflict-free", "admissible", "complete", "grounded", "preferred", "stable")
DEFAULT_BOUND = 24
DEFAULT_D_BOUND = 4


@dataclass(frozen=True)
class AbaFramework:
    """Assumptions, a contrary map and rules ``(head, body)``.

    Parameters
    ----------
    assumptions : tuple of str
    contrary : dict
        Maps each assumption to its contrary atom; contraries are distinct.
    rules : tuple of (str, frozenset)
    """

    assumptions: tuple
    contrary: dict
    rules: tuple

    def __post_init__(self):
        assumptions = tuple(dict.fromkeys(self.assumptions))
        object.__setattr__(self, "assumptions", assumptions)
        rules = tuple(dict.fromkeys((h, frozenset(b)) for h, b in self.rules))
        object.__setattr__(self, "rules", rules)
        if set(self.contrary) != set(assumptions):
            raise QueryError("each assumption needs exactly one contrary")
        if len(set(self.contrary.values())) != len(assumptions):
            raise QueryError("contraries must be distinct")

    @property
    def atoms(self) -> tuple:
        seen = dict.fromkeys(self.assumptions)
        seen.update(dict.fromkeys(self.contrary.values()))
        for h, b in self.rules:
            seen[h] = None
            seen.update(dict.fromkeys(sorted(b)))
        return tuple(seen)

    @property
    def is_flat(self) -> bool:
        a = set(self.assumptions)
        return not any(h in a for h, _ in self.rules)

    def add_rules(self, rules: Iterable) -> "AbaFramework":
        return AbaFramework(self.assumptions, dict(self.contrary), self.rules + tuple(rules))

    def _index(self) -> "_Compiled":
        cached = self.__dict__.get("_compiled")
        if cached is None:
            cached = _Compiled(self)
            object.__setattr__(self, "_compiled", cached)
        return cached


class _Compiled:
    """Integer view of a framework for fast forward chaining."""

    def __init__(self, f: AbaFramework):
        self.atoms = f.atoms
        self.aid = {a: k for k, a in enumerate(self.atoms)}
        self.n = len(f.assumptions)
        self.asm = np.array([self.aid[a] for a in f.assumptions], dtype=np.int64)
        self.con = np.array([self.aid[f.contrary[a]] for a in f.assumptions], dtype=np.int64)
        self.heads = [self.aid[h] for h, _ in f.rules]
        self.bodies = [[self.aid[b] for b in sorted(body)] for _, body in f.rules]
        self.uses: list[list[int]] = [[] for _ in self.atoms]
        for r, body in enumerate(self.bodies):
            for b in body:
                self.uses[b].append(r)

    def closure(self, members: Iterable[int]) -> np.ndarray:
        """Atoms derivable from the given assumption indices (forward chaining)."""
        derived = np.zeros(len(self.atoms), dtype=bool)
        need = [len(b) for b in self.bodies]
        todo = []
        for k in members:
            a = int(self.asm[k])
            if not derived[a]:
                derived[a] = True
                todo.append(a)
        for r, body in enumerate(self.bodies):
            if not body and not derived[self.heads[r]]:
                derived[self.heads[r]] = True
                todo.append(self.heads[r])
        while todo:
            a = todo.pop()
            for r in self.uses[a]:
                need[r] -= 1
                if need[r] == 0:
                    h = self.heads[r]
                    if not derived[h]:
                        derived[h] = True
                        todo.append(h)
        return derived

    def closure_table(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised closure for a batch of assumption bitmasks: bool ``[batch, atoms]``."""
        derived = np.zeros((masks.size, len(self.atoms)), dtype=bool)
        for k in range(self.n):
            derived[:, self.asm[k]] |= ((masks >> k) & 1).astype(bool)
        changed = True
        while changed:
            changed = False
            for h, body in zip(self.heads, self.bodies):
                new = derived[:, body].all(axis=1) if body else np.ones(masks.size, dtype=bool)
                upd = new & ~derived[:, h]
                if upd.any():
                    derived[:, h] |= upd
                    changed = True
        return derived


def _members(f: AbaFramework, s: Iterable[str]) -> list[int]:
    pos = {a: k for k, a in enumerate(f.assumptions)}
    try:
        return [pos[a] for a in s]
    except KeyError as exc:
        raise QueryError(f"{exc.args[0]!r} is not an assumption") from None


def theory(f: AbaFramework, s: Iterable[str]) -> frozenset:
    """All atoms derivable from ``s``."""
    c = f._index()
    derived = c.closure(_members(f, s))
    return frozenset(a for a, v in zip(c.atoms, derived) if v)


def derives(f: AbaFramework, s: Iterable[str], q: str) -> bool:
    """True iff ``q`` has a derivation tree whose assumption leaves lie in ``s``."""
    return q in theory(f, s)


def attacks(f: AbaFramework, s: Iterable[str], t: Iterable[str]) -> bool:
    th = theory(f, s)
    return any(f.contrary[a] in th for a in t)


def is_closed(f: AbaFramework, s: Iterable[str]) -> bool:
    s = frozenset(s)
    return theory(f, s) & set(f.assumptions) == s


# ---------------------------------------------------------------- naive enumeration


def _subset_tables(f: AbaFramework, chunk: int = 1 << 15):
    """Per-subset closure mask and attacked-assumption mask over all 2^n subsets."""
    c = f._index()
    n = c.n
    total = 1 << n
    cl = np.zeros(total, dtype=np.int64)
    att = np.zeros(total, dtype=np.int64)
    weights = (np.int64(1) << np.arange(n, dtype=np.int64))
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        der = c.closure_table(masks)
        cl[lo:lo + masks.size] = der[:, c.asm].astype(np.int64) @ weights
        att[lo:lo + masks.size] = der[:, c.con].astype(np.int64) @ weights
    return cl, att


def _minimal_support_closures(cl, att, n):
    """For each assumption a, the closures of the minimal sets deriving its contrary."""
    total = cl.size
    idx = np.arange(total, dtype=np.int64)
    out = []
    for a in range(n):
        has = ((att >> a) & 1).astype(bool)
        minimal = has.copy()
        for b in range(n):
            inb = ((idx >> b) & 1).astype(bool)
            sub = idx ^ (np.int64(1) << b)
            minimal &= ~(inb & has[sub])
        out.append(np.unique(cl[minimal]))
    return out


def _sort_ext(f: AbaFramework, masks) -> list[frozenset]:
    names = f.assumptions
    exts = [frozenset(names[k] for k in range(len(names)) if (int(m) >> k) & 1) for m in masks]
    return sorted(exts, key=lambda e: (len(e), sorted(e)))


def semantics_enumerate(f: AbaFramework, sem: str, bound: int = DEFAULT_BOUND,
                        method: str = "naive") -> list[frozenset]:
    """Enumerate the extensions of ``f`` under ``sem``.

    Parameters
    ----------
    sem : {"conflict-free", "admissible", "complete", "grounded", "preferred", "stable"}
    bound : int
        Largest number of assumptions accepted by the naive enumerator.
    method : {"naive", "search"}
        ``"search"`` is only available for stable semantics and has no bound.

    Notes
    -----
    Every extension must be closed.  A set defends ``a`` when it attacks
    every closed set that attacks ``a``; it suffices to check the closures of
    the minimal sets deriving the contrary of ``a``.  Grounded extensions are
    the subset-minimal complete sets (empty when there are none).
    """
    if sem not in SEMANTICS:
        raise QueryError(f"unknown semantics {sem!r}")
    if method == "search":
        if sem != "stable":
            raise QueryError("search enumeration is only available for stable semantics")
        return stable_extensions(f)
    if method != "naive":
        raise QueryError(f"unknown method {method!r}")
    n = len(f.assumptions)
    if n > bound:
        raise CapacityError(f"{n} assumptions exceed the enumeration bound {bound}")
    cl, att = _subset_tables(f)
    idx = np.arange(cl.size, dtype=np.int64)
    full = (1 << n) - 1
    closed = cl == idx
    cf = closed & ((att & idx) == 0)
    if sem == "conflict-free":
        return _sort_ext(f, idx[cf])
    if sem == "stable":
        return _sort_ext(f, idx[cf & ((att | idx) == full)])
    supports = _minimal_support_closures(cl, att, n)
    defended = np.zeros(cl.size, dtype=np.int64)
    for a in range(n):
        ok = np.ones(cl.size, dtype=bool)
        for cmask in supports[a]:
            ok &= (att & cmask) != 0
        defended |= ok.astype(np.int64) << a
    adm = cf & ((defended & idx) == idx)
    if sem == "admissible":
        return _sort_ext(f, idx[adm])
    if sem == "preferred":
        cand = idx[adm]
        keep = [m for m in cand if not any((m & o) == m and o != m for o in cand)]
        return _sort_ext(f, keep)
    com = adm & ((defended & ~idx) == 0)
    cand = idx[com]
    if sem == "complete":
        return _sort_ext(f, cand)
    keep = [m for m in cand if not any((o & m) == o and o != m for o in cand)]
    return _sort_ext(f, keep)


# ---------------------------------------------------------------- stable search


def stable_extensions(f: AbaFramework) -> list[frozenset]:
    """Stable extensions by branching on assumptions with in/out propagation.

    With ``L`` the theory of the IN assumptions and ``U`` the theory of all
    assumptions not OUT: members of ``L`` must be IN, assumptions whose
    contrary is in ``L`` must be OUT, and assumptions whose contrary is not in
    ``U`` cannot be attacked and must be IN.  At a leaf ``L = U`` and the three
    rules are exactly closedness, conflict-freeness and stability.
    """
    c = f._index()
    n = c.n
    found = []
    UND, IN, OUT = 0, 1, 2

    def prop(state):
        while True:
            ins = [k for k in range(n) if state[k] == IN]
            notout = [k for k in range(n) if state[k] != OUT]
            low = c.closure(ins)
            up = c.closure(notout)
            changed = False
            for k in range(n):
                s = state[k]
                if low[c.asm[k]]:
                    if s == OUT:
                        return False
                    if s == UND:
                        state[k] = s = IN
                        changed = True
                if low[c.con[k]]:
                    if s == IN:
                        return False
                    if s == UND:
                        state[k] = s = OUT
                        changed = True
                if not up[c.con[k]]:
                    if s == OUT:
                        return False
                    if s == UND:
                        state[k] = IN
                        changed = True
            if not changed:
                return True

    stack = [[UND] * n]
    while stack:
        state = stack.pop()
        if not prop(state):
            continue
        try:
            k = state.index(UND)
        except ValueError:
            found.append(sum(1 << j for j in range(n) if state[j] == IN))
            continue
        for v in (OUT, IN):
            child = list(state)
            child[k] = v
            stack.append(child)
    return _sort_ext(f, found)


# ---------------------------------------------------------------- SETAF view


@dataclass(frozen=True)
class Setaf:
    arguments: frozenset
    attacks: frozenset  # of (frozenset attackers, target)


def to_setaf(f: AbaFramework, bound: int = DEFAULT_BOUND) -> Setaf:
    """Collective attacks from the minimal assumption sets deriving each contrary."""
    n = len(f.assumptions)
    if n > bound:
        raise CapacityError(f"{n} assumptions exceed the enumeration bound {bound}")
    _, att = _subset_tables(f)
    idx = np.arange(att.size, dtype=np.int64)
    names = f.assumptions
    out = set()
    for a in range(n):
        has = ((att >> a) & 1).astype(bool)
        minimal = has.copy()
        for b in range(n):
            inb = ((idx >> b) & 1).astype(bool)
            minimal &= ~(inb & has[idx ^ (np.int64(1) << b)])
        for m in idx[minimal]:
            if m == 0:
                continue
            out.add((frozenset(names[k] for k in range(n) if (int(m) >> k) & 1), names[a]))
    return Setaf(frozenset(names), frozenset(out))


# ---------------------------------------------------------------- text format


def dump(f: AbaFramework) -> str:
    """One rule per line as ``head <- a1,a2`` and one ``contrary(a)=c`` line per assumption."""
    lines = [f"contrary({a})={f.contrary[a]}" for a in f.assumptions]
    lines += [f"{h} <- {','.join(sorted(b))}".rstrip() for h, b in f.rules]
    return "\n".join(lines) + "\n"


_CONTRARY = re.compile(r"^contrary\(([^()\s]+)\)\s*=\s*(\S+)$")
_RULE = re.compile(r"^(\S+)\s*<-\s*(.*)$")


def parse(text: str) -> AbaFramework:
    assumptions, contrary, rules = [], {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _CONTRARY.match(line)
        if m:
            a, c = m.groups()
            if a in contrary:
                raise FormatError(f"second contrary for {a}", lineno)
            assumptions.append(a)
            contrary[a] = c
            continue
        m = _RULE.match(line)
        if m:
            head, body = m.groups()
            atoms = [b.strip() for b in body.split(",") if b.strip()]
            rules.append((head, frozenset(atoms)))
            continue
        raise FormatError(f"cannot parse {line!r}", lineno, 1)
    return AbaFramework(tuple(assumptions), contrary, tuple(rules))


# ---------------------------------------------------------------- causal frameworks


def arr(i: int, j: int) -> str:
    return f"arr_{i}_{j}"


def noe(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"noe_{i}_{j}"


def edge_atom(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"e_{i}_{j}"


def dpath(i: int, j: int) -> str:
    return f"dpath_{i}_{j}"


def _zs(z) -> str:
    return ".".join(map(str, sorted(z)))


def ind(x: int, y: int, z: Iterable[int] = ()) -> str:
    x, y = min(x, y), max(x, y)
    return f"ind_{x}_{y}__{_zs(z)}"


def bp(path: Sequence[int], z: Iterable[int]) -> str:
    return f"bp_{'.'.join(map(str, path))}__{_zs(z)}"


def ap(path: Sequence[int], z: Iterable[int]) -> str:
    return f"ap_{'.'.join(map(str, path))}__{_zs(z)}"


def con(a: str) -> str:
    return f"c_{a}"


def simple_cycles(d: int) -> list[tuple[int, ...]]:
    """Directed simple cycles of length >= 3 on the complete digraph, one per rotation class."""
    out = []
    for k in range(3, d + 1):
        for nodes in itertools.combinations(range(d), k):
            first, rest = nodes[0], nodes[1:]
            for perm in itertools.permutations(rest):
                out.append((first, *perm))
    return out


def collider_trees(d: int, x: int, y: int, z: Iterable[int], bound: int = DEFAULT_D_BOUND):
    """All Z-active x-y collider-trees over the complete graph on ``d`` nodes.

    Each tree is returned as ``(path, edges)``: the underlying node sequence
    and the frozenset of directed edges (path edges plus one directed branch
    from each collider outside ``Z`` to a member of ``Z``).  A tree is kept
    only when its edges are acyclic and use each pair in one direction.
    """
    if d > bound:
        raise CapacityError(f"collider-tree enumeration is bounded at d={bound}")
    z = frozenset(z)
    if x == y or x in z or y in z:
        raise QueryError("need x != y and x, y outside Z")
    out = []
    complete = (d, [(i, j) for i in range(d) for j in range(i + 1, d)])
    for path in enumerate_paths(complete, x, y):
        inner = path[1:-1]
        for orient in itertools.product((True, False), repeat=len(path) - 1):
            pedges = [(path[k], path[k + 1]) if o else (path[k + 1], path[k]) for k, o in enumerate(orient)]
            colliders, blocked = [], False
            for k, v in enumerate(inner, 1):
                is_col = orient[k - 1] and not orient[k]
                if is_col:
                    if v not in z:
                        colliders.append(v)
                elif v in z:
                    blocked = True
                    break
            if blocked:
                continue
            options = [_branches(d, c, z) for c in colliders]
            for choice in itertools.product(*options):
                edges = set(pedges)
                for br in choice:
                    edges.update(br)
                if _consistent(d, edges):
                    out.append((tuple(path), frozenset(edges)))
    return sorted(set(out), key=lambda t: (t[0], sorted(t[1])))


def _branches(d: int, c: int, z: frozenset) -> list[tuple]:
    """Directed simple paths from ``c`` to a member of ``z`` with no earlier member of ``z``."""
    out = []

    def walk(node, seen, edges):
        for nxt in range(d):
            if nxt in seen:
                continue
            e = edges + ((node, nxt),)
            if nxt in z:
                out.append(e)
            else:
                walk(nxt, seen | {nxt}, e)

    walk(c, {c}, ())
    return out


def _consistent(d: int, edges) -> bool:
    from .graph import is_acyclic

    return all((b, a) not in edges for a, b in edges) and is_acyclic(d, edges)


def build_dag_abaf(d: int) -> AbaFramework:
    """Arrow / no-edge assumptions with choice and cycle-attack rules."""
    if d < 2:
        raise QueryError("need at least two variables")
    assumptions = []
    for i, j in itertools.combinations(range(d), 2):
        assumptions += [arr(i, j), arr(j, i), noe(i, j)]
    contrary = {a: con(a) for a in assumptions}
    rules = []
    for i, j in itertools.combinations(range(d), 2):
        trio = (arr(i, j), arr(j, i), noe(i, j))
        for a in trio:
            for b in trio:
                if a != b:
                    rules.append((con(a), frozenset([b])))
    for cyc in simple_cycles(d):
        arrows = [arr(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
        for a in arrows:
            rules.append((con(a), frozenset(arrows)))
    return AbaFramework(tuple(assumptions), contrary, tuple(rules))


def _graph_rules(d: int) -> list:
    rules = []
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            rules.append((dpath(i, j), frozenset([arr(i, j)])))
            rules.append((edge_atom(i, j), frozenset([arr(i, j)])))
            for k in range(d):
                if k not in (i, j):
                    rules.append((dpath(i, k), frozenset([dpath(i, j), arr(j, k)])))
    for i, j in itertools.combinations(range(d), 2):
        rules.append((con(noe(i, j)), frozenset([edge_atom(i, j)])))
    return rules


def _queries(d: int):
    for x, y in itertools.combinations(range(d), 2):
        rest = [v for v in range(d) if v not in (x, y)]
        for k in range(len(rest) + 1):
            for zz in itertools.combinations(rest, k):
                yield x, y, frozenset(zz)


def build_ds_abaf(d: int, bound: int = DEFAULT_D_BOUND) -> AbaFramework:
    """The d-separation framework: arrows, independence assumptions and activity rules."""
    if d > bound:
        raise CapacityError(f"causal framework construction is bounded at d={bound}")
    base = build_dag_abaf(d)
    assumptions = list(base.assumptions)
    rules = list(base.rules) + _graph_rules(d)
    for x, y, z in _queries(d):
        a = ind(x, y, z)
        assumptions.append(a)
        for _, edges in collider_trees(d, x, y, z, bound):
            rules.append((con(a), frozenset(arr(u, v) for u, v in edges)))
    contrary = {a: con(a) for a in assumptions}
    return AbaFramework(tuple(assumptions), contrary, tuple(rules))


def build_causal_abaf(d: int, facts: Iterable = (), bound: int = DEFAULT_D_BOUND) -> AbaFramework:
    """The causal framework updated with facts.

    Independence, arrow and no-edge facts become empty-body rules.  Each
    dependence fact adds the contrary of its independence assumption as a
    fact together with one blocked-path assumption per x-y path, the rule
    deriving the independence from all of them, and one active-path rule per
    active collider-tree.
    """
    from .facts import Kind

    f = build_ds_abaf(d, bound)
    assumptions = list(f.assumptions)
    contrary = dict(f.contrary)
    rules = list(f.rules)
    complete = (d, [(i, j) for i in range(d) for j in range(i + 1, d)])
    for fact in facts:
        for v in (fact.x, fact.y, *fact.z):
            if not 0 <= v < d:
                raise QueryError(f"fact {fact} references variable outside d={d}")
        if fact.kind.value == Kind.INDEP.value:
            rules.append((ind(fact.x, fact.y, fact.z), frozenset()))
        elif fact.kind.value == Kind.ARROW.value:
            rules.append((arr(fact.x, fact.y), frozenset()))
        elif fact.kind.value == Kind.NOEDGE.value:
            rules.append((noe(fact.x, fact.y), frozenset()))
        else:
            x, y, z = fact.x, fact.y, fact.z
            rules.append((con(ind(x, y, z)), frozenset()))
            paths = enumerate_paths(complete, x, y)
            for p in paths:
                if bp(p, z) not in contrary:
                    assumptions.append(bp(p, z))
                    contrary[bp(p, z)] = ap(p, z)
            rules.append((ind(x, y, z), frozenset(bp(p, z) for p in paths)))
            for p, edges in collider_trees(d, x, y, z, bound):
                rules.append((ap(p, z), frozenset(arr(u, v) for u, v in edges)))
    return AbaFramework(tuple(assumptions), contrary, tuple(rules))


def project(ext: Iterable[str], d: int) -> Dag:
    """The graph of an extension: its accepted arrow assumptions."""
    pat = re.compile(r"^arr_(\d+)_(\d+)$")
    edges = set()
    for a in ext:
        m = pat.match(a)
        if m:
            edges.add((int(m.group(1)), int(m.group(2))))
    return Dag(d, frozenset(edges))


def independences(ext: Iterable[str]) -> frozenset:
    """Independence assumptions of an extension as ``(x, y, Z)`` triples."""
    pat = re.compile(r"^ind_(\d+)_(\d+)__([\d.]*)$")
    out = set()
    for a in ext:
        m = pat.match(a)
        if m:
            z = frozenset(int(v) for v in m.group(3).split(".") if v)
            out.add((int(m.group(1)), int(m.group(2)), z))
    return frozenset(out)
