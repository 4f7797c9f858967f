"""DAG / PDAG types, path machinery, d-separation and Markov equivalence."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import CappedError, FormatError, NotExtendableError, QueryError

Edge = tuple[int, int]


def _pair(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def is_acyclic(d: int, edges: Iterable[Edge]) -> bool:
    """Kahn's algorithm; True iff the directed edge set has no cycle."""
    indeg = [0] * d
    out: list[list[int]] = [[] for _ in range(d)]
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    todo = [v for v in range(d) if indeg[v] == 0]
    seen = 0
    while todo:
        v = todo.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                todo.append(w)
    return seen == d


def _check_vertices(d: int, edges: Iterable[Edge]) -> None:
    for a, b in edges:
        if not (0 <= a < d and 0 <= b < d):
            raise QueryError(f"edge {(a, b)} out of range for d={d}")
        if a == b:
            raise QueryError(f"self-loop on {a}")


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over variables ``0..d-1``."""

    d: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        _check_vertices(self.d, edges)
        for a, b in edges:
            if (b, a) in edges:
                raise QueryError(f"both orientations of {_pair(a, b)} present")
        if not is_acyclic(self.d, edges):
            raise QueryError("edge set contains a directed cycle")

    @classmethod
    def from_adj(cls, adj) -> "Dag":
        adj = np.asarray(adj)
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], frozenset(zip(rows.tolist(), cols.tolist())))

    @cached_property
    def adj(self) -> np.ndarray:
        m = np.zeros((self.d, self.d), dtype=np.uint8)
        for a, b in self.edges:
            m[a, b] = 1
        m.setflags(write=False)
        return m

    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    def parents(self, v: int) -> frozenset:
        return frozenset(a for a, b in self.edges if b == v)

    def children(self, v: int) -> frozenset:
        return frozenset(b for a, b in self.edges if a == v)

    def skeleton(self) -> frozenset:
        return frozenset(_pair(a, b) for a, b in self.edges)

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def v_structures(self) -> frozenset:
        """Unshielded colliders as triples (a, c, b) with a < b and a -> c <- b."""
        out = set()
        for c in range(self.d):
            pa = sorted(self.parents(c))
            for a, b in itertools.combinations(pa, 2):
                if not self.adjacent(a, b):
                    out.add((a, c, b))
        return frozenset(out)

    def topological_order(self) -> list[int]:
        indeg = [0] * self.d
        for _, b in self.edges:
            indeg[b] += 1
        order, todo = [], sorted(v for v in range(self.d) if indeg[v] == 0)
        while todo:
            v = todo.pop(0)
            order.append(v)
            for w in sorted(self.children(v)):
                indeg[w] -= 1
                if indeg[w] == 0:
                    todo.append(w)
            todo.sort()
        return order

    def to_pdag(self) -> "Pdag":
        return Pdag(self.d, self.edges, frozenset())

    def __lt__(self, other: "Dag") -> bool:
        return (self.d, self.sorted_edges()) < (other.d, other.sorted_edges())


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph; undirected edges are stored as ``(min, max)`` pairs."""

    d: int
    directed: frozenset = field(default_factory=frozenset)
    undirected: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        directed = frozenset((int(a), int(b)) for a, b in self.directed)
        undirected = frozenset(_pair(int(a), int(b)) for a, b in self.undirected)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)
        _check_vertices(self.d, directed | undirected)
        dpairs = [_pair(a, b) for a, b in directed]
        if len(set(dpairs)) != len(dpairs):
            raise QueryError("a pair is directed both ways")
        if set(dpairs) & undirected:
            raise QueryError("a pair is both directed and undirected")

    def skeleton(self) -> frozenset:
        return frozenset(_pair(a, b) for a, b in self.directed) | self.undirected

    def adjacent(self, a: int, b: int) -> bool:
        return _pair(a, b) in self.skeleton()

    def is_dag(self) -> bool:
        return not self.undirected and is_acyclic(self.d, self.directed)

    def to_dag(self) -> Dag:
        if self.undirected:
            raise QueryError("graph has undirected edges")
        return Dag(self.d, self.directed)

    @property
    def n_edges(self) -> int:
        return len(self.directed) + len(self.undirected)


# ---------------------------------------------------------------- reachability


def descendants(g: Dag, v: int) -> frozenset:
    """All nodes reachable from ``v`` by a directed path (excluding ``v``)."""
    out, todo = set(), [v]
    while todo:
        u = todo.pop()
        for w in g.children(u):
            if w not in out:
                out.add(w)
                todo.append(w)
    out.discard(v)
    return frozenset(out)


def ancestors(g: Dag, v: int) -> frozenset:
    out, todo = set(), [v]
    while todo:
        u = todo.pop()
        for w in g.parents(u):
            if w not in out:
                out.add(w)
                todo.append(w)
    out.discard(v)
    return frozenset(out)


def _check_query(d: int, x: int, y: int, z: Iterable[int]) -> frozenset:
    z = frozenset(int(v) for v in z)
    if x == y:
        raise QueryError("x and y must differ")
    for v in (x, y, *z):
        if not 0 <= v < d:
            raise QueryError(f"variable {v} out of range for d={d}")
    if x in z or y in z:
        raise QueryError("conditioning set must exclude x and y")
    return z


def zmask(d: int, z: Iterable[int]) -> np.ndarray:
    m = np.zeros(d, dtype=np.bool_)
    for v in z:
        m[v] = True
    return m


def d_separated(g: Dag, x: int, y: int, z: Iterable[int] = ()) -> bool:
    """True iff every x-y path is blocked by ``z`` (Bayes-ball reachability)."""
    z = _check_query(g.d, x, y, z)
    return not kernels.dconnected(np.ascontiguousarray(g.adj), x, y, zmask(g.d, z))


# ---------------------------------------------------------------- paths


def _skeleton_nbrs(g) -> tuple[int, list[list[int]]]:
    if isinstance(g, (Dag, Pdag)):
        d, skel = g.d, g.skeleton()
    else:
        d, pairs = g
        skel = {_pair(a, b) for a, b in pairs}
    nbrs: list[list[int]] = [[] for _ in range(d)]
    for a, b in skel:
        nbrs[a].append(b)
        nbrs[b].append(a)
    for n in nbrs:
        n.sort()
    return d, nbrs


def iter_paths(g, x: int, y: int) -> Iterator[tuple[int, ...]]:
    """Simple x-y paths in the skeleton, lexicographic order.

    ``g`` is a Dag, a Pdag, or a ``(d, pairs)`` tuple describing a skeleton.
    """
    d, nbrs = _skeleton_nbrs(g)
    if x == y:
        raise QueryError("x and y must differ")
    path = [x]
    on_path = [False] * d
    on_path[x] = True

    def walk(u):
        for w in nbrs[u]:
            if on_path[w]:
                continue
            path.append(w)
            if w == y:
                yield tuple(path)
            else:
                on_path[w] = True
                yield from walk(w)
                on_path[w] = False
            path.pop()

    yield from walk(x)


def enumerate_paths(g, x: int, y: int) -> list[tuple[int, ...]]:
    return list(iter_paths(g, x, y))


def path_is_active(g: Dag, path: Sequence[int], z: Iterable[int]) -> bool:
    """Literal activity test of a path given ``z``: colliders need themselves or a
    descendant in ``z``; every other inner node must stay outside ``z``."""
    z = frozenset(z)
    for i in range(1, len(path) - 1):
        prev, v, nxt = path[i - 1], path[i], path[i + 1]
        if (prev, v) in g.edges and (nxt, v) in g.edges:
            if v not in z and not (descendants(g, v) & z):
                return False
        elif v in z:
            return False
    return True


def d_separated_by_paths(g: Dag, x: int, y: int, z: Iterable[int] = ()) -> bool:
    """Reference d-separation: enumerate every simple path and test it."""
    z = _check_query(g.d, x, y, z)
    return not any(path_is_active(g, p, z) for p in iter_paths(g, x, y))


# ---------------------------------------------------------------- DAG space


def all_dags(d: int) -> Iterator[Dag]:
    """Every DAG on ``d`` labelled nodes, by brute force over pair states."""
    pairs = list(itertools.combinations(range(d), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.append((a, b))
            elif s == 2:
                edges.append((b, a))
        if is_acyclic(d, edges):
            yield Dag(d, frozenset(edges))


# ---------------------------------------------------------------- equivalence


def _meek_closure(d: int, directed: set, undirected: set) -> None:
    """Apply the four Meek orientation rules in place until nothing changes."""

    def adj(a, b):
        return (a, b) in directed or (b, a) in directed or _pair(a, b) in undirected

    def orient(a, b):
        undirected.discard(_pair(a, b))
        directed.add((a, b))

    changed = True
    while changed:
        changed = False
        for a, b in sorted(undirected):
            for u, v in ((a, b), (b, a)):
                if _pair(u, v) not in undirected:
                    break
                others = [w for w in range(d) if w not in (u, v)]
                # R1: w -> u - v, w and v non-adjacent
                r1 = any((w, u) in directed and not adj(w, v) for w in others)
                # R2: u -> w -> v
                r2 = any((u, w) in directed and (w, v) in directed for w in others)
                # R3: u - w1 -> v, u - w2 -> v, w1 and w2 non-adjacent
                mids = [w for w in others if _pair(u, w) in undirected and (w, v) in directed]
                r3 = any(not adj(w1, w2) for w1, w2 in itertools.combinations(mids, 2))
                # R4: u - w2, w2 -> w1 -> v, u adjacent to w1, w2 and v non-adjacent
                r4 = any(
                    _pair(u, w2) in undirected
                    and (w2, w1) in directed
                    and (w1, v) in directed
                    and adj(u, w1)
                    and not adj(w2, v)
                    for w1 in others
                    for w2 in others
                    if w1 != w2
                )
                if r1 or r2 or r3 or r4:
                    orient(u, v)
                    changed = True
                    break


def meek_closure(p: Pdag) -> Pdag:
    directed, undirected = set(p.directed), set(p.undirected)
    _meek_closure(p.d, directed, undirected)
    return Pdag(p.d, frozenset(directed), frozenset(undirected))


def cpdag_of(g: Dag) -> Pdag:
    """Skeleton plus v-structures, closed under the Meek rules."""
    directed = set()
    for a, c, b in g.v_structures():
        directed.add((a, c))
        directed.add((b, c))
    undirected = {_pair(a, b) for a, b in g.edges if (a, b) not in directed}
    _meek_closure(g.d, directed, undirected)
    return Pdag(g.d, frozenset(directed), frozenset(undirected))


def mec_members(c: Pdag, cap: int = 10_000) -> list[Dag]:
    """All DAGs orienting ``c``'s undirected edges without new v-structures or cycles."""
    d = c.d
    skel = c.skeleton()
    und = sorted(c.undirected)
    if not is_acyclic(d, c.directed):
        raise NotExtendableError("directed part is cyclic")
    parents: list[set] = [set() for _ in range(d)]
    for a, b in c.directed:
        parents[b].add(a)

    def shielded(a, b):
        return _pair(a, b) in skel

    def creates_collider(u, v):
        return any(not shielded(w, u) for w in parents[v] if w != u)

    out: list[Dag] = []
    edges = set(c.directed)

    def rec(k):
        if k == len(und):
            if is_acyclic(d, edges):
                out.append(Dag(d, frozenset(edges)))
                if len(out) > cap:
                    raise CappedError(f"more than {cap} MEC members", partial=out[:cap])
            return
        a, b = und[k]
        for u, v in ((a, b), (b, a)):
            if creates_collider(u, v):
                continue
            edges.add((u, v))
            parents[v].add(u)
            if is_acyclic(d, edges):
                rec(k + 1)
            parents[v].discard(u)
            edges.discard((u, v))

    rec(0)
    if not out:
        raise NotExtendableError("no consistent DAG extension")
    return sorted(out)


def mec_size(c: Pdag, cap: int = 10_000) -> int:
    return len(mec_members(c, cap))


# ---------------------------------------------------------------- edge-list text


def write_edgelist(g, names: Sequence[str] | None = None) -> str:
    """Serialise a Dag or Pdag: ``vars:`` header, then ``a -> b`` / ``a -- b`` lines."""
    names = list(names) if names is not None else [f"x{i}" for i in range(g.d)]
    if len(names) != g.d:
        raise QueryError("one name per variable required")
    if isinstance(g, Dag):
        directed, undirected = g.edges, frozenset()
    else:
        directed, undirected = g.directed, g.undirected
    lines = ["vars: " + ",".join(names)]
    lines += [f"{names[a]} -> {names[b]}" for a, b in sorted(directed)]
    lines += [f"{names[a]} -- {names[b]}" for a, b in sorted(undirected)]
    return "\n".join(lines) + "\n"


def read_edgelist(text: str) -> tuple[list[str], Pdag]:
    """Parse the edge-list format; returns (names, Pdag).  Use ``Pdag.to_dag`` for DAGs."""
    names: list[str] | None = None
    directed, undirected = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            if names is not None:
                raise FormatError("duplicate vars header", lineno)
            names = [n.strip() for n in line[5:].split(",") if n.strip()]
            if len(set(names)) != len(names):
                raise FormatError("duplicate variable name", lineno)
            continue
        if names is None:
            raise FormatError("edge before vars header", lineno)
        for arrow, bucket in (("->", directed), ("--", undirected)):
            if arrow in line:
                a, _, b = (s.strip() for s in line.partition(arrow))
                try:
                    ia, ib = names.index(a), names.index(b)
                except ValueError:
                    raise FormatError(f"unknown variable in {line!r}", lineno) from None
                bucket.add((ia, ib))
                break
        else:
            raise FormatError(f"cannot parse edge {line!r}", lineno)
    if names is None:
        raise FormatError("missing vars header")
    try:
        return names, Pdag(len(names), frozenset(directed), frozenset(undirected))
    except QueryError as exc:
        raise FormatError(str(exc)) from None
