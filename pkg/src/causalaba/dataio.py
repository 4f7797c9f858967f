"""Discrete Bayesian networks (BIF subset), samplers and CSV files."""

from __future__ import annotations

import csv
import io
import itertools
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .citest import Dataset
from .errors import BifError, FormatError, QueryError
from .graph import Dag, is_acyclic

ROW_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple
    properties: tuple = ()


@dataclass
class BayesNet:
    """Discrete network: variables, structure and CPTs.

    ``cpts[name]`` is ``(parents, table)`` where ``table`` has shape
    ``(*parent_state_counts, n_states)`` in the declared parent order.
    """

    name: str
    variables: list
    cpts: dict
    properties: list = field(default_factory=list)

    def __post_init__(self):
        self._validate()

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def index(self) -> dict:
        return {v.name: k for k, v in enumerate(self.variables)}

    @property
    def structure(self) -> Dag:
        idx = self.index
        edges = {(idx[p], idx[c]) for c, (parents, _) in self.cpts.items() for p in parents}
        return Dag(len(self.variables), frozenset(edges))

    def _validate(self):
        idx = self.index
        if len(idx) != len(self.variables):
            raise BifError("duplicate variable name")
        for v in self.variables:
            if v.name not in self.cpts:
                raise BifError(f"no probability block for {v.name}")
        for child, (parents, table) in self.cpts.items():
            if child not in idx:
                raise BifError(f"probability block for undeclared variable {child}")
            for p in parents:
                if p not in idx:
                    raise BifError(f"undeclared parent {p} of {child}")
            shape = tuple(len(self.variables[idx[p]].states) for p in parents)
            shape += (len(self.variables[idx[child]].states),)
            if table.shape != shape:
                raise BifError(f"table for {child} has shape {table.shape}, expected {shape}")
            if np.any(table < 0) or np.any(np.abs(table.sum(axis=-1) - 1) > ROW_TOL):
                raise BifError(f"a row of the table for {child} does not sum to 1")
        edges = [(idx[p], idx[c]) for c, (ps, _) in self.cpts.items() for p in ps]
        if not is_acyclic(len(idx), edges):
            raise BifError("network structure is cyclic")

    def __eq__(self, other):
        if not isinstance(other, BayesNet):
            return NotImplemented
        if self.name != other.name or self.variables != other.variables:
            return False
        if set(self.cpts) != set(other.cpts):
            return False
        for k, (ps, t) in self.cpts.items():
            ops, ot = other.cpts[k]
            if tuple(ps) != tuple(ops) or t.shape != ot.shape or not np.allclose(t, ot, rtol=0, atol=1e-12):
                return False
        return True


# ---------------------------------------------------------------- BIF lexer / parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|%[^\n]*|/\*.*?\*/)
  | (?P<num>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?(?![A-Za-z_\-.]))
  | (?P<word>[A-Za-z0-9_\-.]+)
  | (?P<punct>[{}()\[\];,|=])
""", re.VERBOSE | re.DOTALL)


def _tokens(text: str):
    pos, line, col = 0, 1, 1
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise BifError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind in ("num", "word", "punct"):
            out.append((kind, val, line, col))
        nl = val.count("\n")
        if nl:
            line += nl
            col = len(val) - val.rfind("\n")
        else:
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise BifError(msg, tok[2], tok[3])

    def expect(self, val):
        t = self.next()
        if t[1] != val:
            self.fail(f"expected {val!r}, found {t[1] or 'end of input'!r}", t)
        return t

    def name(self):
        t = self.next()
        if t[0] not in ("word", "num"):
            self.fail(f"expected a name, found {t[1] or 'end of input'!r}", t)
        return t[1]

    def number(self):
        t = self.next()
        if t[0] != "num":
            self.fail(f"expected a number, found {t[1] or 'end of input'!r}", t)
        return float(t[1])

    def property_line(self):
        # raw text up to the terminating semicolon, kept opaque
        parts = []
        while self.peek()[1] != ";":
            if self.peek()[0] == "eof":
                self.fail("unterminated property")
            parts.append(self.next()[1])
        self.expect(";")
        return " ".join(parts)

    def parse(self) -> BayesNet:
        net_name, net_props, variables, blocks = "unnamed", [], [], []
        while self.peek()[0] != "eof":
            kw = self.next()
            if kw[1] == "network":
                net_name = self.name()
                self.expect("{")
                while self.peek()[1] != "}":
                    if self.next()[1] != "property":
                        self.fail("only property lines are allowed in a network block", self.toks[self.i - 1])
                    net_props.append(self.property_line())
                self.expect("}")
            elif kw[1] == "variable":
                variables.append(self.variable())
            elif kw[1] == "probability":
                blocks.append(self.probability())
            else:
                self.fail(f"unexpected {kw[1]!r}", kw)
        return self.assemble(net_name, net_props, variables, blocks)

    def variable(self):
        name = self.name()
        self.expect("{")
        states, props = None, []
        while self.peek()[1] != "}":
            t = self.next()
            if t[1] == "type":
                self.expect("discrete")
                self.expect("[")
                n = self.number()
                self.expect("]")
                self.expect("{")
                states = [self.name()]
                while self.peek()[1] == ",":
                    self.next()
                    states.append(self.name())
                self.expect("}")
                self.expect(";")
                if len(states) != int(n):
                    self.fail(f"variable {name} declares {int(n)} states but lists {len(states)}", t)
                if len(set(states)) != len(states):
                    self.fail(f"variable {name} repeats a state", t)
            elif t[1] == "property":
                props.append(self.property_line())
            else:
                self.fail(f"unexpected {t[1]!r} in variable block", t)
        self.expect("}")
        if states is None:
            self.fail(f"variable {name} has no type declaration")
        return Variable(name, tuple(states), tuple(props)), self.toks[self.i - 1]

    def probability(self):
        at = self.expect("(")
        child = self.name()
        parents = []
        if self.peek()[1] == "|":
            self.next()
            parents.append(self.name())
            while self.peek()[1] == ",":
                self.next()
                parents.append(self.name())
        self.expect(")")
        self.expect("{")
        rows, table = [], None
        while self.peek()[1] != "}":
            t = self.peek()
            if t[1] == "table":
                self.next()
                table = self.numbers()
            elif t[1] == "(":
                self.next()
                key = [self.name()]
                while self.peek()[1] == ",":
                    self.next()
                    key.append(self.name())
                self.expect(")")
                rows.append((tuple(key), self.numbers(), t))
            elif t[1] == "property":
                self.next()
                self.property_line()
            else:
                self.fail(f"unexpected {t[1]!r} in probability block", t)
        self.expect("}")
        return child, parents, rows, table, at

    def numbers(self):
        vals = [self.number()]
        while self.peek()[1] == ",":
            self.next()
            vals.append(self.number())
        self.expect(";")
        return vals

    def assemble(self, net_name, net_props, variables, blocks):
        vars_ = [v for v, _ in variables]
        by_name = {v.name: v for v in vars_}
        if len(by_name) != len(vars_):
            self.fail("duplicate variable declaration", variables[-1][1])
        cpts = {}
        for child, parents, rows, table, at in blocks:
            for v in (child, *parents):
                if v not in by_name:
                    raise BifError(f"reference to undeclared variable {v}", at[2], at[3])
            if child in cpts:
                raise BifError(f"second probability block for {child}", at[2], at[3])
            shape = tuple(len(by_name[p].states) for p in parents) + (len(by_name[child].states),)
            k = shape[-1]
            if table is not None:
                if parents:
                    raise BifError(f"'table' rows are only supported for root variables ({child})", at[2], at[3])
                arr = np.asarray(table, dtype=float)
                if arr.size != k:
                    raise BifError(f"table for {child} has {arr.size} entries, expected {k}", at[2], at[3])
            else:
                arr = np.full(shape, np.nan)
                for key, vals, tok in rows:
                    if len(key) != len(parents) or len(vals) != k:
                        raise BifError(f"malformed row for {child}", tok[2], tok[3])
                    try:
                        pos = tuple(by_name[p].states.index(s) for p, s in zip(parents, key))
                    except ValueError:
                        raise BifError(f"unknown parent state in row for {child}", tok[2], tok[3]) from None
                    arr[pos] = vals
                if np.isnan(arr).any():
                    raise BifError(f"missing rows in the table for {child}", at[2], at[3])
            cpts[child] = (tuple(parents), arr)
        return BayesNet(net_name, vars_, cpts, net_props)


def parse_bif(text) -> BayesNet:
    """Parse the discrete BIF subset (network / variable / probability blocks)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_bif(net: BayesNet) -> str:
    out = [f"network {net.name} {{"]
    out += [f"  property {p} ;" for p in net.properties]
    out.append("}")
    for v in net.variables:
        out.append(f"variable {v.name} {{")
        out.append(f"  type discrete [ {len(v.states)} ] {{ {', '.join(v.states)} }};")
        out += [f"  property {p} ;" for p in v.properties]
        out.append("}")
    by_name = {v.name: v for v in net.variables}
    for v in net.variables:
        parents, table = net.cpts[v.name]
        head = v.name + (f" | {', '.join(parents)}" if parents else "")
        out.append(f"probability ( {head} ) {{")
        if not parents:
            out.append(f"  table {', '.join(_fmt(x) for x in table)};")
        else:
            for pos in itertools.product(*(range(len(by_name[p].states)) for p in parents)):
                key = ", ".join(by_name[p].states[s] for p, s in zip(parents, pos))
                out.append(f"  ({key}) {', '.join(_fmt(x) for x in table[pos])};")
        out.append("}")
    return "\n".join(out) + "\n"


FIXTURES = ("cancer", "earthquake", "survey", "asia")


def load_fixture(name: str) -> BayesNet:
    """One of the shipped networks: cancer, earthquake, survey or asia."""
    if name not in FIXTURES:
        raise QueryError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    text = resources.files("causalaba").joinpath("data", "networks", f"{name}.bif").read_text()
    return parse_bif(text)


# ---------------------------------------------------------------- sampling


def ancestral_sample(net: BayesNet, n: int, seed: int) -> Dataset:
    """Draw ``n`` rows in topological order; states are 0-based integer codes."""
    if n < 1:
        raise QueryError("n must be positive")
    rng = np.random.default_rng(seed)
    idx = net.index
    order = net.structure.topological_order()
    out = np.zeros((n, len(net.variables)), dtype=np.int64)
    for v in order:
        name = net.variables[v].name
        parents, table = net.cpts[name]
        if parents:
            probs = table[tuple(out[:, idx[p]] for p in parents)]
        else:
            probs = np.broadcast_to(table, (n, table.shape[-1]))
        cum = np.cumsum(probs, axis=1)
        u = rng.random(n)[:, None] * cum[:, -1:]
        out[:, v] = np.minimum((u >= cum).sum(axis=1), table.shape[-1] - 1)
    return Dataset(out.astype(float), tuple(net.names))


def random_dag(d: int, edge_count: int, seed: int) -> Dag:
    """Random topological order, then ``edge_count`` distinct forward pairs chosen uniformly."""
    if d < 1:
        raise QueryError("d must be positive")
    if not 0 <= edge_count <= d * (d - 1) // 2:
        raise QueryError(f"edge_count {edge_count} infeasible for d={d}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(d)
    pairs = [(int(order[a]), int(order[b])) for a in range(d) for b in range(a + 1, d)]
    pick = rng.choice(len(pairs), size=edge_count, replace=False) if edge_count else []
    return Dag(d, frozenset(pairs[k] for k in pick))


@dataclass(frozen=True)
class SemSpec:
    """Linear-Gaussian SEM: ``x_j = sum_i w_ij x_i + noise_scale * eps_j``."""

    structure: Dag
    weights: dict
    noise_scale: float = 1.0
    seed: int = 0
    min_abs_weight: float = 0.1

    def __post_init__(self):
        if set(self.weights) != set(self.structure.edges):
            raise QueryError("one weight per edge required")
        for e, w in self.weights.items():
            if not np.isfinite(w) or abs(w) < self.min_abs_weight:
                raise QueryError(f"weight {w} on {e} is not finite or too close to 0")
        if not self.noise_scale > 0:
            raise QueryError("noise scale must be positive")

    @classmethod
    def random(cls, structure: Dag, seed: int, low: float = 0.5, high: float = 1.5, noise_scale: float = 1.0):
        rng = np.random.default_rng(seed)
        weights = {}
        for e in structure.sorted_edges():
            weights[e] = float(rng.uniform(low, high) * rng.choice((-1.0, 1.0)))
        return cls(structure, weights, noise_scale, seed)


def sem_sample(spec: SemSpec, n: int, names: Sequence[str] | None = None) -> Dataset:
    if n < 1:
        raise QueryError("n must be positive")
    g = spec.structure
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((n, g.d)) * spec.noise_scale
    x = np.zeros((n, g.d))
    for v in g.topological_order():
        x[:, v] = noise[:, v]
        for p in sorted(g.parents(v)):
            x[:, v] += spec.weights[(p, v)] * x[:, p]
    names = tuple(names) if names else tuple(f"x{i}" for i in range(g.d))
    return Dataset(x, names)


# ---------------------------------------------------------------- CSV


def write_csv(data: Dataset, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(data.names)
    ints = np.all(data.values == np.round(data.values))
    for row in data.values:
        w.writerow([str(int(v)) if ints else repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(source) -> Dataset:
    """Read a header row plus numeric cells; ``source`` is a path or the text itself."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise FormatError("empty CSV", 1)
    header = [h.strip() for h in rows[0]]
    vals = []
    for k, r in enumerate(rows[1:], 2):
        if len(r) != len(header):
            raise FormatError(f"expected {len(header)} cells, got {len(r)}", k)
        try:
            vals.append([float(c) for c in r])
        except ValueError as exc:
            raise FormatError(str(exc), k) from None
    if not vals:
        raise FormatError("CSV has no data rows", 2)
    return Dataset(np.array(vals), tuple(header))
