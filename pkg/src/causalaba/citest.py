"""Conditional independence testers: Fisher-Z on tabular data and a d-separation oracle."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import log, sqrt
from typing import Iterable, Protocol, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.stats import norm

from .errors import DegenerateDataError, QueryError, SampleSizeError
from .graph import Dag, d_separated

CLAMP_EPS = 1e-12
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise QueryError("dataset must be a 2-d array")
        if not np.all(np.isfinite(values)):
            raise QueryError("dataset contains missing or non-finite values")
        names = tuple(self.names) or tuple(f"x{i}" for i in range(values.shape[1]))
        if len(names) != values.shape[1]:
            raise QueryError("one name per column required")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CitResult:
    x: int
    y: int
    z: frozenset
    p: float


def canonical(x: int, y: int, z: Iterable[int], d: int) -> tuple[int, int, frozenset]:
    z = frozenset(int(v) for v in z)
    if x == y:
        raise QueryError("x and y must differ")
    if x in z or y in z:
        raise QueryError("conditioning set must exclude x and y")
    for v in (x, y, *z):
        if not 0 <= v < d:
            raise QueryError(f"variable {v} out of range for d={d}")
    return (x, y, z) if x < y else (y, x, z)


class Tester(Protocol):
    d: int

    def __call__(self, x: int, y: int, z: Iterable[int] = ()) -> CitResult: ...


class FisherZ:
    """Fisher-Z partial-correlation test with a cached correlation matrix.

    The correlation matrix is computed once at construction; every query after
    that is a small dense solve, so instances can be shared between threads.
    """

    def __init__(self, data: Dataset):
        self.data = data
        self.d = data.d
        self.n = data.n
        std = data.values.std(axis=0)
        self._const = std <= 0
        with np.errstate(invalid="ignore", divide="ignore"):
            self.corr = np.corrcoef(data.values, rowvar=False).reshape(self.d, self.d)

    def partial_corr(self, x: int, y: int, z: Sequence[int]) -> float:
        idx = [x, y, *sorted(z)]
        if self._const[idx].any():
            raise DegenerateDataError(f"zero-variance column among {idx}")
        if not z:
            return float(self.corr[x, y])
        sub = self.corr[np.ix_(idx, idx)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(sub, check_finite=False)
        if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
            raise DegenerateDataError(f"singular correlation submatrix over {idx}")
        prec = lu_solve((lu, piv), np.eye(len(idx)), check_finite=False)
        return float(-prec[0, 1] / sqrt(prec[0, 0] * prec[1, 1]))

    def __call__(self, x: int, y: int, z: Iterable[int] = ()) -> CitResult:
        x, y, z = canonical(x, y, z, self.d)
        dof = self.n - len(z) - 3
        if dof <= 0:
            raise SampleSizeError(f"n={self.n} too small for |Z|={len(z)}")
        r = self.partial_corr(x, y, sorted(z))
        r = min(max(r, -1 + CLAMP_EPS), 1 - CLAMP_EPS)
        stat = sqrt(dof) * 0.5 * log((1 + r) / (1 - r))
        p = float(2 * norm.sf(abs(stat)))
        return CitResult(x, y, z, min(max(p, 0.0), 1.0))


def fisher_z(data: Dataset, x: int, y: int, z: Iterable[int] = ()) -> CitResult:
    return FisherZ(data)(x, y, z)


@dataclass
class OracleTester:
    """Perfect independence information from a known DAG (p is 1 or 0)."""

    graph: Dag
    d: int = field(init=False)

    def __post_init__(self):
        self.d = self.graph.d

    def __call__(self, x: int, y: int, z: Iterable[int] = ()) -> CitResult:
        x, y, z = canonical(x, y, z, self.d)
        return CitResult(x, y, z, 1.0 if d_separated(self.graph, x, y, z) else 0.0)


def oracle_test(g: Dag, x: int, y: int, z: Iterable[int] = ()) -> CitResult:
    return OracleTester(g)(x, y, z)


class TableTester:
    """Replays p-values from a lookup table; missing queries fall back to ``default``."""

    def __init__(self, d: int, table: dict, default: float | None = None):
        self.d = d
        self.default = default
        self.table = {canonical(x, y, z, d): p for (x, y, z), p in table.items()}

    def __call__(self, x: int, y: int, z: Iterable[int] = ()) -> CitResult:
        key = canonical(x, y, z, self.d)
        if key in self.table:
            return CitResult(*key, self.table[key])
        if self.default is None:
            raise QueryError(f"no p-value recorded for {key}")
        return CitResult(*key, self.default)
