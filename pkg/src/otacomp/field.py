"""Tabulated vector functions over finite input alphabets.

Inputs are integers ``0..Q_k-1`` per node. A :class:`FunctionTable` stores the
value of every output stream for every input tuple, and the helpers here turn
it into the pair/selector objects the constellation design works with.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_MAX_ROWS = 10**6


class DomainError(ValueError):
    """The function produced a non-finite value somewhere on its domain."""


class TableSizeError(ValueError):
    """The input domain is larger than the configured row cap."""


def _as_q_list(K: int, Q) -> tuple[int, ...]:
    if np.isscalar(Q):
        return (int(Q),) * K
    q_list = tuple(int(q) for q in Q)
    if len(q_list) != K:
        raise ValueError(f"Q_list has {len(q_list)} entries, expected K={K}")
    return q_list


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Values ``f_l(s)`` for every input tuple ``s``.

    Rows follow ``itertools.product`` order: node 1 is the most significant
    digit and node K the least.
    """

    K: int
    Q_list: tuple[int, ...]
    L: int
    inputs: np.ndarray  # (M, K) int
    values: np.ndarray  # (M, L) float

    @property
    def M(self) -> int:
        return self.inputs.shape[0]

    @property
    def n(self) -> int:
        """Length of a stacked constellation vector, sum of the Q_k."""
        return int(sum(self.Q_list))

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.Q_list)[:-1])).astype(int)

    def index_of(self, s: Sequence[int]) -> int:
        idx = 0
        for q, sk in zip(self.Q_list, s):
            idx = idx * q + int(sk)
        return idx

    def range_set(self, ell: int) -> np.ndarray:
        return np.unique(self.values[:, ell])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return (
            self.K == other.K
            and self.Q_list == other.Q_list
            and self.L == other.L
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.values, other.values)
        )

    # text format ------------------------------------------------------
    def to_text(self) -> str:
        lines = [
            f"K={self.K}",
            "Q_list=" + ",".join(str(q) for q in self.Q_list),
            f"L={self.L}",
        ]
        for s, v in zip(self.inputs, self.values):
            lines.append(
                " ".join(str(int(x)) for x in s)
                + " | "
                + " ".join(f"{float(x):.17g}" for x in v)
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FunctionTable":
        header = {}
        rows_in, rows_out = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "|" in line:
                left, right = line.split("|", 1)
                rows_in.append([int(x) for x in left.split()])
                rows_out.append([float(x) for x in right.split()])
            elif "=" in line:
                key, val = (p.strip() for p in line.split("=", 1))
                header[key] = val
            else:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        missing = [k for k in ("K", "Q_list", "L") if k not in header]
        if missing:
            raise ValueError("function table header missing: " + ", ".join(missing))
        K = int(header["K"])
        q_list = _as_q_list(K, [int(q) for q in header["Q_list"].split(",")])
        L = int(header["L"])
        inputs = np.array(rows_in, dtype=int).reshape(-1, K)
        values = np.array(rows_out, dtype=float).reshape(-1, L)
        expected = _domain(q_list)
        if inputs.shape[0] != expected.shape[0] or not np.array_equal(inputs, expected):
            raise ValueError("function table rows must enumerate the full domain in order")
        return cls(K, q_list, L, inputs, values)


def _domain(q_list: Sequence[int]) -> np.ndarray:
    return np.array(list(itertools.product(*(range(q) for q in q_list))), dtype=int).reshape(
        -1, len(q_list)
    )


def tabulate_function(
    f: Callable[[tuple[int, ...]], object],
    K: int,
    Q_list,
    L: int,
    max_rows: int = DEFAULT_MAX_ROWS,
) -> FunctionTable:
    """Evaluate ``f`` on every input tuple and return the table.

    ``f`` receives a tuple of K integers and returns a scalar (L=1) or a
    length-L sequence.
    """
    if K < 1 or L < 1:
        raise ValueError("K and L must be at least 1")
    q_list = _as_q_list(K, Q_list)
    if any(q < 2 for q in q_list):
        raise ValueError("every field size Q_k must be at least 2")
    M = math.prod(q_list)
    if M > max_rows:
        raise TableSizeError(f"domain has {M} rows, cap is {max_rows}")
    inputs = _domain(q_list)
    values = np.empty((M, L), dtype=float)
    for i, s in enumerate(inputs):
        out = np.asarray(f(tuple(int(x) for x in s)), dtype=float).reshape(-1)
        if out.size != L:
            raise ValueError(f"f returned {out.size} outputs, expected L={L}")
        values[i] = out
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.isfinite(values))[0, 0])
        raise DomainError(f"non-finite output at input {tuple(inputs[bad])}")
    inputs.setflags(write=False)
    values.setflags(write=False)
    return FunctionTable(K, q_list, L, inputs, values)


@dataclass(frozen=True)
class OmegaSet:
    """Unordered pairs ``i < j`` whose ``ell``-th outputs differ."""

    ell: int
    pairs: np.ndarray  # (P, 2) int
    gammas: np.ndarray  # (P,) squared output gap

    def __len__(self) -> int:
        return self.pairs.shape[0]


def build_omega(table: FunctionTable, ell: int) -> OmegaSet:
    if not 0 <= ell < table.L:
        raise IndexError(f"output index {ell} outside [0, {table.L})")
    v = table.values[:, ell]
    i, j = np.triu_indices(table.M, k=1)
    keep = v[i] != v[j]
    pairs = np.stack([i[keep], j[keep]], axis=1)
    gammas = (v[pairs[:, 0]] - v[pairs[:, 1]]) ** 2
    return OmegaSet(ell, pairs, gammas)


def selector_matrix(table: FunctionTable) -> np.ndarray:
    """Row ``i`` is the binary selector of input tuple ``i`` (shape M x n)."""
    a = np.zeros((table.M, table.n), dtype=np.int8)
    cols = table.inputs + table.offsets[None, :]
    np.put_along_axis(a, cols, 1, axis=1)
    return a


def selector_vector(table: FunctionTable, i: int) -> np.ndarray:
    a = np.zeros(table.n, dtype=np.int8)
    a[table.inputs[i] + table.offsets] = 1
    return a


def alpha_vectors(table: FunctionTable, ell: int, omega: OmegaSet | None = None) -> np.ndarray:
    """Difference of selectors for every pair in ``omega``, shape (P, n)."""
    if omega is None:
        omega = build_omega(table, ell)
    a = selector_matrix(table)
    return a[omega.pairs[:, 0]] - a[omega.pairs[:, 1]]


# named functions used by presets and tests -------------------------------

def _f_sum(s):
    return float(sum(s))


def _f_product(s):
    return float(math.prod(s))


def _f_max(s):
    return float(max(s))


def _f_sumsq(s):
    return float(sum(x * x for x in s))


def _f_mean(s):
    return float(sum(s)) / len(s)


NAMED_FUNCTIONS: dict[str, Callable] = {
    "sum": _f_sum,
    "product": _f_product,
    "max": _f_max,
    "sum-of-squares": _f_sumsq,
    "mean": _f_mean,
}


def stacked(names: Sequence[str]) -> Callable:
    """Vector function whose l-th output is the named scalar function ``names[l]``."""
    fs = [NAMED_FUNCTIONS[n] for n in names]
    return lambda s: [f(s) for f in fs]


def random_table(K: int, Q_list, L: int, n_levels: int, rng: np.random.Generator) -> FunctionTable:
    """Table with i.i.d. integer outputs in ``0..n_levels-1``."""
    q_list = _as_q_list(K, Q_list)
    M = math.prod(q_list)
    vals = rng.integers(0, n_levels, size=(M, L)).astype(float)
    lookup = {tuple(s): vals[i] for i, s in enumerate(_domain(q_list))}
    return tabulate_function(lambda s: lookup[s], K, q_list, L)
