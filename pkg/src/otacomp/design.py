"""Constellation design for computing a tabulated function over the air.

For output stream ``ell`` the stacked constellation ``X`` (length ``sum Q_k``)
must keep every pair of inputs with different function values apart in the
superposed domain: ``<alpha_ij, X> != 0`` for every difference of selectors.

* :func:`exact_design` finds such an ``X`` directly by building a vector that
  is non-orthogonal to every ``alpha``.
* :func:`sdp_design` maximizes the worst weighted separation
  ``min |<alpha, X>|^2 / gamma`` through its lifted convex relaxation, and
  :func:`extract_constellation` rounds the lifted solution back to a vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import Codec, DecoderTable
from .field import FunctionTable, alpha_vectors, build_omega, selector_matrix
from .sdp import solve_maxmin

DEFAULT_MAX_DIM = 64
RANK_TOL = 1e-6
RESIDUAL_TOL = 1e-8
DEDUP_REL_TOL = 1e-6
MIN_MARGIN = 1e-12


class DegenerateDesignError(ValueError):
    """The stream is constant, so there is nothing to separate."""


class RoundingError(RuntimeError):
    """No randomized candidate separates every pair."""


@dataclass
class Constellation:
    ell: int
    X: np.ndarray  # (n,) complex, stacked node blocks
    eps_star: float | None
    mode: str  # "exact" | "inexact"

    def margins(self, alphas: np.ndarray) -> np.ndarray:
        return np.abs(alphas @ self.X)


def _inner(x, v):
    # <x, v> = v^H x
    return np.vdot(v, x)


def non_orth(vectors, dim: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Return a vector with nonzero inner product against every input vector.

    The first vector is taken as a pivot. Vectors orthogonal to it are handled
    by recursion, and the pivot is then scaled just enough that it cannot
    cancel the recursive part on the remaining vectors.
    """
    vs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if dim is None:
        if not vs:
            raise ValueError("dim is required for an empty vector list")
        dim = vs[0].size
    norms = [np.linalg.norm(v) for v in vs]
    if any(nv == 0 for nv in norms):
        raise ValueError("non_orth: zero vector in input")
    if any(v.size != dim for v in vs):
        raise ValueError("non_orth: vectors of different lengths")
    return _non_orth(vs, norms, dim, tol)


def _non_orth(vs, norms, dim, tol):
    if not vs:
        return np.zeros(dim, dtype=complex)
    v1, n1 = vs[0], norms[0]
    orth, orth_n, other = [], [], []
    for v, nv in zip(vs[1:], norms[1:]):
        p = _inner(v1, v)
        if abs(p) <= tol * n1 * nv:
            orth.append(v)
            orth_n.append(nv)
        else:
            other.append((v, p))
    y = _non_orth(orth, orth_n, dim, tol)
    alpha = max((abs(_inner(y, v) / p) for v, p in other), default=0.0) + 1.0
    return alpha * v1 + y


def constraint_rows(table: FunctionTable, ell: int, dedupe: bool = True):
    """Difference vectors and weights ``(alphas (P, n) float, gammas (P,))``.

    With ``dedupe`` the rows are made unique up to sign, keeping the largest
    weight of each group (the only one that can bind).
    """
    omega = build_omega(table, ell)
    alphas = alpha_vectors(table, ell, omega).astype(float)
    gammas = omega.gammas.astype(float)
    if not dedupe or len(gammas) == 0:
        return alphas, gammas
    # canonical sign: first nonzero entry positive
    first = np.argmax(alphas != 0, axis=1)
    sign = np.sign(alphas[np.arange(len(alphas)), first])
    canon = alphas * sign[:, None]
    uniq, inv = np.unique(canon, axis=0, return_inverse=True)
    g = np.zeros(len(uniq))
    np.maximum.at(g, inv.reshape(-1), gammas)
    return uniq, g


def exact_design(table: FunctionTable, ell: int) -> Constellation:
    """Unit-norm constellation that separates every pair (no robustness target)."""
    alphas, _ = constraint_rows(table, ell)
    if len(alphas) == 0:
        raise DegenerateDesignError(f"stream {ell} is constant; use the constant decoder")
    y = non_orth(list(alphas), dim=table.n)
    X = y / np.linalg.norm(y)
    return Constellation(ell, X, None, "exact")


def sdp_design(table: FunctionTable, ell: int, rel_gap: float = 1e-7,
               max_iter: int = 100, max_dim: int = DEFAULT_MAX_DIM):
    """Solve the lifted max-min problem; returns ``(W_star, eps_star)``.

    ``eps_star`` is the margin attained by the returned ``W`` itself, so
    ``alpha^T W alpha >= eps_star * gamma`` holds for every pair.
    """
    if table.n > max_dim:
        raise ValueError(f"constellation length {table.n} exceeds solver cap {max_dim}")
    alphas, gammas = constraint_rows(table, ell)
    if len(alphas) == 0:
        raise DegenerateDesignError(f"stream {ell} is constant; use the constant decoder")
    res = solve_maxmin(alphas / np.sqrt(gammas)[:, None], rel_gap=rel_gap, max_iter=max_iter)
    return res.W, res.t


def verify_lifted(W, eps_star, alphas, gammas, tol: float = RESIDUAL_TOL) -> dict:
    """Recheck the relaxation constraints from ``(W, eps_star)`` alone."""
    W = np.asarray(W)
    lam_min = float(np.linalg.eigvalsh(0.5 * (W + W.conj().T))[0])
    tr = float(np.real(np.trace(W)))
    lhs = np.real(np.einsum("pi,ij,pj->p", alphas.conj(), W, alphas))
    worst = float(np.min(lhs - eps_star * gammas))
    return {
        "psd": lam_min >= -tol,
        "trace": tr <= 1 + tol,
        "pairs": worst >= -tol,
        "min_eig": lam_min,
        "trace_value": tr,
        "worst_residual": worst,
    }


def _margin(X, alphas, gammas):
    return np.min(np.abs(alphas @ X) ** 2 / gammas)


def extract_constellation(W, eps_star, alphas, gammas, ell: int = 0,
                          n_candidates: int = 1000, rank_tol: float = RANK_TOL,
                          rng=None) -> Constellation:
    """Round a lifted solution to a constellation vector.

    Numerically rank-one ``W`` is factored directly. Otherwise candidates
    ``g ~ CN(0, W)`` are scaled to unit norm and the one with the largest
    worst-case weighted margin is kept. The principal eigenvector is always
    included as an extra candidate.
    """
    W = 0.5 * (np.asarray(W) + np.asarray(W).conj().T)
    d, U = np.linalg.eigh(W)
    d = np.clip(d, 0.0, None)
    if d[-1] <= 0:
        raise RoundingError("lifted solution is zero")
    X1 = np.sqrt(d[-1]) * U[:, -1].astype(complex)
    if d.size == 1 or d[-2] / d[-1] < rank_tol:
        return Constellation(ell, X1, float(_margin(X1, alphas, gammas)), "inexact")

    rng = np.random.default_rng(rng)
    F = U * np.sqrt(d)[None, :]
    z = (rng.standard_normal((d.size, n_candidates))
         + 1j * rng.standard_normal((d.size, n_candidates))) / np.sqrt(2)
    G = F @ z
    G = G / np.linalg.norm(G, axis=0, keepdims=True)
    G = np.column_stack([U[:, -1].astype(complex), G])
    m = np.min(np.abs(alphas @ G) ** 2 / gammas[:, None], axis=0)
    best = int(np.argmax(m))
    if m[best] <= MIN_MARGIN:
        raise RoundingError(f"best of {n_candidates} candidates has margin {m[best]:.3g}")
    return Constellation(ell, G[:, best], float(m[best]), "inexact")


def constant_decoder(table: FunctionTable, ell: int) -> DecoderTable:
    return DecoderTable(ell, np.zeros(1, dtype=complex),
                        np.array([table.values[0, ell]]), 0.0)


def build_codec(constellations, table: FunctionTable,
                rel_tol: float = DEDUP_REL_TOL, meta: dict | None = None) -> Codec:
    """Encoder tables and nearest-point decoders from one constellation per stream.

    A ``None`` entry marks a constant stream: its symbols are zero and the
    decoder returns the constant.
    """
    if len(constellations) != table.L:
        raise ValueError(f"need {table.L} constellations, got {len(constellations)}")
    n = table.n
    Xs = np.zeros((n, table.L), dtype=complex)
    for ell, c in enumerate(constellations):
        if c is not None:
            Xs[:, ell] = c.X
    offs = table.offsets
    encoders = [Xs[offs[k]:offs[k] + q].copy() for k, q in enumerate(table.Q_list)]
    A = selector_matrix(table).astype(float)
    sums = A @ Xs
    decoders = []
    for ell, c in enumerate(constellations):
        if c is None:
            decoders.append(constant_decoder(table, ell))
        else:
            decoders.append(DecoderTable.from_sum_points(ell, sums[:, ell], table.values[:, ell], rel_tol))
    return Codec("table", encoders, decoders, dict(meta or {}))


def design_codec(table: FunctionTable, method: str = "sdp", n_candidates: int = 1000,
                 seed: int = 0, rel_gap: float = 1e-7, max_dim: int = DEFAULT_MAX_DIM) -> Codec:
    """Design every stream of ``table`` with ``method`` ('sdp' or 'exact')."""
    if method not in ("sdp", "exact"):
        raise ValueError(f"unknown design method {method!r}")
    cons = []
    margins = []
    for ell in range(table.L):
        try:
            if method == "exact":
                c = exact_design(table, ell)
            else:
                W, eps = sdp_design(table, ell, rel_gap=rel_gap, max_dim=max_dim)
                alphas, gammas = constraint_rows(table, ell)
                c = extract_constellation(W, eps, alphas, gammas, ell=ell,
                                          n_candidates=n_candidates,
                                          rng=np.random.default_rng([seed, ell]))
        except DegenerateDesignError:
            c = None
        cons.append(c)
        margins.append(None if c is None or c.eps_star is None else c.eps_star)
    meta = {"method": method, "seed": seed, "margins": margins}
    return build_codec(cons, table, meta=meta)
