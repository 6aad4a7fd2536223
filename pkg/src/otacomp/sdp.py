"""Small dense SDP solver for the max-min constellation relaxation.

Solves::

    maximize    t
    subject to  c_p^T W c_p >= t      p = 1..P
                trace(W) <= 1,  W PSD

as a conic program ``min -t  s.t.  G x + s = h,  s in R_+^(P+1) x S_+^n`` over
``x = (svec W, t)``, with a primal-dual predictor-corrector interior point
method and Nesterov-Todd scaling. The Newton system lives in x-space, so its
size is ``n(n+1)/2 + 1`` regardless of how many constraints there are.

The LP multipliers give a point on the simplex, and
``lambda_max(sum_p lam_p c_p c_p^T)`` is then a certified upper bound on the
optimum. The returned ``W`` is cleaned (projected onto the PSD cone, trace
clipped to one) and ``t`` recomputed from it, so the primal side is exactly
feasible and every result carries its own optimality gap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class ConvergenceError(RuntimeError):
    """Raised when the iteration budget runs out; ``best`` holds the best iterate."""

    def __init__(self, msg: str, best: "SDPResult"):
        super().__init__(msg)
        self.best = best


@dataclass
class SDPResult:
    W: np.ndarray
    t: float
    upper_bound: float
    iterations: int
    converged: bool

    @property
    def gap(self) -> float:
        return self.upper_bound - self.t


def dual_bound(C: np.ndarray, lam: np.ndarray) -> float:
    """Upper bound ``lambda_max(sum lam_p c_p c_p^T)`` for ``lam`` on the simplex."""
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    tot = lam.sum()
    if not np.isfinite(tot) or tot <= 0:
        return np.inf
    lam = lam / tot
    return float(np.linalg.eigvalsh((C.T * lam) @ C)[-1])


def clean_primal(C: np.ndarray, W: np.ndarray) -> tuple[np.ndarray, float]:
    """Project ``W`` onto ``{W PSD, trace W <= 1}`` and return it with the
    attained margin ``min_p c_p^T W c_p``."""
    W = 0.5 * (W + W.T)
    d, U = np.linalg.eigh(W)
    d = np.clip(d, 0.0, None)
    if d.sum() > 1.0:
        d = d / d.sum()
    W = (U * d) @ U.T
    t = float(np.min(np.einsum("pi,ij,pj->p", C, W, C)))
    return W, t


def _factor(A):
    # A = L L^T via eigh; tolerant of tiny eigenvalues near convergence
    d, U = np.linalg.eigh(0.5 * (A + A.T))
    return U * np.sqrt(np.clip(d, 1e-300, None))


def _max_step(lam_l, lam_s, dl, dS):
    """Largest a with lam_l + a*dl >= 0 and diag(lam_s) + a*dS PSD."""
    a = np.inf
    neg = dl < 0
    if np.any(neg):
        a = min(a, float(np.min(-lam_l[neg] / dl[neg])))
    isq = 1.0 / np.sqrt(lam_s)
    m = np.linalg.eigvalsh(isq[:, None] * dS * isq[None, :])[0]
    if m < 0:
        a = min(a, -1.0 / m)
    return a


def solve_maxmin(
    C: np.ndarray,
    rel_gap: float = 1e-7,
    max_iter: int = 100,
) -> SDPResult:
    """Solve the relaxation for constraint rows ``C`` (shape P x n, real).

    Stops when the certified gap ``upper_bound - t`` of the cleaned primal
    point is at most ``rel_gap`` relative to the bound.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] == 0:
        raise ValueError("at least one constraint row is required")
    P, n = C.shape
    iu, ju = np.triu_indices(n)
    mult = np.where(iu == ju, 1.0, 2.0)
    dsym = 0.5 * mult
    N = iu.size
    B = C[:, iu] * C[:, ju] * mult[None, :]
    e = (iu == ju).astype(float)
    nu = P + 1 + n  # cone degree

    def mat(w):
        W = np.zeros((n, n))
        W[iu, ju] = w
        W[ju, iu] = w
        return W

    # G x for x = (w, t): LP rows (-(Bw - t), e.w), PSD block -mat(w)
    def G(x):
        w, t = x[:N], x[N]
        return np.concatenate([-(B @ w) + t, [e @ w]]), -mat(w)

    def GT(zl, Z):
        gw = -(B.T @ zl[:P]) + e * zl[P] - mult * Z[iu, ju]
        return np.concatenate([gw, [zl[:P].sum()]])

    h_l = np.zeros(P + 1)
    h_l[P] = 1.0
    c = np.zeros(N + 1)
    c[N] = -1.0

    # strictly feasible primal start, unit dual start
    x = np.zeros(N + 1)
    x[:N] = np.where(iu == ju, 1.0 / (2 * n), 0.0)
    x[N] = 0.5 * float(np.min(B @ x[:N]))
    gl, gs = G(x)
    sl, S = h_l - gl, -gs
    zl, Z = np.ones(P + 1), np.eye(n)

    best_W, best_t, best_ub = None, -np.inf, np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Wc, tc = clean_primal(C, mat(x[:N]))
        if tc > best_t:
            best_W, best_t = Wc, tc
        best_ub = min(best_ub, dual_bound(C, zl[:P]))
        if best_ub - best_t <= rel_gap * abs(best_ub):
            return SDPResult(best_W, best_t, best_ub, it, True)

        # NT scaling: R^T Z R = R^{-1} S R^{-T} = diag(lam_s)
        Ls, Lz = _factor(S), _factor(Z)
        _, sv, Vt = np.linalg.svd(Lz.T @ Ls)
        R = Ls @ Vt.T / np.sqrt(sv)[None, :]
        Rinv = np.linalg.inv(R)
        lam_s = sv
        wl = np.sqrt(sl / zl)
        lam_l = np.sqrt(sl * zl)
        Q = Rinv.T @ Rinv
        Hl = zl / sl

        K = np.empty((N + 1, N + 1))
        K[:N, :N] = (B.T * Hl[:P]) @ B + Hl[P] * np.outer(e, e)
        K[:N, :N] += (mult[:, None] * (Q[np.ix_(iu, iu)] * Q[np.ix_(ju, ju)]
                                       + Q[np.ix_(iu, ju)] * Q[np.ix_(ju, iu)])) * dsym[None, :]
        K[:N, N] = -(B.T @ Hl[:P])
        K[N, :N] = K[:N, N]
        K[N, N] = Hl[:P].sum()
        K = 0.5 * (K + K.T)
        if not np.all(np.isfinite(K)):
            break
        try:
            fac = sla.cho_factor(K)

            def ksolve(r):
                return sla.cho_solve(fac, r)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            def ksolve(r):
                return np.linalg.lstsq(K, r, rcond=None)[0]

        def newton(r1l, r1s, r2, r3l, r3s):
            ql = r3l / lam_l
            qs = 2.0 * r3s / (lam_s[:, None] + lam_s[None, :])
            yl = r1l - wl * ql
            ys = r1s - R @ qs @ R.T
            dx = ksolve(r2 + GT(Hl * yl, Q @ ys @ Q))
            gl_, gs_ = G(dx)
            dzl = Hl * (gl_ - yl)
            dZ = Q @ (gs_ - ys) @ Q
            dZ = 0.5 * (dZ + dZ.T)
            dsl = r1l - gl_
            dS = r1s - gs_
            dS = 0.5 * (dS + dS.T)
            tzl = wl * dzl
            tZ = R.T @ dZ @ R
            tZ = 0.5 * (tZ + tZ.T)
            tsl = ql - tzl
            tS = qs - tZ
            tS = 0.5 * (tS + tS.T)
            return dx, dsl, dS, dzl, dZ, tsl, tS, tzl, tZ

        gl, gs = G(x)
        r1l, r1s = h_l - gl - sl, -gs - S
        r2 = -(GT(zl, Z) + c)
        mu = (sl @ zl + np.sum(S * Z)) / nu

        # predictor
        r3l = -lam_l * lam_l
        r3s = -np.diag(lam_s * lam_s)
        dx, dsl, dS, dzl, dZ, tsl, tS, tzl, tZ = newton(r1l, r1s, r2, r3l, r3s)
        a_aff = min(1.0, _max_step(lam_l, lam_s, tsl, tS), _max_step(lam_l, lam_s, tzl, tZ))
        mu_aff = ((sl + a_aff * dsl) @ (zl + a_aff * dzl)
                  + np.sum((S + a_aff * dS) * (Z + a_aff * dZ))) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        r3l = -lam_l * lam_l - tsl * tzl + sigma * mu
        cross = tS @ tZ
        r3s = -np.diag(lam_s * lam_s) - 0.5 * (cross + cross.T) + sigma * mu * np.eye(n)
        dx, dsl, dS, dzl, dZ, tsl, tS, tzl, tZ = newton(r1l, r1s, r2, r3l, r3s)
        a = min(1.0, 0.99 * min(_max_step(lam_l, lam_s, tsl, tS),
                                _max_step(lam_l, lam_s, tzl, tZ)))
        if not np.isfinite(a) or a <= 1e-12:
            break
        x = x + a * dx
        sl = sl + a * dsl
        zl = zl + a * dzl
        S = S + a * dS
        Z = Z + a * dZ
        S = 0.5 * (S + S.T)
        Z = 0.5 * (Z + Z.T)

    best = SDPResult(best_W, best_t, best_ub, it, False)
    raise ConvergenceError(
        f"no convergence after {it} iterations (gap {best.gap:.3e})", best
    )
