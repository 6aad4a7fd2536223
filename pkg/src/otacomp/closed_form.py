"""Closed-form codecs: PAM for affine maps, QAM for convolutions.

Both need no optimization. Symbols are integers (PAM) or half-integer
lattice points (QAM), so the superposed symbol is itself an offset copy of
the function value and decoding is round-and-clamp.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import Codec, PamDecoder, QamDecoder
from .field import FunctionTable, tabulate_function


@dataclass(frozen=True, eq=False)
class AffineSpec:
    """``f_l(s) = sum_k A[l, k] * s_k + b[l]`` with ``A[l, k] in 0..Q_list[k]-1``."""

    A: np.ndarray  # (L, K) int
    b: np.ndarray  # (L,) int
    Q: int
    Q_list: tuple[int, ...]

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError("A must be a non-empty L x K matrix")
        if len(self.Q_list) != A.shape[1] or np.asarray(self.b).shape != (A.shape[0],):
            raise ValueError("A, b and Q_list sizes disagree")
        if self.Q < 2 or any(q < 1 for q in self.Q_list):
            raise ValueError("field sizes must be positive (Q >= 2)")
        if np.any(A < 0) or np.any(A >= np.asarray(self.Q_list)[None, :]):
            raise ValueError("coefficient a[l, k] outside 0..Q_k-1")

    @property
    def L(self) -> int:
        return self.A.shape[0]

    @property
    def K(self) -> int:
        return self.A.shape[1]

    def evaluate(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=np.int64)
        return (S @ np.asarray(self.A, dtype=np.int64).T + np.asarray(self.b)).astype(float)

    def to_table(self) -> FunctionTable:
        return tabulate_function(lambda s: self.evaluate(np.array(s)), self.K, self.Q, self.L)

    @classmethod
    def random(cls, K, L, Q, Q_list=None, rng=None, with_offset=False) -> "AffineSpec":
        rng = np.random.default_rng(rng)
        q_list = tuple([Q] * K if Q_list is None else Q_list)
        A = np.column_stack([rng.integers(0, q, size=L) for q in q_list])
        b = rng.integers(0, Q, size=L) if with_offset else np.zeros(L, dtype=int)
        return cls(A, b, int(Q), tuple(int(q) for q in q_list))


@dataclass(frozen=True, eq=False)
class ConvSpec:
    """``f_l(s) = sum_k a[l + k] * s_k``: a Hankel matrix applied to ``s``."""

    a: np.ndarray  # (L + K - 1,) int
    K: int
    Q: int

    @property
    def L(self) -> int:
        return len(self.a) - self.K + 1

    @property
    def hankel(self) -> np.ndarray:
        ell, k = np.meshgrid(np.arange(self.L), np.arange(self.K), indexing="ij")
        return np.asarray(self.a)[ell + k]

    def evaluate(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=np.int64)
        return (S @ self.hankel.astype(np.int64).T).astype(float)

    def to_table(self) -> FunctionTable:
        return tabulate_function(lambda s: self.evaluate(np.array(s)), self.K, self.Q, self.L)


def conv_function_spec(a, K: int, Q: int | None = None) -> ConvSpec:
    a = np.asarray(a, dtype=int).reshape(-1)
    if K < 1 or a.size < K:
        raise ValueError(f"kernel length {a.size} must be at least K={K}")
    if Q is None:
        Q = max(2, int(a.max()) + 1)
    if np.any(a < 0) or np.any(a >= Q):
        raise ValueError("kernel entries must lie in 0..Q-1")
    return ConvSpec(a, int(K), int(Q))


# PAM ------------------------------------------------------------------------

def pam_offset(Q: int, Q_k: int) -> int:
    return (Q * Q_k) // 2


def pam_encode(a, s, Q: int, Q_k: int):
    """Integer PAM level ``a*s - floor(Q*Q_k/2)``."""
    a = np.asarray(a)
    s = np.asarray(s)
    if np.any(a < 0) or np.any(a >= Q_k):
        raise ValueError("coefficient outside 0..Q_k-1")
    if np.any(s < 0) or np.any(s >= Q):
        raise ValueError("input outside 0..Q-1")
    out = a.astype(np.int64) * s.astype(np.int64) - pam_offset(Q, Q_k)
    return out if out.ndim else int(out)


def pam_decoder(spec: AffineSpec, ell: int) -> PamDecoder:
    shift = sum(pam_offset(spec.Q, q) for q in spec.Q_list)
    upper = sum((q - 1) * (spec.Q - 1) for q in spec.Q_list)
    return PamDecoder(ell, shift, upper, int(spec.b[ell]))


def pam_decode(y, ell: int, spec: AffineSpec):
    out = pam_decoder(spec, ell).decode(y)
    return float(out) if np.ndim(out) == 0 else out


def pam_codec(spec: AffineSpec) -> Codec:
    s = np.arange(spec.Q)
    encoders = [
        np.stack([pam_encode(spec.A[ell, k], s, spec.Q, spec.Q_list[k]) for ell in range(spec.L)],
                 axis=1).astype(complex)
        for k in range(spec.K)
    ]
    decoders = [pam_decoder(spec, ell) for ell in range(spec.L)]
    meta = {"A": np.asarray(spec.A).tolist(), "b": np.asarray(spec.b).tolist(),
            "Q": spec.Q, "Q_list": list(spec.Q_list)}
    return Codec("pam", encoders, decoders, meta)


# QAM ------------------------------------------------------------------------

def qam_encode(v, Q: int):
    """Map ``0 <= v <= (Q-1)^2`` to ``(v mod Q) + j*floor(v/Q)``, centered."""
    v = np.asarray(v, dtype=np.int64)
    if np.any(v < 0) or np.any(v > (Q - 1) ** 2):
        raise ValueError(f"value outside 0..{(Q - 1) ** 2}")
    c = (1 - Q) / 2.0
    out = (v % Q + c) + 1j * (v // Q + c)
    return complex(out) if out.ndim == 0 else out


def qam_decode(y, Q: int, K: int):
    out = QamDecoder(0, Q, K).decode(y)
    return float(out) if np.ndim(out) == 0 else out


def qam_codec(spec: ConvSpec) -> Codec:
    s = np.arange(spec.Q)
    Hk = spec.hankel
    encoders = [
        np.stack([qam_encode(Hk[ell, k] * s, spec.Q) for ell in range(spec.L)], axis=1)
        for k in range(spec.K)
    ]
    decoders = [QamDecoder(ell, spec.Q, spec.K) for ell in range(spec.L)]
    meta = {"a": np.asarray(spec.a).tolist(), "K": spec.K, "Q": spec.Q}
    return Codec("qam", encoders, decoders, meta)
