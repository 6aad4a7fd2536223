"""Fading MIMO multiple-access channel with seed-shared random beamformers.

Node ``k`` sends ``V_k x_k`` through ``H_k`` (N_r x N_t). The receiver knows
the channels and regenerates every ``V_k`` from the node's seed, combines
with ``U = sum_k H_k V_k / N_r`` and scales by ``1/N_t``, so

    y = (1/beta) sum_k' G_k'^H (sum_k G_k x_k + z),   G_k = H_k V_k,
    beta = N_r N_t.

With ``sigma_v^2 = 1/sigma_h^2`` the diagonal terms concentrate on ``x_k``
and the cross terms on zero as ``N_r`` grows.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .rng import crandn

DISTRIBUTIONS = ("gaussian", "semi-unitary")


def _sigma_list(sigma_h, K) -> np.ndarray:
    s = np.broadcast_to(np.asarray(sigma_h, dtype=float), (K,)).copy()
    if np.any(s <= 0):
        raise ValueError("sigma_h must be positive")
    return s


@dataclass
class ChannelRealization:
    H: np.ndarray  # (K, N_r, N_t)
    sigma_h: np.ndarray  # (K,)
    alpha_corr: float = 0.0

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def N_r(self) -> int:
        return self.H.shape[1]

    @property
    def N_t(self) -> int:
        return self.H.shape[2]


@dataclass
class BeamformerSet:
    V: np.ndarray  # (K, N_t, L)
    seeds: tuple
    sigma_v: np.ndarray  # (K,)
    distribution: str = "gaussian"

    @property
    def L(self) -> int:
        return self.V.shape[2]


@dataclass
class ReceivedSignal:
    y: np.ndarray
    y_sig: np.ndarray
    y_inter: np.ndarray
    y_noise: np.ndarray
    r_true: np.ndarray
    tx_power: np.ndarray  # (K,) ||V_k x_k|| / N_t

    @property
    def r_hat(self) -> np.ndarray:
        return self.y

    @property
    def e_sig(self) -> float:
        return float(np.linalg.norm(self.r_true - self.y_sig))

    @property
    def e_inter(self) -> float:
        return float(np.linalg.norm(self.y_inter))

    @property
    def e_noise(self) -> float:
        return float(np.linalg.norm(self.y_noise))

    @property
    def error(self) -> float:
        return float(np.linalg.norm(self.r_true - self.y))


def draw_channels(K: int, N_r: int, N_t: int, sigma_h=1.0, alpha_corr: float = 0.0,
                  rng=None) -> ChannelRealization:
    """i.i.d. CN(0, sigma_h^2) entries, or a shared-component correlated model.

    For ``alpha_corr > 0``: ``H_k = sigma_h,k (sqrt(a) H_0 + sqrt(1-a) W_k)``,
    so that ``E[H_k'^H H_k] = N_r a sigma_h,k sigma_h,k' I`` for ``k != k'``.
    """
    if min(K, N_r, N_t) < 1:
        raise ValueError("K, N_r and N_t must be at least 1")
    if not 0.0 <= alpha_corr < 1.0:
        raise ValueError("alpha_corr must lie in [0, 1)")
    rng = np.random.default_rng(rng)
    s = _sigma_list(sigma_h, K)
    W = crandn(rng, (K, N_r, N_t))
    if alpha_corr > 0:
        H0 = crandn(rng, (N_r, N_t))
        W = np.sqrt(alpha_corr) * H0[None] + np.sqrt(1 - alpha_corr) * W
    return ChannelRealization(s[:, None, None] * W, s, float(alpha_corr))


def haar_semi_unitary(rng, N_t: int, L: int) -> np.ndarray:
    """N_t x L matrix with orthonormal columns, Haar distributed."""
    Z = crandn(rng, (N_t, L))
    Qm, R = np.linalg.qr(Z)
    ph = np.diagonal(R).copy()
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return Qm * ph[None, :]


def beamformer(seed: int, N_t: int, L: int, sigma_v: float,
               distribution: str = "gaussian") -> np.ndarray:
    """One node's beamformer, regenerated bit-exactly from its seed.

    ``gaussian``: i.i.d. CN(0, sigma_v^2) entries.
    ``semi-unitary``: ``sqrt(N_t) sigma_v`` times Haar orthonormal columns, so
    ``V^H V = N_t sigma_v^2 I`` exactly and each entry still has variance
    ``sigma_v^2``.
    """
    rng = np.random.Generator(np.random.Philox(int(seed)))
    if distribution == "gaussian":
        return crandn(rng, (N_t, L), sigma_v**2)
    if distribution == "semi-unitary":
        return np.sqrt(N_t) * sigma_v * haar_semi_unitary(rng, N_t, L)
    raise ValueError(f"unknown beamformer distribution {distribution!r}")


def draw_beamformers(K: int, N_t: int, L: int, sigma_h, seeds,
                     distribution: str = "gaussian") -> BeamformerSet:
    if L > N_t:
        raise ValueError(f"L={L} streams need at least as many transmit antennas (N_t={N_t})")
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) != K:
        raise ValueError(f"need {K} seeds, got {len(seeds)}")
    sv = 1.0 / _sigma_list(sigma_h, K)
    V = np.stack([beamformer(seeds[k], N_t, L, sv[k], distribution) for k in range(K)])
    return BeamformerSet(V, seeds, sv, distribution)


def build_combiner(ch: ChannelRealization, bf: BeamformerSet) -> np.ndarray:
    """``U = sum_k H_k V_k / N_r`` with shape (N_r, L); applied as ``U^H``."""
    if ch.K != bf.V.shape[0] or ch.N_t != bf.V.shape[1]:
        raise ValueError("channel and beamformer dimensions disagree")
    return (ch.H @ bf.V).sum(axis=0) / ch.N_r


def transmit_and_combine(x, ch: ChannelRealization, bf: BeamformerSet, sigma_z: float,
                         rng=None, z=None) -> ReceivedSignal:
    """Superpose ``V_k x_k`` through the channels, add noise, combine.

    ``x`` has shape (K, L). Pass ``z`` to fix the receiver noise vector.
    """
    x = np.asarray(x, dtype=complex)
    K, N_r, N_t = ch.H.shape
    L = bf.L
    if x.shape != (K, L):
        raise ValueError(f"x must have shape {(K, L)}, got {x.shape}")
    if z is None:
        z = crandn(np.random.default_rng(rng), N_r, sigma_z**2) if sigma_z > 0 else np.zeros(N_r, complex)
    beta = N_r * N_t
    G = ch.H @ bf.V  # (K, N_r, L)
    per_node = (G @ x[:, :, None])[:, :, 0]  # G_k x_k
    Gh = G.conj().transpose(0, 2, 1)
    rx = per_node.sum(axis=0) + z
    GsumH = Gh.sum(axis=0)
    y = GsumH @ rx / beta
    y_sig = (Gh @ per_node[:, :, None]).sum(axis=0)[:, 0] / beta
    y_all = GsumH @ per_node.sum(axis=0) / beta
    y_noise = GsumH @ z / beta
    tx = np.linalg.norm((bf.V @ x[:, :, None])[:, :, 0], axis=1) / N_t
    return ReceivedSignal(y, y_sig, y_all - y_sig, y_noise, x.sum(axis=0), tx)


def compensated_estimate(rx: ReceivedSignal) -> np.ndarray:
    """Estimate of ``sum_k x_k``; the 1/beta scaling already targets it."""
    return rx.y


def dump_realization(path, ch: ChannelRealization, bf: BeamformerSet | None = None) -> None:
    """Write channels (and beamformers) as ``matrix,node,row,col,re,im`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["matrix", "node", "row", "col", "re", "im"])
        mats = [("H", ch.H)] + ([("V", bf.V)] if bf is not None else [])
        for name, M in mats:
            for k, r, c in np.ndindex(M.shape):
                v = M[k, r, c]
                w.writerow([name, k, r, c, f"{v.real:.17g}", f"{v.imag:.17g}"])
