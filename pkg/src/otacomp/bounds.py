"""Receive-antenna lower bounds and Monte Carlo checks of the concentration they rest on."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import crandn, substream


@dataclass(frozen=True)
class BoundInputs:
    L: int
    K: int
    gamma1: float  # sum_k ||x_k||
    gamma2: float  # sum_k ||x_k||^2
    epsilon: float
    delta: float
    sigma_z: float = 1.0
    c0: float = 2.0

    def __post_init__(self):
        if self.L < 1 or self.K < 1:
            raise ValueError("L and K must be at least 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("gamma1 and gamma2 must be positive")
        if self.c0 <= 1:
            raise ValueError("c0 must exceed 1")
        if self.sigma_z < 0:
            raise ValueError("sigma_z must be non-negative")

    @classmethod
    def unit_symbols(cls, L, K, epsilon, delta, sigma_z=1.0, c0=2.0) -> "BoundInputs":
        """Every node sends a unit-norm vector, so gamma1 = gamma2 = K."""
        return cls(L, K, float(K), float(K), epsilon, delta, sigma_z, c0)

    @property
    def log_term(self) -> float:
        return math.log(2 * self.K * (self.L + 1) / self.delta)


def receive_antennas_raw(b: BoundInputs) -> float:
    """Unrounded first branch ``L K g1^2 g2 / eps^2 * ln(2K(L+1)/delta)``."""
    return b.L * b.K * b.gamma1**2 * b.gamma2 / b.epsilon**2 * b.log_term


def min_receive_antennas(b: BoundInputs) -> int:
    """Smallest N_r meeting the sufficient condition for ``||r - r_hat|| <= eps``."""
    return math.ceil(max(receive_antennas_raw(b), b.L))


def antenna_product_raw(b: BoundInputs) -> float:
    return b.gamma1**2 * b.gamma2 * b.sigma_z**2 * b.c0 / b.epsilon**2 * b.log_term


def min_antenna_product(b: BoundInputs) -> int:
    """Smallest N_r * N_t when the transmit-antenna condition is folded in."""
    return math.ceil(b.L * b.K * max(antenna_product_raw(b), b.L))


def min_transmit_antennas(b: BoundInputs) -> int:
    """``N_t >= max(sigma_z^2, L)`` accompanies the receive-antenna bound."""
    return max(math.ceil(b.sigma_z**2), b.L)


@dataclass
class TailReport:
    p_total: float
    p_sig: float
    p_inter: float
    p_noise: float
    trials: int

    def binomial_slack(self, p: float, k: float = 3.0) -> float:
        return k * math.sqrt(p * (1 - p) / self.trials)


def empirical_tail_probability(scenario, epsilon: float, trials: int | None = None,
                               threads: int = 1) -> TailReport:
    """Fraction of trials with ``||r - r_hat|| <= epsilon``.

    The per-term fractions use ``epsilon / 3`` for each of the signal,
    interference and noise error norms; all three holding implies the total.
    """
    from .sim import run_trials

    if trials is not None:
        scenario = scenario.replace(trials=trials)
    if scenario.N_r is None:
        raise ValueError("the tail check needs a MIMO scenario (N_r set)")
    if scenario.trials < 100:
        raise ValueError("use at least 100 trials")
    recs = run_trials(scenario, threads=threads)
    err = np.array([np.linalg.norm(r.r - r.r_hat) for r in recs])
    third = epsilon / 3.0
    return TailReport(
        float(np.mean(err <= epsilon)),
        float(np.mean([r.e_sig <= third for r in recs])),
        float(np.mean([r.e_inter <= third for r in recs])),
        float(np.mean([r.e_noise <= third for r in recs])),
        len(recs),
    )


@dataclass
class EigenReport:
    N_r: int
    N_t: int
    trials: int
    lam_min: float
    lam_max: float
    envelope: tuple
    cross_norm_max: float
    cross_mean_max: float  # largest |entry| of the sample mean of H1^H H2 / (N_r sigma^2)
    cross_mean_limit: float  # 4 sample std / sqrt(trials)
    eig_ok: bool
    cross_ok: bool
    mean_ok: bool

    @property
    def ok(self) -> bool:
        return self.eig_ok and self.cross_ok and self.mean_ok

    def to_csv(self) -> str:
        keys = ["N_r", "N_t", "trials", "lam_min", "lam_max", "env_lo", "env_hi",
                "cross_norm_max", "cross_mean_max", "cross_mean_limit", "eig_ok", "cross_ok", "mean_ok"]
        vals = [self.N_r, self.N_t, self.trials, self.lam_min, self.lam_max, self.envelope[0],
                self.envelope[1], self.cross_norm_max, self.cross_mean_max, self.cross_mean_limit,
                self.eig_ok, self.cross_ok, self.mean_ok]
        out = [f"{v:.17g}" if isinstance(v, float) else str(v) for v in vals]
        return ",".join(keys) + "\n" + ",".join(out) + "\n"


def eigen_concentration_check(N_r: int, N_t: int, sigma: float = 1.0, trials: int = 100,
                              seed: int = 0, cross_limit: float = 0.2) -> EigenReport:
    """Spectrum of ``H^H H / (N_r sigma^2)`` against ``1 +- 3 sqrt(N_t/N_r)``, plus the
    cross term ``H_1^H H_2 / (N_r sigma^2)`` of two independent channels."""
    if N_r < N_t:
        raise ValueError("need N_r >= N_t")
    lo_all, hi_all, cross_max = np.inf, -np.inf, 0.0
    cross = np.empty((trials, N_t, N_t), dtype=complex)
    for t in range(trials):
        g = substream(seed, t, 0)
        H = crandn(g, (2, N_r, N_t), sigma**2)
        lam = np.linalg.eigvalsh(H[0].conj().T @ H[0] / (N_r * sigma**2))
        lo_all, hi_all = min(lo_all, lam[0]), max(hi_all, lam[-1])
        C = H[0].conj().T @ H[1] / (N_r * sigma**2)
        cross[t] = C
        cross_max = max(cross_max, float(np.linalg.norm(C, 2)))
    w = 3.0 * math.sqrt(N_t / N_r)
    env = (1.0 - w, 1.0 + w)
    mean = cross.mean(axis=0)
    if trials > 1:
        sd = np.sqrt(cross.real.std(axis=0, ddof=1) ** 2 + cross.imag.std(axis=0, ddof=1) ** 2)
        limit = 4.0 * sd / math.sqrt(trials)
    else:
        limit = np.full(mean.shape, np.inf)  # no spread estimate from one draw
    return EigenReport(
        N_r, N_t, trials, float(lo_all), float(hi_all), env, cross_max,
        float(np.max(np.abs(mean))), float(np.max(limit)),
        bool(env[0] <= lo_all and hi_all <= env[1]),
        bool(cross_max < cross_limit),
        bool(np.all(np.abs(mean) <= limit)),
    )
