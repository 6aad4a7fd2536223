"""Named sweeps with every parameter pinned.

Each preset is a list of :class:`SweepSpec`, one per curve.

fig2          sum of unit-norm vectors, K=100, N_t=L, 20 dB, N_r 10..50, L in {2,4,8}
fig3          sum of unit-norm vectors, N_t=L=4, 5 dB, K 4..32, N_r in {128,512,2048}
fig4          product/mean/max/sum-of-squares SDP codec over the noisy MAC vs the
              orthogonal wideband baseline, K=3, Q=4, SNR -5..25 dB
fig5-text     PAM affine map, K=50, L=5, Q=Q_k in {4,8,16,32}, SNR 10..30 dB
fig5-caption  PAM affine map, K=10, L=10, Q=Q_k in {8,16,32} (aggregate orders
              Q*Q_k = 64/256/1024), SNR 10..30 dB
fig6          QAM convolution, K=2, L=4, Q in {4,8,16} (Q^2 = 16/64/256), SNR 5..30 dB
"""
from __future__ import annotations

from .sim import ScenarioConfig, SweepSpec

DEFAULT_SEED = 20240601


def fig2(seed=DEFAULT_SEED, trials=1000):
    out = []
    for L in (2, 4, 8):
        base = ScenarioConfig(K=100, Q=4, L=L, snr_db=20.0, trials=trials, codec="raw-sum",
                              seed=seed, N_r=10, N_t=L)
        out.append(SweepSpec(base, "N_r", (10, 20, 30, 40, 50), f"L{L}"))
    return out


def fig3(seed=DEFAULT_SEED, trials=10_000, n_r=(128, 512, 2048)):
    out = []
    for N_r in n_r:
        base = ScenarioConfig(K=4, Q=4, L=4, snr_db=5.0, trials=trials, codec="raw-sum",
                              seed=seed, N_r=N_r, N_t=4)
        out.append(SweepSpec(base, "K", tuple(range(4, 33, 4)), f"Nr{N_r}"))
    return out


def fig4(seed=DEFAULT_SEED, trials=2000):
    snr = tuple(float(s) for s in range(-5, 26, 5))
    base = ScenarioConfig(K=3, Q=4, L=4, snr_db=0.0, trials=trials, codec="sdp", seed=seed,
                          function="product,mean,max,sum-of-squares")
    return [SweepSpec(base, "snr_db", snr, "veccomp"),
            SweepSpec(base.replace(baseline=True), "snr_db", snr, "wideband")]


def fig5_text(seed=DEFAULT_SEED, trials=5000):
    snr = tuple(float(s) for s in range(10, 31, 5))
    return [
        SweepSpec(ScenarioConfig(K=50, Q=Q, L=5, snr_db=10.0, trials=trials, codec="pam-affine",
                                 seed=seed, Q_coef=Q), "snr_db", snr, f"Q{Q}")
        for Q in (4, 8, 16, 32)
    ]


def fig5_caption(seed=DEFAULT_SEED, trials=5000):
    snr = tuple(float(s) for s in range(10, 31, 5))
    return [
        SweepSpec(ScenarioConfig(K=10, Q=Q, L=10, snr_db=10.0, trials=trials, codec="pam-affine",
                                 seed=seed, Q_coef=Q), "snr_db", snr, f"PAM{Q * Q}")
        for Q in (8, 16, 32)
    ]


def fig6(seed=DEFAULT_SEED, trials=10_000):
    snr = tuple(float(s) for s in range(5, 31, 5))
    return [
        SweepSpec(ScenarioConfig(K=2, Q=Q, L=4, snr_db=5.0, trials=trials, codec="qam-conv",
                                 seed=seed), "snr_db", snr, f"QAM{Q * Q}")
        for Q in (4, 8, 16)
    ]


PRESETS = {
    "fig2": fig2,
    "fig3": fig3,
    "fig4": fig4,
    "fig5-text": fig5_text,
    "fig5-caption": fig5_caption,
    "fig6": fig6,
}


def get(name: str, seed: int | None = None, trials: int | None = None):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    kw = {}
    if seed is not None:
        kw["seed"] = seed
    if trials is not None:
        kw["trials"] = trials
    return PRESETS[name](**kw)
