"""Seeded Monte Carlo harness: codecs over the fading MAC, NMSE and sweeps.

Every trial draws its inputs, channels, beamformers and noise from
substreams keyed by ``(seed, trial, role, node)``, so a trial's outcome does
not depend on which other trials ran, in what order, or on how many threads.
"""
from __future__ import annotations

import dataclasses
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .channel import DISTRIBUTIONS, ChannelRealization, draw_beamformers, transmit_and_combine
from .closed_form import AffineSpec, ConvSpec, conv_function_spec, pam_codec, qam_codec
from .codec import Codec
from .design import design_codec
from .field import NAMED_FUNCTIONS, random_table, stacked, tabulate_function
from .rng import crandn, substream

CODECS = ("sdp", "exact", "pam-affine", "qam-conv", "raw-sum")
NMSE_MODES = ("sum-symbol-power", "function-power")
SNR_DEFINITION = "1/sigma_z^2 with unit mean per-node symbol power"


class ConfigError(ValueError):
    """Invalid or inconsistent scenario."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation point. ``N_r=None`` bypasses the fading channel (y = sum x + z)."""

    K: int
    Q: int
    L: int
    snr_db: float | None
    trials: int
    codec: str
    seed: int
    N_r: int | None = None
    N_t: int | None = None
    Q_list: tuple | None = None
    function: str = "sum"
    coeffs: tuple | None = None
    offsets: tuple | None = None
    Q_coef: int | None = None
    kernel: tuple | None = None
    function_seed: int = 0
    alpha_corr: float = 0.0
    sigma_h: float = 1.0
    beamformer: str = "semi-unitary"
    baseline: bool = False
    nmse_mode: str | None = None
    n_candidates: int = 1000
    p_max: float = 1e6

    def __post_init__(self):
        validate(self)

    @property
    def sigma_z(self) -> float:
        return 0.0 if self.snr_db is None else 10.0 ** (-self.snr_db / 20.0)

    @property
    def mode(self) -> str:
        if self.nmse_mode is not None:
            return self.nmse_mode
        return "sum-symbol-power" if self.codec == "raw-sum" else "function-power"

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(self.Q_list) if self.Q_list is not None else (self.Q,) * self.K

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


def validate(c: ScenarioConfig) -> None:
    if c.K < 1 or c.L < 1:
        raise ConfigError("K and L must be at least 1")
    if c.Q < 2:
        raise ConfigError("Q must be at least 2")
    if c.trials < 1:
        raise ConfigError("trials must be at least 1")
    if c.codec not in CODECS:
        raise ConfigError(f"codec must be one of {', '.join(CODECS)}")
    if c.nmse_mode is not None and c.nmse_mode not in NMSE_MODES:
        raise ConfigError(f"nmse_mode must be one of {', '.join(NMSE_MODES)}")
    if c.beamformer not in DISTRIBUTIONS:
        raise ConfigError(f"beamformer must be one of {', '.join(DISTRIBUTIONS)}")
    if c.N_r is not None:
        if c.N_t is None:
            raise ConfigError("missing: N_t")
        if c.N_r < 1 or c.N_t < 1:
            raise ConfigError("N_r and N_t must be at least 1")
        if c.L > min(c.N_r, c.N_t):
            raise ConfigError(
                f"stream-count constraint violated: L={c.L} exceeds min(N_r, N_t)="
                f"{min(c.N_r, c.N_t)}; each output stream needs its own spatial dimension"
            )
    if not 0.0 <= c.alpha_corr < 1.0:
        raise ConfigError("alpha_corr must lie in [0, 1)")
    if c.sigma_h <= 0:
        raise ConfigError("sigma_h must be positive")
    if c.Q_list is not None:
        if len(c.Q_list) != c.K or min(c.Q_list) < 2:
            raise ConfigError("Q_list needs K entries, each at least 2")
        if c.codec not in ("sdp", "exact"):
            raise ConfigError("Q_list applies only to designed codecs (sdp, exact)")
    if c.baseline and c.codec == "raw-sum":
        raise ConfigError("the wideband baseline needs a finite codebook; raw-sum has none")
    if c.codec in ("sdp", "exact"):
        if not c.function.startswith("random"):
            bad = [n for n in c.function.split(",") if n not in NAMED_FUNCTIONS]
            if bad:
                raise ConfigError(f"unknown function {bad[0]!r}; known: {', '.join(NAMED_FUNCTIONS)}")
            if len(c.function.split(",")) != c.L:
                raise ConfigError(f"function lists {len(c.function.split(','))} outputs but L={c.L}")
    if c.codec == "pam-affine" and c.coeffs is not None:
        A = np.asarray(c.coeffs)
        if A.shape != (c.L, c.K):
            raise ConfigError(f"coeffs must be an L x K = {c.L} x {c.K} nested list")
    if c.codec == "qam-conv" and c.kernel is not None and len(c.kernel) != c.L + c.K - 1:
        raise ConfigError(f"kernel length must be L + K - 1 = {c.L + c.K - 1}")


# ---------------------------------------------------------------------------
# codec preparation

@dataclass
class Prepared:
    codec: Codec | None
    scale: float  # transmitted symbols are scale * codebook entries
    evaluate: object  # S (T, K) -> (T, L) true function values


def affine_spec(c: ScenarioConfig) -> AffineSpec:
    qc = c.Q_coef or c.Q
    if c.coeffs is not None:
        A = np.asarray(c.coeffs, dtype=int)
        b = np.asarray(c.offsets if c.offsets is not None else [0] * c.L, dtype=int)
        return AffineSpec(A, b, c.Q, (qc,) * c.K)
    spec = AffineSpec.random(c.K, c.L, c.Q, (qc,) * c.K, rng=np.random.default_rng(c.function_seed))
    if c.offsets is not None:
        spec = AffineSpec(spec.A, np.asarray(c.offsets, dtype=int), spec.Q, spec.Q_list)
    return spec


def conv_spec(c: ScenarioConfig) -> ConvSpec:
    if c.kernel is not None:
        return conv_function_spec(c.kernel, c.K, c.Q)
    a = np.random.default_rng(c.function_seed).integers(0, c.Q, size=c.L + c.K - 1)
    return conv_function_spec(a, c.K, c.Q)


def function_table(c: ScenarioConfig):
    if c.function.startswith("random"):
        levels = int(c.function.split(":")[1]) if ":" in c.function else 8
        return random_table(c.K, c.input_sizes, c.L, levels, np.random.default_rng(c.function_seed))
    return tabulate_function(stacked(c.function.split(",")), c.K, c.input_sizes, c.L)


def _codec_key(c: ScenarioConfig):
    return (c.codec, c.K, c.Q, c.L, c.Q_list, c.function, c.coeffs, c.offsets, c.Q_coef,
            c.kernel, c.function_seed, c.n_candidates)


def _build(c: ScenarioConfig) -> Prepared:
    if c.codec == "raw-sum":
        return Prepared(None, 1.0, None)
    if c.codec == "pam-affine":
        spec = affine_spec(c)
        codec, ev = pam_codec(spec), spec.evaluate
    elif c.codec == "qam-conv":
        spec = conv_spec(c)
        codec, ev = qam_codec(spec), spec.evaluate
    else:
        table = function_table(c)
        codec = design_codec(table, c.codec, n_candidates=c.n_candidates, seed=c.function_seed)

        def ev(S, table=table):
            idx = np.zeros(len(S), dtype=np.int64)
            for q, col in zip(table.Q_list, np.asarray(S).T):
                idx = idx * q + col
            return table.values[idx]
    power = codec.mean_node_power()
    scale = 1.0 / math.sqrt(power) if power > 0 else 1.0
    return Prepared(codec, scale, ev)


_CACHE: dict = {}
_LOCK = threading.Lock()


def prepare(c: ScenarioConfig) -> Prepared:
    """Codec, transmit scale and ground-truth evaluator, built once per function."""
    key = _codec_key(c)
    with _LOCK:
        if key not in _CACHE:
            _CACHE[key] = _build(c)
        return _CACHE[key]


# ---------------------------------------------------------------------------
# trials

@dataclass
class TrialRecord:
    trial: int
    f_true: np.ndarray
    f_hat: np.ndarray
    r: np.ndarray
    r_hat: np.ndarray
    e_sig: float = float("nan")
    e_inter: float = float("nan")
    e_noise: float = float("nan")
    tx_power: float = 0.0
    channel_uses: int = 1


def draw_inputs(c: ScenarioConfig, trial: int) -> np.ndarray:
    g = substream(c.seed, trial, rngmod.INPUTS)
    if c.codec == "raw-sum":
        return g.integers(1, c.Q + 1, size=(c.K, c.L))
    return np.array([g.integers(0, q) for q in c.input_sizes], dtype=np.int64)


def _over_channel(c: ScenarioConfig, trial: int, x: np.ndarray):
    if c.N_r is None:
        z = crandn(substream(c.seed, trial, rngmod.NOISE), c.L, c.sigma_z**2)
        return x.sum(axis=0) + z, None
    H = crandn(substream(c.seed, trial, rngmod.CHANNEL), (c.K, c.N_r, c.N_t))
    if c.alpha_corr > 0:
        H0 = crandn(substream(c.seed, trial, rngmod.CHANNEL, c.K), (c.N_r, c.N_t))
        H = np.sqrt(c.alpha_corr) * H0[None] + np.sqrt(1 - c.alpha_corr) * H
    ch = ChannelRealization(c.sigma_h * H, np.full(c.K, c.sigma_h), c.alpha_corr)
    seeds = [rngmod.node_seed(c.seed, trial, k) for k in range(c.K)]
    bf = draw_beamformers(c.K, c.N_t, c.L, c.sigma_h, seeds, c.beamformer)
    z = crandn(substream(c.seed, trial, rngmod.NOISE), c.N_r, c.sigma_z**2)
    rx = transmit_and_combine(x, ch, bf, c.sigma_z, z=z)
    return rx.y, rx


def run_trial(c: ScenarioConfig, trial: int) -> TrialRecord:
    """Sample inputs, encode, transmit, decode. Deterministic in (config, trial)."""
    prep = prepare(c)
    S = draw_inputs(c, trial)
    if c.codec == "raw-sum":
        x = S / np.linalg.norm(S, axis=1, keepdims=True)
        x = x.astype(complex)
        r_hat, rx = _over_channel(c, trial, x)
        r = x.sum(axis=0)
        rec = TrialRecord(trial, r, r_hat, r, r_hat)
    else:
        x = prep.scale * prep.codec.symbols(S[None])[0]
        f_true = prep.evaluate(S[None])[0]
        if c.baseline:
            return _baseline_trial(c, trial, S, x, f_true, prep)
        r_hat, rx = _over_channel(c, trial, x)
        f_hat = prep.codec.decode(r_hat / prep.scale)
        rec = TrialRecord(trial, f_true, f_hat, x.sum(axis=0), r_hat)
    if rx is not None:
        rec.e_sig, rec.e_inter, rec.e_noise = rx.e_sig, rx.e_inter, rx.e_noise
        rec.tx_power = float(rx.tx_power.max())
    else:
        rec.tx_power = float(np.max(np.linalg.norm(x, axis=1)))
    if rec.tx_power > c.p_max:
        raise ConfigError(f"trial {trial}: power constraint active ({rec.tx_power:.3g} > p_max)")
    return rec


def _baseline_trial(c, trial, S, x, f_true, prep) -> TrialRecord:
    """Each node on its own AWGN channel; ML-decode its input, then evaluate f."""
    g = substream(c.seed, trial, rngmod.BASELINE_NOISE)
    s_hat = np.empty(c.K, dtype=np.int64)
    for k in range(c.K):
        book = prep.scale * prep.codec.encoders[k]
        yk = x[k] + crandn(g, c.L, c.sigma_z**2)
        s_hat[k] = int(np.argmin(np.sum(np.abs(book - yk[None, :]) ** 2, axis=1)))
    f_hat = prep.evaluate(s_hat[None])[0]
    return TrialRecord(trial, f_true, f_hat, x.sum(axis=0), x.sum(axis=0),
                       tx_power=float(np.max(np.linalg.norm(x, axis=1))), channel_uses=c.K)


def run_trials(c: ScenarioConfig, threads: int = 1, start: int = 0) -> list[TrialRecord]:
    prepare(c)  # design once, before any worker starts
    idx = range(start, start + c.trials)
    if threads <= 1:
        return [run_trial(c, t) for t in idx]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        recs = list(ex.map(lambda t: run_trial(c, t), idx))
    recs.sort(key=lambda r: r.trial)
    return recs


# ---------------------------------------------------------------------------
# metrics

def _errors(records, mode):
    if mode == "sum-symbol-power":
        err = np.array([np.sum(np.abs(r.r - r.r_hat) ** 2) for r in records])
        nrm = np.array([np.sum(np.abs(r.r) ** 2) for r in records])
    elif mode == "function-power":
        err = np.array([np.sum(np.abs(r.f_true - r.f_hat) ** 2) for r in records])
        nrm = np.array([np.sum(np.abs(r.f_true) ** 2) for r in records])
    else:
        raise ValueError(f"unknown normalization {mode!r}")
    return err, nrm


def nmse_from_arrays(err, nrm) -> tuple[float, float]:
    """Ratio of means and its delta-method standard error."""
    err = np.asarray(err, dtype=float)
    nrm = np.asarray(nrm, dtype=float)
    if err.size == 0:
        raise ValueError("need at least one record")
    den = nrm.mean()
    if den <= 0:
        raise ValueError("normalizer is zero")
    ratio = err.mean() / den
    if err.size < 2:
        return float(ratio), float("nan")
    resid = err - ratio * nrm
    se = resid.std(ddof=1) / (den * math.sqrt(err.size))
    return float(ratio), float(se)


def nmse(records, normalization: str = "sum-symbol-power") -> float:
    """Mean squared error over trials divided by the mean normalizer."""
    return nmse_from_arrays(*_errors(records, normalization))[0]


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class SweepSpec:
    base: ScenarioConfig
    axis: str
    values: tuple
    curve: str = ""


@dataclass
class SweepResult:
    axis: str
    values: list
    nmse_mean: list
    nmse_stderr: list
    trials: list
    meta: dict = field(default_factory=dict)
    records: list | None = None

    def rows(self):
        return list(zip(self.values, self.nmse_mean, self.nmse_stderr, self.trials))


def run_sweep(spec: SweepSpec, threads: int = 1, keep_records: bool = False) -> SweepResult:
    if len(spec.values) == 0:
        raise ConfigError("sweep axis has no values")
    means, ses, ns, recs = [], [], [], []
    for v in spec.values:
        try:
            cfg = spec.base.replace(**{spec.axis: v})
            records = run_trials(cfg, threads=threads)
        except ConfigError as e:
            raise ConfigError(f"{spec.axis}={v}: {e}") from e
        m, se = nmse_from_arrays(*_errors(records, cfg.mode))
        means.append(m)
        ses.append(se)
        ns.append(len(records))
        if keep_records:
            recs.append(records)
    meta = sweep_metadata(spec)
    return SweepResult(spec.axis, list(spec.values), means, ses, ns, meta, recs if keep_records else None)


def baseline_wideband(config: ScenarioConfig, threads: int = 1) -> SweepResult:
    """Orthogonal per-node transmission of the same codewords (K channel uses)."""
    cfg = config.replace(baseline=True)
    return run_sweep(SweepSpec(cfg, "snr_db", (cfg.snr_db,), "wideband"), threads=threads)


def sweep_metadata(spec: SweepSpec) -> dict:
    base = spec.base
    # every config field is echoed; the swept one is marked rather than given its base value
    meta = {f.name: ("swept" if f.name == spec.axis else getattr(base, f.name))
            for f in dataclasses.fields(base)}
    meta["axis"] = spec.axis
    meta["curve"] = spec.curve
    meta["normalization"] = base.mode
    meta["snr_definition"] = SNR_DEFINITION
    meta["channel_uses"] = base.K if base.baseline else 1
    return meta


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (tuple, list)):
        return "(" + ", ".join(_fmt(x) for x in v) + ("," if len(v) == 1 else "") + ")"
    return str(v)


def to_csv(result: SweepResult) -> str:
    lines = [f"#{k}={_fmt(v)}" for k, v in result.meta.items()]
    lines.append(f"{result.axis},nmse_mean,nmse_stderr,trials")
    for v, m, se, n in result.rows():
        lines.append(f"{_fmt(v)},{m:.17g},{se:.17g},{n}")
    return "\n".join(lines) + "\n"


def write_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(result))


def read_csv(path) -> tuple[dict, list[tuple]]:
    meta, rows = {}, []
    with open(path) as fh:
        body = [ln.rstrip("\n") for ln in fh]
    for ln in body:
        if ln.startswith("#"):
            k, v = ln[1:].split("=", 1)
            meta[k] = v
    data = [ln for ln in body if ln and not ln.startswith("#")][1:]
    for ln in data:
        a, m, se, n = ln.split(",")
        rows.append((float(a), float(m), float(se), int(n)))
    return meta, rows
