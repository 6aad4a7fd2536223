"""Flat ``key = value`` config files.

Values are Python literals (``4``, ``20.0``, ``None``, ``(1, 2)``, ``True``);
anything that does not parse as a literal is taken as a bare string, so
``codec = sdp`` works without quotes. ``#`` starts a comment.
"""
from __future__ import annotations

import ast
import dataclasses

from .bounds import BoundInputs
from .sim import ConfigError, ScenarioConfig

# accepted value types per field; "tuple" fields may be nested
_SCENARIO_TYPES = {
    "K": int, "Q": int, "L": int, "snr_db": (float, None), "trials": int, "codec": str,
    "seed": int, "N_r": (int, None), "N_t": (int, None), "Q_list": (tuple, None),
    "function": str, "coeffs": (tuple, None), "offsets": (tuple, None),
    "Q_coef": (int, None), "kernel": (tuple, None), "function_seed": int,
    "alpha_corr": float, "sigma_h": float, "beamformer": str, "baseline": bool,
    "nmse_mode": (str, None), "n_candidates": int, "p_max": float,
}
SCENARIO_REQUIRED = ("K", "Q", "L", "snr_db", "trials", "codec", "seed")

_BOUND_TYPES = {
    "L": int, "K": int, "gamma1": (float, None), "gamma2": (float, None), "epsilon": float,
    "delta": float, "sigma_z": float, "c0": float,
}
BOUND_REQUIRED = ("L", "K", "epsilon", "delta")


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        yield lineno, key, val


def _literal(val: str):
    try:
        return ast.literal_eval(val)
    except (ValueError, SyntaxError):
        return val


def _freeze(v):
    if isinstance(v, list):
        v = tuple(v)
    if isinstance(v, tuple):
        return tuple(_freeze(x) for x in v)
    return v


def _coerce(key, v, types, lineno):
    allowed = types if isinstance(types, tuple) else (types,)
    if v is None:
        if None in allowed:
            return None
    else:
        v = _freeze(v)
        for t in allowed:
            if t is None:
                continue
            if t is float and isinstance(v, (int, float)) and not isinstance(v, bool):
                return float(v)
            if t is int and isinstance(v, int) and not isinstance(v, bool):
                return v
            if t is bool and isinstance(v, bool):
                return v
            if t is str and isinstance(v, str):
                return v
            if t is tuple and isinstance(v, tuple):
                return v
            if t is tuple and isinstance(v, int) and not isinstance(v, bool):
                return (v,)
    names = " or ".join("None" if t is None else t.__name__ for t in allowed)
    raise ConfigError(f"line {lineno}: {key} expects {names}, got {v!r}")


def _parse(text, types, required):
    seen, values = {}, {}
    for lineno, key, raw in _tokens(text):
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: {key} already set on line {seen[key]}")
        seen[key] = lineno
        values[key] = _coerce(key, _literal(raw), types[key], lineno)
    missing = [k for k in required if k not in values]
    if missing:
        raise ConfigError("missing: " + ", ".join(missing))
    return values


def parse_scenario(text: str, seed: int | None = None) -> ScenarioConfig:
    values = _parse(text, _SCENARIO_TYPES, SCENARIO_REQUIRED)
    if seed is not None:
        values["seed"] = int(seed)
    if not 0 <= values["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit value")
    try:
        return ScenarioConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def parse_bound(text: str) -> BoundInputs:
    v = _parse(text, _BOUND_TYPES, BOUND_REQUIRED)
    K = v["K"]
    v.setdefault("gamma1", None)
    v.setdefault("gamma2", None)
    if v["gamma1"] is None:
        v["gamma1"] = float(K)
    if v["gamma2"] is None:
        v["gamma2"] = float(K)
    try:
        return BoundInputs(**v)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def parse_config(text: str, kind: str = "scenario", seed: int | None = None):
    """Parse ``text`` as a ``scenario`` or ``bound`` config."""
    if kind == "scenario":
        return parse_scenario(text, seed)
    if kind == "bound":
        return parse_bound(text)
    raise ValueError(f"unknown config kind {kind!r}")


def _render(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        # quote strings that would otherwise read back as a literal
        return repr(v) if _literal(v) != v or "#" in v or v != v.strip() else v
    return repr(v)


def serialize(cfg) -> str:
    """Inverse of :func:`parse_config` for scenarios and bound inputs."""
    lines = [f"{f.name} = {_render(getattr(cfg, f.name))}" for f in dataclasses.fields(cfg)]
    return "\n".join(lines) + "\n"


def load(path, kind: str = "scenario", seed: int | None = None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), kind, seed)


_EIGEN_TYPES = {"N_r": int, "N_t": int, "sigma": float, "trials": int, "seed": int}
EIGEN_REQUIRED = ("N_r", "N_t")


def parse_eigen_check(text: str, seed: int | None = None) -> dict:
    v = _parse(text, _EIGEN_TYPES, EIGEN_REQUIRED)
    v.setdefault("sigma", 1.0)
    v.setdefault("trials", 100)
    v.setdefault("seed", 0)
    if seed is not None:
        v["seed"] = int(seed)
    return v


def parse_tail_check(text: str, seed: int | None = None):
    """A scenario plus ``epsilon`` (and optionally ``delta`` for the pass line)."""
    extra = {"epsilon": float, "delta": (float, None)}
    kept, picked = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        key = line.split("=", 1)[0].strip() if "=" in line else None
        if key in extra:
            picked[key] = _coerce(key, _literal(line.split("=", 1)[1].strip()), extra[key], lineno)
            kept.append("")
        else:
            kept.append(raw)
    if "epsilon" not in picked:
        raise ConfigError("missing: epsilon")
    return parse_scenario("\n".join(kept), seed), picked["epsilon"], picked.get("delta")
