"""Counter-based random substreams.

Every random draw in a simulation is keyed by ``(seed, trial, role, node)``
so trials can run in any order, on any number of threads, and still produce
bit-identical results.
"""
from __future__ import annotations

import numpy as np

# role identifiers; stable integers so streams never shift between releases
INPUTS = 0
CHANNEL = 1
BEAMFORMER = 2
NOISE = 3
ROUNDING = 4
BASELINE_NOISE = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return a Philox generator for the substream ``key`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def node_seed(seed: int, trial: int, node: int) -> int:
    """Scalar seed a node would share with the receiver for its beamformer."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), BEAMFORMER, int(node)))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def crandn(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with per-entry variance ``var``."""
    scale = np.sqrt(var / 2.0)
    z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return scale * (z[..., 0] + 1j * z[..., 1])
