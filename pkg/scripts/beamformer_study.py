"""Gaussian vs semi-unitary random beamformers on the raw-sum experiments.

With i.i.d. Gaussian entries, V^H V / N_t fluctuates by O(sqrt(L/N_t)), and at
N_t = L = 4 that floor dominates the error regardless of N_r. Semi-unitary
beamformers keep the same per-entry variance with V^H V fixed, so only the
channel-side fluctuation remains.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from otacomp import presets
from otacomp.bounds import BoundInputs, empirical_tail_probability, min_receive_antennas
from otacomp.sim import ScenarioConfig, run_sweep


@dataclass
class StudyConfig:
    trials: int = 300
    seed: int = presets.DEFAULT_SEED


def main(cfg: StudyConfig):
    for dist in ("semi-unitary", "gaussian"):
        print(f"== {dist}")
        f2 = next(s for s in presets.fig2(cfg.seed, cfg.trials) if s.base.L == 4)
        f2.base = f2.base.replace(beamformer=dist)
        r = run_sweep(f2)
        print("  N_r 10..50 NMSE:", np.round(r.nmse_mean, 4), f"reduction {1 - r.nmse_mean[-1] / r.nmse_mean[0]:.1%}")
        f3 = presets.fig3(cfg.seed, cfg.trials, n_r=(512,))[0]
        f3.base = f3.base.replace(beamformer=dist)
        r = run_sweep(f3)
        m = np.array(r.nmse_mean)
        print("  K 4..32 NMSE:", np.round(m, 4), f"max/min {m.max() / m.min():.3f}")
        N_r = min_receive_antennas(BoundInputs.unit_symbols(2, 2, 0.5, 0.1))
        scen = ScenarioConfig(K=2, Q=4, L=2, snr_db=0.0, trials=max(cfg.trials, 100), codec="raw-sum",
                              seed=cfg.seed, N_r=N_r, N_t=2, beamformer=dist)
        rep = empirical_tail_probability(scen, 0.5)
        print(f"  bound instance N_r={N_r}: P(err<=0.5)={rep.p_total:.3f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--seed", type=int, default=presets.DEFAULT_SEED)
    main(StudyConfig(**vars(p.parse_args())))
