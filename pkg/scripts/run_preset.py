"""Run a named preset and print the NMSE table; CSVs land in --outdir."""
import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from otacomp import presets
from otacomp.sim import run_sweep, write_csv


@dataclass
class RunConfig:
    preset: str
    outdir: Path = Path("results")
    seed: int = presets.DEFAULT_SEED
    trials: int | None = None
    threads: int = 1


def run(cfg: RunConfig):
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    out = {}
    for spec in presets.get(cfg.preset, seed=cfg.seed, trials=cfg.trials):
        t0 = time.perf_counter()
        res = run_sweep(spec, threads=cfg.threads)
        res.meta["preset"] = cfg.preset
        write_csv(res, cfg.outdir / f"{cfg.preset}-{spec.curve}.csv")
        print(f"{spec.curve:>8}  " + "  ".join(f"{v}:{m:.4g}" for v, m in zip(res.values, res.nmse_mean))
              + f"  ({time.perf_counter() - t0:.0f}s)")
        out[spec.curve] = res
    return out


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("preset", choices=sorted(presets.PRESETS))
    p.add_argument("--outdir", type=Path, default=Path("results"))
    p.add_argument("--seed", type=int, default=presets.DEFAULT_SEED)
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int, default=1)
    run(RunConfig(**vars(p.parse_args())))
