"""Command-line entry point.

    otacomp design   -f table.txt [-m sdp|exact] -o codec.json
    otacomp simulate -c scenario.cfg -o out.csv
    otacomp sweep    --preset fig2 -o out.csv
    otacomp bound    -c bound.cfg
    otacomp check    eigen|tail -c check.cfg

Relative output paths (and the defaults when ``-o`` is omitted) resolve
against ``$OTACOMP_OUTPUT_DIR`` if set.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import presets
from .bounds import (BoundInputs, eigen_concentration_check, empirical_tail_probability,
                     min_antenna_product, min_receive_antennas, min_transmit_antennas)
from .codec import InconsistentDesignError
from .design import DegenerateDesignError, RoundingError, design_codec
from .field import DomainError, FunctionTable, TableSizeError
from .sdp import ConvergenceError
from .sim import ConfigError, SweepSpec, baseline_wideband, run_sweep, write_csv

log = logging.getLogger("otacomp")

OUTPUT_ENV = "OTACOMP_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_DESIGN = 0, 2, 3, 4


def _out_path(arg: str | None, default: str) -> Path:
    p = Path(arg if arg is not None else default)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _read(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from e


def cmd_design(a) -> int:
    try:
        table = FunctionTable.from_text(_read(a.function))
    except (ValueError, DomainError, TableSizeError) as e:
        raise ConfigError(str(e)) from e
    codec = design_codec(table, a.method, n_candidates=a.candidates,
                         seed=a.seed if a.seed is not None else 0)
    out = _out_path(a.output, "codec.json")
    codec.save(out)
    log.info("wrote %s", out)
    return EXIT_OK


def cmd_simulate(a) -> int:
    cfg = cfgmod.parse_scenario(_read(a.config), seed=a.seed)
    if cfg.baseline:
        res = baseline_wideband(cfg, threads=a.threads)
    else:
        res = run_sweep(SweepSpec(cfg, "snr_db", (cfg.snr_db,), "point"), threads=a.threads)
    out = _out_path(a.output, "simulate.csv")
    write_csv(res, out)
    print(f"nmse={res.nmse_mean[0]:.6g} stderr={res.nmse_stderr[0]:.3g} trials={res.trials[0]}")
    return EXIT_OK


def cmd_sweep(a) -> int:
    specs = presets.get(a.preset, seed=a.seed, trials=a.trials)
    out = _out_path(a.output, f"{a.preset}.csv")
    for spec in specs:
        res = run_sweep(spec, threads=a.threads)
        res.meta["preset"] = a.preset
        path = out if len(specs) == 1 else out.with_name(f"{out.stem}-{spec.curve}{out.suffix}")
        write_csv(res, path)
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_bound(a) -> int:
    b: BoundInputs = cfgmod.parse_bound(_read(a.config))
    rows = [
        ("L", b.L), ("K", b.K), ("gamma1", b.gamma1), ("gamma2", b.gamma2),
        ("epsilon", b.epsilon), ("delta", b.delta), ("sigma_z", b.sigma_z), ("c0", b.c0),
        ("min_N_r", min_receive_antennas(b)),
        ("min_N_t", min_transmit_antennas(b)),
        ("min_N_r_N_t", min_antenna_product(b)),
    ]
    w = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {v}")
    return EXIT_OK


def cmd_check(a) -> int:
    text = _read(a.config)
    if a.which == "eigen":
        p = cfgmod.parse_eigen_check(text, seed=a.seed)
        rep = eigen_concentration_check(p["N_r"], p["N_t"], p["sigma"], p["trials"], p["seed"])
        body = rep.to_csv()
        ok = rep.ok
    else:
        scen, eps, delta = cfgmod.parse_tail_check(text, seed=a.seed)
        rep = empirical_tail_probability(scen, eps, threads=a.threads)
        keys = ["epsilon", "trials", "p_total", "p_sig", "p_inter", "p_noise"]
        vals = [eps, rep.trials, rep.p_total, rep.p_sig, rep.p_inter, rep.p_noise]
        body = ",".join(keys) + "\n" + ",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                                                for v in vals) + "\n"
        ok = True if delta is None else rep.p_total >= 1 - delta - rep.binomial_slack(1 - delta)
    if a.output:
        out = _out_path(a.output, "check.csv")
        out.write_text(body)
    sys.stdout.write(body)
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="otacomp", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=True):
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        if threads:
            sp.add_argument("--threads", type=int, default=1)

    d = sub.add_parser("design", help="design a codec from a function table")
    d.add_argument("-f", "--function", required=True)
    d.add_argument("-m", "--method", choices=("sdp", "exact"), default="sdp")
    d.add_argument("-o", "--output")
    d.add_argument("--candidates", type=int, default=1000)
    common(d, threads=False)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="run one scenario")
    s.add_argument("-c", "--config", required=True)
    s.add_argument("-o", "--output")
    common(s)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run a named preset")
    w.add_argument("--preset", required=True, choices=sorted(presets.PRESETS))
    w.add_argument("-o", "--output")
    w.add_argument("--trials", type=int, default=None, help="override the preset trial count")
    common(w)
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bound", help="antenna lower bounds")
    b.add_argument("-c", "--config", required=True)
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("check", help="Monte Carlo concentration checks")
    c.add_argument("which", choices=("eigen", "tail"))
    c.add_argument("-c", "--config", required=True)
    c.add_argument("-o", "--output")
    common(c)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: seed must be an unsigned 64-bit value", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (DegenerateDesignError, RoundingError, InconsistentDesignError) as e:
        print(f"design error: {e}", file=sys.stderr)
        return EXIT_DESIGN


if __name__ == "__main__":
    sys.exit(main())
