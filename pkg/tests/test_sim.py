import random

import numpy as np
import pytest

from otacomp import presets
from otacomp.sim import (ConfigError, ScenarioConfig, SweepSpec, TrialRecord, baseline_wideband,
                         nmse, nmse_from_arrays, read_csv, run_sweep, run_trial, run_trials,
                         to_csv, write_csv)


def rec(target, est, i=0):
    t, e = np.asarray(target, complex), np.asarray(est, complex)
    return TrialRecord(i, t, e, t, e)


def test_nmse_exact_is_zero():
    assert nmse([rec([1, 2], [1, 2]), rec([3, 0], [3, 0])], "function-power") == 0


def test_nmse_single_record():
    assert nmse([rec([1, 0], [0, 0])], "sum-symbol-power") == 1.0


def test_nmse_mean_ratio():
    m, _ = nmse_from_arrays([0.0, 2.0], [2.0, 2.0])
    assert m == 0.5


def test_nmse_errors():
    with pytest.raises(ValueError):
        nmse([], "function-power")
    with pytest.raises(ValueError):
        nmse([rec([0, 0], [1, 0])], "function-power")
    with pytest.raises(ValueError):
        nmse([rec([1], [1])], "bogus")


def cfg(**kw):
    base = dict(K=2, Q=4, L=4, snr_db=None, trials=20, codec="qam-conv", seed=11)
    base.update(kw)
    return ScenarioConfig(**base)


@pytest.mark.parametrize("codec,extra", [
    ("qam-conv", {}), ("pam-affine", {}), ("sdp", dict(function="product,max,sum,mean", Q=3)),
    ("exact", dict(function="random", L=2, Q=3)),
])
def test_noiseless_identity_channel(codec, extra):
    c = cfg(codec=codec, **extra)
    for r in run_trials(c):
        assert np.array_equal(r.f_true, r.f_hat)


def test_qam16_high_snr_almost_always_exact():
    c = cfg(snr_db=30.0, trials=2000)
    zero = sum(np.array_equal(r.f_true, r.f_hat) for r in run_trials(c))
    assert zero >= 0.99 * c.trials


def test_rerun_bit_identical():
    c = cfg(snr_db=10.0, N_r=16, N_t=4)
    a, b = run_trial(c, 5), run_trial(c, 5)
    assert np.array_equal(a.r_hat, b.r_hat) and np.array_equal(a.f_hat, b.f_hat)


def test_threads_agree():
    c = cfg(snr_db=10.0, N_r=16, N_t=4, trials=30)
    one, many = run_trials(c, threads=1), run_trials(c, threads=4)
    assert all(np.array_equal(x.r_hat, y.r_hat) for x, y in zip(one, many))


def test_trial_order_independent():
    c = cfg(snr_db=5.0, trials=40)
    recs = run_trials(c)
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    # trials are keyed by index, so a late batch equals the tail of a long run
    tail = run_trials(c.replace(trials=10), start=30)
    assert nmse(recs, "function-power") == nmse(sorted(shuffled, key=lambda r: r.trial), "function-power")
    assert all(np.array_equal(a.f_hat, b.f_hat) for a, b in zip(recs[30:], tail))


def test_one_point_sweep_matches_nmse():
    c = cfg(snr_db=8.0, trials=50)
    res = run_sweep(SweepSpec(c, "snr_db", (8.0,), "x"), keep_records=True)
    assert res.nmse_mean[0] == nmse(res.records[0], "function-power")


def test_sweep_empty_axis():
    with pytest.raises(ConfigError):
        run_sweep(SweepSpec(cfg(), "snr_db", ()))


def test_sweep_error_carries_point():
    with pytest.raises(ConfigError, match="N_r=1"):
        run_sweep(SweepSpec(cfg(N_r=8, N_t=4), "N_r", (8, 1)))


def test_baseline_noiseless_exact():
    res = baseline_wideband(cfg(codec="sdp", function="product,max,sum,mean", Q=3))
    assert res.nmse_mean[0] == 0
    assert res.meta["channel_uses"] == 2


def test_baseline_low_snr_finite():
    res = baseline_wideband(cfg(codec="exact", function="sum", L=1, Q=3, snr_db=-5.0, trials=200))
    assert 0 < res.nmse_mean[0] < np.inf


def test_raw_sum_power_normalization():
    c = ScenarioConfig(K=5, Q=4, L=3, snr_db=None, trials=5, codec="raw-sum", seed=1)
    for r in run_trials(c):
        assert np.allclose(r.r, r.r_hat)
        assert r.tx_power == pytest.approx(1.0)


def test_csv_format(tmp_path):
    c = cfg(snr_db=10.0, trials=10)
    res = run_sweep(SweepSpec(c, "snr_db", (10.0, 20.0), "QAM16"))
    p = tmp_path / "o.csv"
    write_csv(res, p)
    meta, rows = read_csv(p)
    assert meta["seed"] == "11" and meta["snr_db"] == "swept" and meta["curve"] == "QAM16"
    assert meta["normalization"] == "function-power"
    lines = p.read_text().splitlines()
    assert lines[[i for i, ln in enumerate(lines) if not ln.startswith("#")][0]] == \
        "snr_db,nmse_mean,nmse_stderr,trials"
    assert [r[0] for r in rows] == [10.0, 20.0]
    assert rows[0][1] == float(f"{res.nmse_mean[0]:.17g}")
    assert to_csv(res) == p.read_text()


def test_power_cap_enforced():
    with pytest.raises(ConfigError, match="power"):
        run_trial(cfg(snr_db=10.0, p_max=1e-3), 0)


@pytest.mark.parametrize("bad", [
    dict(N_r=8), dict(N_r=8, N_t=2), dict(codec="nope"), dict(codec="sdp", function="sum"),
    dict(codec="raw-sum", baseline=True), dict(kernel=(1, 2)), dict(alpha_corr=1.0),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        cfg(**bad)


def test_missing_transmit_antennas_message():
    with pytest.raises(ConfigError, match="missing: N_t"):
        cfg(N_r=8)


def test_stream_count_message():
    with pytest.raises(ConfigError, match="stream-count"):
        cfg(N_r=8, N_t=2)


def test_presets_are_pinned():
    for name in presets.PRESETS:
        specs = presets.get(name, trials=3)
        assert specs and all(s.base.trials == 3 for s in specs)
        assert len({s.curve for s in specs}) == len(specs)
    f2 = presets.fig2()
    assert [s.base.L for s in f2] == [2, 4, 8] and f2[0].values == (10, 20, 30, 40, 50)
    assert presets.fig3()[0].values == tuple(range(4, 33, 4))
    assert [s.curve for s in presets.fig5_caption()] == ["PAM64", "PAM256", "PAM1024"]
    assert [s.curve for s in presets.fig6()] == ["QAM16", "QAM64", "QAM256"]
    with pytest.raises(KeyError):
        presets.get("fig9")
