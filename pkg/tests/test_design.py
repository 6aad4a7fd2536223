import numpy as np
import pytest
from hypothesis import given, strategies as st

from otacomp.codec import Codec
from otacomp.design import (DegenerateDesignError, build_codec, constraint_rows,
                            design_codec, exact_design, extract_constellation, non_orth,
                            sdp_design, verify_lifted)
from otacomp.field import (NAMED_FUNCTIONS, alpha_vectors, build_omega, random_table, stacked,
                           tabulate_function)


def table(name, K, Q, L=1):
    return tabulate_function(stacked([name] * L), K, Q, L)


def noiseless_exact(codec, tab):
    S = tab.inputs
    return np.array_equal(codec.decode(codec.symbols(S).sum(axis=1)), tab.values)


# non_orth ------------------------------------------------------------------

def test_non_orth_single():
    v = np.array([1.0, 2.0 - 1j, 0.5j])
    y = non_orth([v])
    assert np.allclose(y, v)
    assert abs(np.vdot(v, y)) == pytest.approx(np.linalg.norm(v) ** 2)


def test_non_orth_orthonormal_pair():
    e1, e2 = np.eye(2)
    y = non_orth([e1, e2])
    assert np.allclose(y, e1 + e2)
    assert np.vdot(e1, y) == pytest.approx(1) and np.vdot(e2, y) == pytest.approx(1)


def test_non_orth_repeated():
    e1 = np.eye(3)[0]
    assert np.allclose(non_orth([e1, e1]), e1)


def test_non_orth_rejects_zero():
    with pytest.raises(ValueError):
        non_orth([np.zeros(3)])


@given(st.integers(1, 64), st.integers(1, 32), st.integers(0, 2**20), st.booleans())
def test_non_orth_property(P, n, seed, integer):
    rng = np.random.default_rng(seed)
    if integer:
        V = rng.integers(-1, 2, size=(P, n)).astype(complex)
        V = V[np.abs(V).sum(axis=1) > 0]
        if len(V) == 0:
            return
    else:
        V = rng.standard_normal((P, n)) + 1j * rng.standard_normal((P, n))
    y = non_orth(list(V))
    scale = np.linalg.norm(y) * np.linalg.norm(V, axis=1)
    assert np.all(np.abs(V.conj() @ y) > 1e-9 * scale)


# exact design --------------------------------------------------------------

def test_exact_single_pair():
    tab = table("sum", 1, 2)  # one pair, alpha = a_0 - a_1 = e1 - e2
    c = exact_design(tab, 0)
    alpha = alpha_vectors(tab, 0)[0].astype(float)
    assert np.allclose(np.abs(c.X), np.abs(alpha) / np.sqrt(2))
    assert abs(alpha @ c.X) == pytest.approx(np.sqrt(2))


def test_exact_constant_raises():
    tab = tabulate_function(lambda s: 1.0, 2, 2, 1)
    with pytest.raises(DegenerateDesignError):
        exact_design(tab, 0)


def test_exact_sum_decodes():
    tab = table("sum", 2, 2)
    c = exact_design(tab, 0)
    alphas, _ = constraint_rows(tab, 0, dedupe=False)
    assert len(alphas) == 5 and np.all(c.margins(alphas) > 1e-9)
    assert np.linalg.norm(c.X) == pytest.approx(1.0)
    assert noiseless_exact(design_codec(tab, "exact"), tab)


# SDP design ----------------------------------------------------------------

def test_sdp_sum_positive_and_verified():
    tab = table("sum", 2, 2)
    W, eps = sdp_design(tab, 0)
    alphas, gammas = constraint_rows(tab, 0)
    assert eps > 0
    chk = verify_lifted(W, eps, alphas, gammas, tol=1e-9)
    assert chk["psd"] and chk["trace"] and chk["pairs"]


def test_product_two_node_binary_is_computable():
    tab = table("product", 2, 2)
    codec = design_codec(tab, "sdp", seed=1)
    assert noiseless_exact(codec, tab)
    assert sorted(set(codec.decoders[0].labels.tolist())) == [0.0, 1.0]
    assert sum(v == 0 for v in tab.values[:, 0]) == 3


def test_single_constraint_eps_closed_form():
    tab = table("sum", 1, 2)  # gamma = 1, ||alpha||^2 = 2
    W, eps = sdp_design(tab, 0)
    assert eps == pytest.approx(2.0, rel=0.01)
    u = np.array([1.0, -1.0]) / np.sqrt(2)
    assert u @ W @ u == pytest.approx(1.0, abs=1e-6)


def test_constraint_rows_dedupe_keeps_max_gamma():
    tab = table("sum", 3, 3)
    a_all, g_all = constraint_rows(tab, 0, dedupe=False)
    a, g = constraint_rows(tab, 0)
    assert len(a) < len(a_all)
    for row, gam in zip(a, g):
        same = np.all(a_all == row, axis=1) | np.all(a_all == -row, axis=1)
        assert gam == g_all[same].max()


# rounding ------------------------------------------------------------------

def test_extract_rank_one():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x /= np.linalg.norm(x)
    alphas = np.array([[1.0, -1, 0, 0], [0, 1, -1, 0]])
    gammas = np.ones(2)
    W = np.outer(x, x.conj())
    eps = float(np.min(np.abs(alphas @ x) ** 2))
    c = extract_constellation(W, eps, alphas, gammas)
    phase = np.vdot(c.X, x)
    assert abs(abs(phase) - 1) < 1e-9
    assert np.allclose(c.X * phase, x)
    assert c.eps_star == pytest.approx(eps)


def test_extract_from_identity():
    tab = table("sum", 2, 2)
    alphas, gammas = constraint_rows(tab, 0)
    W = np.eye(tab.n) / tab.n
    c = extract_constellation(W, 0.0, alphas, gammas, n_candidates=1000, rng=0)
    assert c.eps_star > 0


def test_rank_two_relaxation_gap_direction():
    tab = table("max", 3, 2)
    W, eps = sdp_design(tab, 0)
    d = np.linalg.eigvalsh(W)[::-1]
    assert d[1] > 0.1  # genuinely higher rank
    alphas, gammas = constraint_rows(tab, 0)
    c = extract_constellation(W, eps, alphas, gammas, rng=0)
    assert 0 < c.eps_star <= eps + 1e-9


# codec assembly ------------------------------------------------------------

def test_sum_decoder_labels():
    tab = table("sum", 2, 2)
    codec = design_codec(tab, "exact")
    assert set(codec.decoders[0].labels.tolist()) <= {0.0, 1.0, 2.0}


def test_single_node_points_are_constellation():
    tab = table("max", 1, 4)
    codec = design_codec(tab, "sdp")
    assert np.allclose(np.sort_complex(codec.decoders[0].points),
                       np.sort_complex(codec.encoders[0][:, 0]))


def test_constant_stream_gets_constant_decoder():
    tab = tabulate_function(lambda s: [float(sum(s)), 7.0], 2, 2, 2)
    for method in ("sdp", "exact"):
        codec = design_codec(tab, method)
        assert noiseless_exact(codec, tab)
        assert np.all(codec.encoders[0][:, 1] == 0)


@pytest.mark.parametrize("method", ["sdp", "exact"])
def test_codec_json_roundtrip(method, tmp_path):
    tab = random_table(2, 3, 2, 4, np.random.default_rng(5))
    codec = design_codec(tab, method, seed=3)
    p = tmp_path / "c.json"
    codec.save(p)
    back = Codec.load(p)
    assert back == codec
    for a, b in zip(back.encoders, codec.encoders):
        assert np.array_equal(a, b)
    assert noiseless_exact(back, tab)


def test_design_is_seed_deterministic():
    tab = table("product", 3, 3)
    assert design_codec(tab, "sdp", seed=4) == design_codec(tab, "sdp", seed=4)


def test_build_codec_needs_one_per_stream():
    tab = table("sum", 2, 2, L=2)
    with pytest.raises(ValueError):
        build_codec([exact_design(tab, 0)], tab)


def test_named_functions_cover_brief():
    assert {"sum", "product", "max", "sum-of-squares"} <= set(NAMED_FUNCTIONS)
    om = build_omega(table("sum-of-squares", 2, 3), 0)
    assert len(om) > 0


@given(st.floats(0, 2 * np.pi), st.integers(0, 2**16))
def test_global_phase_invariance(theta, seed):
    tab = table("max", 2, 3)
    codec = design_codec(tab, "sdp")
    rng = np.random.default_rng(seed)
    y = codec.symbols(tab.inputs).sum(axis=1) + 0.05 * (rng.standard_normal((tab.M, 1))
                                                       + 1j * rng.standard_normal((tab.M, 1)))
    rot = np.exp(1j * theta)
    base = codec.decode(y)
    for d in codec.decoders:
        d.points = d.points * rot
    assert np.array_equal(codec.decode(y * rot), base)
