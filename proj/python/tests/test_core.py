import itertools
import math

import numpy as np
import pytest

import tfqudit as tq


def f2_brute(tt, ff):
    d = tt.shape[0]
    cross = 0.0
    for m, mp, n, np_ in itertools.product(range(d), repeat=4):
        if m == mp or m == n or n == np_ or np_ == mp:
            continue
        if (m - mp - n + np_) % d:
            continue
        cross += math.sqrt(tt[mp, np_] * tt[m, n]) / d
    return np.trace(ff) - tt.sum() / d - cross


def random_dist(rng, d):
    p = rng.random((d, d))
    return p / p.sum()


def test_schmidt_number():
    assert tq.certify_schmidt_number(0.654, 1021) == 668
    assert tq.certify_schmidt_number(1.0, 16) == 16
    assert tq.certify_schmidt_number(0.01, 16) == 1


def test_f2_tilde_against_python_loop():
    rng = np.random.default_rng(5)
    for d in (2, 3, 5):
        tt, ff = random_dist(rng, d), random_dist(rng, d)
        assert tq.f2_tilde(tt, ff) == pytest.approx(f2_brute(tt, ff), abs=1e-12)
    ideal = np.eye(6) / 6
    assert tq.f2_tilde(ideal, ideal) == pytest.approx(1 - 1 / 6)


def test_entropy_and_delta_m():
    p = np.array([[0.45, 0.05], [0.05, 0.45]])
    assert tq.conditional_entropy(p) == pytest.approx(0.469, abs=1e-3)
    assert tq.delta_m(np.full((7, 7), 1 / 49)) <= 1e-15
    assert tq.delta_m(np.eye(2) / 2) == pytest.approx(0.25)


def test_certify_report():
    ideal = np.eye(8, dtype=float) / 8
    r = tq.certify(ideal, ideal)
    assert r["f_tilde"] == pytest.approx(1.0)
    assert r["d_ent"] == 8
    assert r["e_d"] == pytest.approx(3.0)


def test_assess_mub():
    rng = np.random.default_rng(1)
    counts = rng.poisson(200, size=(9, 9)).astype(np.uint64)
    a = tq.assess_mub(counts)
    assert a["verdict"] == "adopted"
    assert a["max_overlap"] == pytest.approx(1 / 9)
    empty = tq.assess_mub(np.zeros((4, 4), dtype=np.uint64))
    assert empty["verdict"] == "insufficient_data"


def test_simulate_and_bin():
    streams, cfg = tq.simulate("ideal", seed=4, overrides={"duration_s": 0.05, "source": {"pair_rate": 2e5}})
    assert cfg["duration_s"] == 0.05
    assert set(streams) == {0, 1, 2, 3}
    again, _ = tq.simulate("ideal", seed=4, overrides={"duration_s": 0.05, "source": {"pair_rate": 2e5}})
    assert np.array_equal(streams[tq.ALICE_TIME], again[tq.ALICE_TIME])

    full = tq.bin_full_frame(streams[tq.ALICE_TIME], streams[tq.BOB_TIME], 200, 256, 0.05)
    assert full.shape == (256, 256)
    assert np.trace(full) / full.sum() > 0.99
    sub = tq.subspace_extract(full, 16)
    assert sub.shape == (16, 16)


def test_key_rate_ordering():
    proto = {"n_total": 1e10, "q": 0.05}
    rates = {r: tq.key_rate(8, 0.97, 0.3, regime=r, protocol=proto)["ell"]
             for r in ("asymptotic", "collective", "coherent")}
    assert rates["coherent"] <= rates["collective"] <= rates["asymptotic"]
    assert tq.hoeffding_mu(1e6, 0.5e-10) == pytest.approx(6.99e-3, rel=0.01)
    assert tq.h_min(1.0, 0.0, 16) == pytest.approx(4.0)
    assert tq.asymptotic_rate(1.0, 0.0, 4) == pytest.approx(2.0)


def test_analyze_matrices():
    tt = (np.eye(4) * 500).astype(np.uint64)
    r = tq.analyze(tt, tt, config={"bootstrap_enabled": False})
    assert r["ok"]
    assert r["witness"]["d_ent"] == 4


def test_errors():
    with pytest.raises(tq.ConfigError):
        tq.simulate("nonsense")
    with pytest.raises(tq.ConfigError):
        tq.key_rate(4, 0.9, 0.1, regime="quantum")
    with pytest.raises(tq.DataError):
        tq.certify(np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(tq.NumericError):
        tq.h_min(0.005, 0.01, 4)
    with pytest.raises(tq.NumericError):
        tq.h_min(float("nan"), 0.0, 4)
    assert issubclass(tq.DataError, tq.TfqError)
