import math

import numpy as np
import pytest

import latticelab as ll


def test_identity_counts():
    eye = np.eye(3)
    assert ll.count_points(eye, 0.0) == 1
    assert ll.count_points(eye, 1.0) == 7
    assert ll.count_points(np.eye(2), 2.0) == 13


def brute_count(x, t):
    r = int(math.ceil(t / np.linalg.svd(x, compute_uv=False).min())) + 1
    rng = range(-r, r + 1)
    pts = np.array([(a, b) for a in rng for b in rng], dtype=float)
    return int(np.sum(np.linalg.norm(pts @ x.T, axis=1) <= t))


def test_count_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.uniform(-1.5, 1.5, size=(2, 2))
        if np.linalg.svd(x, compute_uv=False).min() < 0.2:
            continue
        for t in (1.0, 2.5, 4.0):
            assert ll.count_points(x, t) == brute_count(x, t)


def test_error_term():
    assert ll.error_term(np.eye(3), 1.0) == pytest.approx(7 - 4 * math.pi / 3)


def test_ball():
    assert ll.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert ll.hat_chi_ball(3, 0.0) == pytest.approx(4 * math.pi / 3)


def test_cn():
    c = ll.cn(3, 1e-10)
    assert c["value"] == pytest.approx(4.14030, abs=1e-5)
    assert c["tail_bound"] <= 1e-10
    assert ll.pair_count_cn(3) == pytest.approx(5.47373, abs=1e-5)
    with pytest.raises(ValueError):
        ll.cn(1)
    with pytest.raises(ValueError):
        ll.cn(3, 1e-20)
    with pytest.raises(ValueError):
        ll.pair_count_cn(2)


def test_haar_sample_is_unimodular_and_deterministic():
    a = ll.sample_haar(3, seed=7, stream=2)
    b = ll.sample_haar(3, seed=7, stream=2)
    assert abs(abs(np.linalg.det(a)) - 1.0) < 1e-10
    assert np.array_equal(a, b)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ll.count_points(np.zeros((3, 3)), 1.0)
    spec = {"n": 3, "k": [1, 1, 0], "l": [1, 2, 1], "signs": ["+", "+"], "eta": [1, 1, 1], "psi": [1, 2]}
    with pytest.raises(ll.ResolutionError):
        ll.oscillatory_integral(spec, 1e4)


def test_oscillatory_zero_frequency_is_weight_integral():
    spec = {"n": 3, "k": [1, 1, 0], "l": [1, 2, 1], "signs": ["+", "-"], "eta": [1, 1, 1], "psi": [1, 1.25]}
    value, error = ll.oscillatory_integral(spec, 0.0)
    assert value.imag == pytest.approx(0.0, abs=1e-12)
    assert value.real > 0
    assert error <= 1e-6 * 0.25**3


def test_sandwich():
    r = ll.sandwich([[1.0, 0.3], [0.2, 1.1]], 4.2, 0.1)
    assert r["status"] == "holds"


def test_theorem1_smoke():
    r = ll.theorem1({"n": 3, "t": [10, 20, 40], "M": 4}, seed=1)
    assert len(r["stats"]) == 3
    assert r["verdict"] in ("PASS", "FAIL")


def test_cli_exit_codes(tmp_path):
    assert ll.run_cli(["cn", "--n", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "cn.json").exists()
    assert (tmp_path / "manifest.json").exists()
    assert ll.run_cli(["nosuchcommand"]) == 2
