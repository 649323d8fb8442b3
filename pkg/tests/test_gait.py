"""Unit tests for Fourier-series gait curves."""

import numpy as np
import pytest

from rsg.gait import (
    Gait,
    default_forward_gait,
    default_turning_gait,
)


def test_validation():
    with pytest.raises(ValueError):
        Gait(period=0.0, coeffs=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Gait(period=1.0, coeffs=np.zeros((2, 4)))  # even row length


def test_eval_is_periodic():
    g = default_forward_gait()
    for t in (0.0, 0.37, 0.92):
        r1, rd1, rdd1 = g.eval(t)
        r2, rd2, rdd2 = g.eval(t + 3 * g.period)
        assert np.allclose(r1, r2, atol=1e-12)
        assert np.allclose(rd1, rd2, atol=1e-12)
        assert np.allclose(rdd1, rdd2, atol=1e-12)


def test_default_gaits_are_clockwise_circles():
    g = default_forward_gait()
    r0, rd0, _ = g.eval(0.0)
    assert np.allclose(r0, [0.8, 0.0])
    # clockwise: at the rightmost point the curve moves in -y
    assert rd0[0] == pytest.approx(0.0, abs=1e-12)
    assert rd0[1] < 0.0
    tt = np.linspace(0, 1, 100, endpoint=False)
    r, _, _ = g.eval(tt)
    assert np.allclose(np.linalg.norm(r, axis=1), 0.8, atol=1e-12)

    gt = default_turning_gait()
    r, _, _ = gt.eval(tt)
    assert np.allclose(np.linalg.norm(r - [0.6, 0.6], axis=1), 0.6, atol=1e-12)


def test_derivatives_match_fd():
    g = default_turning_gait(period=1.7)
    h = 1e-6
    for t in (0.1, 0.6, 1.3):
        r_p, _, _ = g.eval(t + h)
        r_m, _, _ = g.eval(t - h)
        _, rd, rdd = g.eval(t)
        assert np.allclose((r_p - r_m) / (2 * h), rd, atol=1e-8)
        rd_p = g.eval(t + h)[1]
        rd_m = g.eval(t - h)[1]
        assert np.allclose((rd_p - rd_m) / (2 * h), rdd, atol=1e-6)


def test_vectorized_eval_matches_scalar():
    g = default_forward_gait()
    tt = np.array([0.0, 0.25, 0.8])
    r, rd, rdd = g.eval(tt)
    assert r.shape == (3, 2)
    for k, t in enumerate(tt):
        rs, rds, rdds = g.eval(t)
        assert np.allclose(r[k], rs)
        assert np.allclose(rd[k], rds)
        assert np.allclose(rdd[k], rdds)


def test_phase_points():
    g = default_forward_gait()
    pts = g.phase_points(4)
    assert [t for t, _ in pts] == [0.0, 0.25, 0.5, 0.75]
    for t, r in pts:
        assert np.allclose(r, g.eval(t)[0])
    with pytest.raises(ValueError):
        g.phase_points(0)


def test_dict_round_trip():
    g = default_turning_gait(period=2.5)
    g2 = Gait.from_dict(g.to_dict())
    assert g2.period == g.period
    assert g2.label == g.label
    assert np.allclose(g2.coeffs, g.coeffs)
