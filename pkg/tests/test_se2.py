"""Unit tests for SE(2) poses and body-velocity integration."""

import numpy as np
import pytest

from rsg.se2 import Pose, exp_se2, integrate_body_velocity


def test_compose_inverse_identity():
    g = Pose(1.0, -2.0, 0.7)
    gi = g.inverse()
    out = g.compose(gi)
    assert np.allclose([out.x, out.y, out.theta], 0.0, atol=1e-14)
    out = gi.compose(g)
    assert np.allclose([out.x, out.y, out.theta], 0.0, atol=1e-14)


def test_compose_is_rigid_motion():
    a = Pose(1.0, 0.0, np.pi / 2)
    b = Pose(1.0, 0.0, 0.0)
    c = a.compose(b)
    assert np.allclose([c.x, c.y, c.theta], [1.0, 1.0, np.pi / 2])


def test_wrapped():
    assert Pose(0, 0, 3 * np.pi).wrapped().theta == pytest.approx(np.pi)
    assert Pose(0, 0, -0.1).wrapped().theta == pytest.approx(-0.1)


def test_exp_pure_translation_and_rotation():
    g = exp_se2([2.0, -1.0, 0.0])
    assert np.allclose([g.x, g.y, g.theta], [2.0, -1.0, 0.0])
    g = exp_se2([0.0, 0.0, 0.5])
    assert np.allclose([g.x, g.y, g.theta], [0.0, 0.0, 0.5])


def test_exp_unit_speed_turn():
    # xi = (v, 0, w): a circular arc of radius v / w
    v, w = 1.0, np.pi
    g = exp_se2([v, 0.0, w])
    assert g.x == pytest.approx(0.0, abs=1e-12)
    assert g.y == pytest.approx(2.0 * v / w)
    assert g.theta == pytest.approx(np.pi)


def test_exp_continuity_through_zero_rotation():
    small = exp_se2([1.0, 0.5, 1e-13])
    flat = exp_se2([1.0, 0.5, 0.0])
    assert abs(small.x - flat.x) < 1e-10
    assert abs(small.y - flat.y) < 1e-10


def test_constant_velocity_integration_is_exact():
    xi = np.array([0.8, 0.0, 1.3])
    t = np.linspace(0.0, 2.0, 41)
    poses = integrate_body_velocity(t, np.tile(xi, (len(t), 1)))
    exact = exp_se2(2.0 * xi)
    end = poses[-1]
    assert np.allclose([end.x, end.y, end.theta],
                       [exact.x, exact.y, exact.theta], atol=1e-9)


def test_integration_fourth_order_convergence():
    # oscillating body velocity with nontrivial commutators
    def xi_of(t):
        return np.stack([np.cos(3 * t), np.sin(2 * t), 0.8 * np.cos(t)], axis=-1)

    def endpoint(n):
        t = np.linspace(0.0, 1.5, n + 1)
        end = integrate_body_velocity(t, xi_of(t))[-1]
        return np.array([end.x, end.y, end.theta])

    ref = endpoint(4096)
    e1 = np.linalg.norm(endpoint(64) - ref)
    e2 = np.linalg.norm(endpoint(128) - ref)
    order = np.log2(e1 / e2)
    assert order > 3.5


def test_integration_start_pose_and_shapes():
    t = np.linspace(0, 1, 11)
    xi = np.zeros((11, 3))
    start = Pose(3.0, 4.0, 0.5)
    poses = integrate_body_velocity(t, xi, start=start)
    assert len(poses) == 11
    assert poses[-1] == start
    with pytest.raises(ValueError):
        integrate_body_velocity(t, np.zeros((5, 3)))


def test_reversed_velocity_inverts_net_displacement():
    rng = np.random.default_rng(2)
    t = np.linspace(0.0, 1.0, 201)
    xi = np.stack([np.sin(2 * np.pi * t + 0.3),
                   0.4 * np.cos(2 * np.pi * t),
                   0.7 * np.sin(4 * np.pi * t + 1.0)], axis=1)
    fwd = integrate_body_velocity(t, xi)[-1]
    rev = integrate_body_velocity(t, -xi[::-1])[-1]
    both = fwd.compose(rev)
    assert np.allclose([both.x, both.y, both.theta], 0.0, atol=1e-8)
