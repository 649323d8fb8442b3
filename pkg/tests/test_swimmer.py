"""Unit tests for the three-link swimmer models and their metric fields."""

import numpy as np
import pytest

from rsg.geometry import check_spd, fd_christoffel_batch
from rsg.swimmer import (
    DragMetricField,
    MassMetricField,
    SwimmerParams,
    full_drag_tensor,
    full_mass_tensor,
    link_jacobians,
    link_kinematics,
    reduce_drag,
    reduce_mass,
    relabel_map,
)

RNG = np.random.default_rng(7)
PARAMS = SwimmerParams()


def test_params_defaults_and_validation():
    p = SwimmerParams()
    assert p.link_width == pytest.approx(p.link_length / 10.0)
    assert p.link_count == 3
    with pytest.raises(ValueError):
        SwimmerParams(link_length=-1.0)
    with pytest.raises(ValueError):
        SwimmerParams(drag_ratio=1.0)
    with pytest.raises(ValueError):
        SwimmerParams(drag_coeff=0.0)


def test_straight_configuration_geometry():
    # alpha = (0, 0): all links aligned, centers at -L, 0, +L on the body axis
    L = PARAMS.link_length
    poses, _ = link_kinematics(PARAMS, np.zeros(2))
    assert np.allclose(poses[:, 0], [-L, 0.0, L])
    assert np.allclose(poses[:, 1], 0.0)
    assert np.allclose(poses[:, 2], 0.0)


def test_bent_configuration_geometry():
    # alpha = (pi/2, pi/2): symmetric C shape, outer links point "up"
    L = PARAMS.link_length
    a = np.pi / 2
    poses, _ = link_kinematics(PARAMS, np.array([a, a]))
    assert np.allclose(poses[0, :2], [-L / 2, L / 2])
    assert np.allclose(poses[2, :2], [L / 2, L / 2])
    assert poses[0, 2] == pytest.approx(-a)
    assert poses[2, 2] == pytest.approx(a)


def test_link_jacobian_shape_columns_match_fd_of_centers():
    r = np.array([0.35, -0.6])
    J = link_jacobians(PARAMS, r[None])[0]
    h = 1e-6
    for q in range(2):
        e = np.zeros(2)
        e[q] = h
        pos_p, _ = link_kinematics(PARAMS, r + e)
        pos_m, _ = link_kinematics(PARAMS, r - e)
        d = (pos_p - pos_m) / (2 * h)  # (3 links, 3 components) world rates
        for i in range(3):
            th = link_kinematics(PARAMS, r)[0][i, 2]
            c, s = np.cos(th), np.sin(th)
            RT = np.array([[c, s], [-s, c]])
            expected = np.concatenate([RT @ d[i, :2], [d[i, 2]]])
            assert np.allclose(J[i, :, 3 + q], expected, atol=1e-8)


def test_link_jacobian_body_columns_are_rigid_transport():
    # pure body rotation rate about the body origin moves link i at J2 c_i
    r = RNG.uniform(-1, 1, size=2)
    J = link_jacobians(PARAMS, r[None])[0]
    poses, _ = link_kinematics(PARAMS, r)
    for i in range(3):
        th, (px, py) = poses[i, 2], poses[i, :2]
        c, s = np.cos(th), np.sin(th)
        RT = np.array([[c, s], [-s, c]])
        assert np.allclose(J[i, :2, :2], RT, atol=1e-12)
        assert np.allclose(J[i, :2, 2], RT @ [-py, px], atol=1e-12)
        assert J[i, 2, 2] == pytest.approx(1.0)


@pytest.mark.parametrize("full_fn", [full_drag_tensor, full_mass_tensor])
def test_full_tensors_spd(full_fn):
    for _ in range(10):
        r = RNG.uniform(-np.pi / 2, np.pi / 2, size=2)
        check_spd(full_fn(PARAMS, r))


@pytest.mark.parametrize("reduce_fn", [reduce_drag, reduce_mass])
def test_reduced_metrics_spd_on_grid(reduce_fn):
    axis = np.linspace(-np.pi / 2, np.pi / 2, 25)
    for a1 in axis:
        for a2 in axis:
            _, M = reduce_fn(PARAMS, np.array([a1, a2]))
            check_spd(M)


@pytest.mark.parametrize("full_fn,reduce_fn",
                         [(full_drag_tensor, reduce_drag),
                          (full_mass_tensor, reduce_mass)])
def test_schur_reduction_matches_direct_elimination(full_fn, reduce_fn):
    """The reduced quadratic form equals the full form at the force-free body
    velocity, and matches an independent direct solve to 1e-10."""
    for _ in range(10):
        r = RNG.uniform(-1.2, 1.2, size=2)
        D = full_fn(PARAMS, r)
        A, red = reduce_fn(PARAMS, r)
        rdot = RNG.normal(size=2)
        # direct: solve the body rows of D [xi; rdot] = [0; *] for xi
        xi = np.linalg.solve(D[:3, :3], -D[:3, 3:] @ rdot)
        assert np.allclose(xi, -A @ rdot, atol=1e-10)
        v = np.concatenate([xi, rdot])
        assert v @ D @ v == pytest.approx(rdot @ red @ rdot, abs=1e-10)


def test_symmetric_shape_motion_more_expensive_than_antisymmetric():
    # at the straight configuration, bending both joints the same way (a C
    # shape) costs more than the antisymmetric S-like motion, for both models
    for field in (DragMetricField(PARAMS), MassMetricField(PARAMS)):
        M = field.matrix(np.zeros(2))
        sym = np.array([1.0, 1.0])
        anti = np.array([1.0, -1.0])
        assert sym @ M @ sym > anti @ M @ anti


def test_relabel_symmetry_of_metrics():
    P = relabel_map()
    assert np.allclose(P @ P, np.eye(2))
    for field in (DragMetricField(PARAMS), MassMetricField(PARAMS)):
        for _ in range(10):
            r = RNG.uniform(-1.3, 1.3, size=2)
            M1 = field.matrix(r)
            M2 = field.matrix(P @ r)
            assert np.allclose(M1, P @ M2 @ P, atol=1e-12)


def test_drag_field_batch_consistency():
    field = DragMetricField(PARAMS)
    pts = RNG.uniform(-1, 1, size=(6, 2))
    batch = field.matrix_batch(pts)
    for k, r in enumerate(pts):
        assert np.allclose(batch[k], field.matrix(r), atol=1e-14)


@pytest.mark.parametrize("field_cls", [DragMetricField, MassMetricField])
def test_analytic_metric_gradient_matches_fd(field_cls):
    field = field_cls(PARAMS)
    pts = RNG.uniform(-1.2, 1.2, size=(8, 2))
    M, dM = field.metric_and_gradient_batch(pts)
    assert np.allclose(M, field.matrix_batch(pts), atol=1e-13)
    h = 1e-6
    for q in range(2):
        e = np.zeros(2)
        e[q] = h
        fd = (field.matrix_batch(pts + e) - field.matrix_batch(pts - e)) / (2 * h)
        assert np.max(np.abs(fd - dM[:, q])) < 1e-8


@pytest.mark.parametrize("field_cls", [DragMetricField, MassMetricField])
def test_analytic_christoffels_match_fd(field_cls):
    field = field_cls(PARAMS)
    pts = RNG.uniform(-1.2, 1.2, size=(6, 2))
    Ga = field.christoffel_batch(pts)
    Gf = fd_christoffel_batch(field, pts)
    assert np.max(np.abs(Ga - Gf)) < 1e-7


def test_connection_respects_mirror_symmetry_at_straight_shape():
    # mirroring about the body y-axis swaps the joints; at the straight shape
    # antisymmetric joint rates therefore produce no lateral drift, while
    # symmetric rates produce neither surge nor turn
    field = DragMetricField(PARAMS)
    A = field.connection(np.zeros(2))
    xi_anti = -A @ np.array([1.0, -1.0])
    assert abs(xi_anti[1]) < 1e-12
    xi_sym = -A @ np.array([1.0, 1.0])
    assert abs(xi_sym[0]) < 1e-12
    assert abs(xi_sym[2]) < 1e-12


def test_kinetic_energy_equivalence_mass_model():
    # the reduced mass metric returns exactly the full kinetic energy at the
    # momentum-free body velocity
    field = MassMetricField(PARAMS)
    r = np.array([0.5, -0.3])
    rdot = np.array([0.7, 0.4])
    Mfull = full_mass_tensor(PARAMS, r)
    A, Mred = reduce_mass(PARAMS, r)
    v = np.concatenate([-A @ rdot, rdot])
    assert v @ Mfull @ v == pytest.approx(rdot @ Mred @ rdot, rel=1e-12)
