"""Planar three-link swimmer models: drag and added-mass metrics.

The swimmer is a chain of three identical links connected by two joints.  The
middle link carries the body frame; the joint angles r = (alpha1, alpha2) give
the outer links orientations theta1 = -alpha1 and theta3 = +alpha2 in the body
frame, so symmetric joint motion (alpha1 = alpha2) flexes the swimmer into a
C-shape and antisymmetric motion into an S-shape.

Two 5x5 generalized tensors over (body velocity, shape velocity) are assembled
link by link as J^T C J: a resistive-force drag tensor and a rigid-body plus
added-mass inertia tensor.  Imposing zero net body force (drag) or zero total
momentum (inertia) reduces each to a 3x2 local connection A(r) and a 2x2 shape
metric via the Schur complement of the body-body block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import MetricField


class SingularModel(ValueError):
    """The body-body block of a generalized tensor is numerically singular."""


@dataclass(frozen=True)
class SwimmerParams:
    """Geometry, drag, and inertia parameters of the three-link swimmer.

    ``link_width`` defaults to a tenth of the link length.  ``drag_ratio`` is
    the lateral-to-longitudinal resistive-force ratio and must exceed one.
    ``link_density`` is mass per unit link length.
    """

    link_length: float = 1.0
    link_width: float | None = None
    drag_coeff: float = 1.0
    drag_ratio: float = 2.0
    fluid_density: float = 1.0
    link_density: float = 1.0

    def __post_init__(self):
        if self.link_width is None:
            object.__setattr__(self, "link_width", self.link_length / 10.0)
        if self.link_length <= 0 or self.link_width <= 0:
            raise ValueError("link dimensions must be positive")
        if self.drag_ratio <= 1.0:
            raise ValueError("lateral/longitudinal drag ratio must exceed 1")
        if self.drag_coeff <= 0 or self.fluid_density <= 0 or self.link_density <= 0:
            raise ValueError("drag coefficient and densities must be positive")

    @property
    def link_count(self) -> int:
        return 3


def _link_geometry(params: SwimmerParams, R: np.ndarray):
    """Per-link poses and their shape derivatives, batched over points.

    R has shape (m, 2).  Returns centers (m, 3, 2), angles (m, 3),
    dcenters (m, 3, 2, 2) indexed [point, link, xy, joint], and dangles
    (m, 3, 2) indexed [point, link, joint].  Outer-link orientations are
    theta1 = -alpha1 and theta3 = +alpha2; in terms of the joint angles
    c1 = (-L/2 - (L/2) cos a1, (L/2) sin a1) and
    c3 = ( L/2 + (L/2) cos a2, (L/2) sin a2).
    """
    L = params.link_length
    a1, a2 = R[:, 0], R[:, 1]
    m = len(R)
    th = np.zeros((m, 3))
    th[:, 0] = -a1
    th[:, 2] = a2

    centers = np.zeros((m, 3, 2))
    centers[:, 0, 0] = -L / 2 - (L / 2) * np.cos(a1)
    centers[:, 0, 1] = (L / 2) * np.sin(a1)
    centers[:, 2, 0] = L / 2 + (L / 2) * np.cos(a2)
    centers[:, 2, 1] = (L / 2) * np.sin(a2)

    dth = np.zeros((m, 3, 2))
    dth[:, 0, 0] = -1.0
    dth[:, 2, 1] = 1.0

    dcenters = np.zeros((m, 3, 2, 2))
    dcenters[:, 0, 0, 0] = (L / 2) * np.sin(a1)
    dcenters[:, 0, 1, 0] = (L / 2) * np.cos(a1)
    dcenters[:, 2, 0, 1] = -(L / 2) * np.sin(a2)
    dcenters[:, 2, 1, 1] = (L / 2) * np.cos(a2)
    return centers, th, dcenters, dth


def link_jacobians(params: SwimmerParams, R) -> np.ndarray:
    """Jacobians mapping (body velocity, shape velocity) to link-frame velocity.

    Input points (m, 2); output (m, 3, 3, 5): per point and link, rows are the
    link-frame (longitudinal, lateral, angular) velocity against columns
    (xi_x, xi_y, xi_theta, alpha1_dot, alpha2_dot).
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    centers, th, dcenters, dth = _link_geometry(params, R)
    m = len(R)
    J = np.zeros((m, 3, 3, 5))
    c, s = np.cos(th), np.sin(th)
    for i in range(3):
        # world(body-instant) velocity of the center:
        #   v = (xi_x, xi_y) + xi_theta * J2 c_i + dc_i/dalpha * alpha_dot
        # rotate into link frame with Rot(th_i)^T
        ci, si = c[:, i], s[:, i]
        px, py = centers[:, i, 0], centers[:, i, 1]
        # columns xi_x, xi_y
        J[:, i, 0, 0] = ci
        J[:, i, 0, 1] = si
        J[:, i, 1, 0] = -si
        J[:, i, 1, 1] = ci
        # column xi_theta: J2 c = (-py, px)
        J[:, i, 0, 2] = ci * (-py) + si * px
        J[:, i, 1, 2] = -si * (-py) + ci * px
        J[:, i, 2, 2] = 1.0
        # shape columns
        for j in range(2):
            dx, dy = dcenters[:, i, 0, j], dcenters[:, i, 1, j]
            J[:, i, 0, 3 + j] = ci * dx + si * dy
            J[:, i, 1, 3 + j] = -si * dx + ci * dy
            J[:, i, 2, 3 + j] = dth[:, i, j]
    return J


def _link_jacobians_and_grad(params: SwimmerParams, R: np.ndarray):
    """Link Jacobians and their analytic shape derivatives.

    Returns J (m, 3, 3, 5) and dJ (m, 2, 3, 3, 5) with dJ[:, q] = dJ/dalpha_q.
    Flattened over the link structure: the middle link's Jacobian is constant,
    and each outer link depends on a single joint angle, so every nonzero
    entry is written once without looping.
    """
    L2 = params.link_length / 2.0
    a1, a2 = R[:, 0], R[:, 1]
    m = len(R)
    J = np.zeros((m, 3, 3, 5))
    dJ = np.zeros((m, 2, 3, 3, 5))

    # middle link: body frame itself
    J[:, 1, 0, 0] = 1.0
    J[:, 1, 1, 1] = 1.0
    J[:, 1, 2, 2] = 1.0

    for i, (a, q, side) in (((0, (a1, 0, -1.0))), (2, (a2, 1, 1.0))):
        ca, sa = np.cos(a), np.sin(a)
        # orientation theta = -alpha1 for the left link, +alpha2 for the right
        c, s = ca, side * sa
        dc, ds = -sa, side * ca  # d/dalpha of (cos th, sin th)
        px = side * (L2 + L2 * ca)
        py = L2 * sa
        dpx = -side * L2 * sa
        dpy = L2 * ca
        ddpx = -side * L2 * ca
        ddpy = -L2 * sa
        col = 3 + q
        J[:, i, 0, 0] = c
        J[:, i, 0, 1] = s
        J[:, i, 1, 0] = -s
        J[:, i, 1, 1] = c
        J[:, i, 0, 2] = s * px - c * py
        J[:, i, 1, 2] = c * px + s * py
        J[:, i, 2, 2] = 1.0
        J[:, i, 0, col] = c * dpx + s * dpy
        J[:, i, 1, col] = -s * dpx + c * dpy
        J[:, i, 2, col] = side
        dJ[:, q, i, 0, 0] = dc
        dJ[:, q, i, 0, 1] = ds
        dJ[:, q, i, 1, 0] = -ds
        dJ[:, q, i, 1, 1] = dc
        dJ[:, q, i, 0, 2] = ds * px + s * dpx - dc * py - c * dpy
        dJ[:, q, i, 1, 2] = dc * px + c * dpx + ds * py + s * dpy
        dJ[:, q, i, 0, col] = dc * dpx + c * ddpx + ds * dpy + s * ddpy
        dJ[:, q, i, 1, col] = -ds * dpx - s * ddpx + dc * dpy + c * ddpy
    return J, dJ


def link_kinematics(params: SwimmerParams, r):
    """Per-link poses (x, y, theta) in the body frame and their Jacobians."""
    R = np.asarray(r, dtype=float)[None]
    centers, th, _, _ = _link_geometry(params, R)
    poses = np.concatenate([centers[0], th[0][:, None]], axis=1)
    return poses, link_jacobians(params, R)[0]


def _drag_matrix(params: SwimmerParams) -> np.ndarray:
    """Link-frame resistive-force drag matrix diag(c L, k c L, k c L^3 / 12)."""
    L, c, k = params.link_length, params.drag_coeff, params.drag_ratio
    return np.diag([c * L, k * c * L, k * c * L ** 3 / 12.0])


def _mass_matrix(params: SwimmerParams) -> np.ndarray:
    """Link-frame inertia: rigid rod plus slender-ellipse added mass.

    Longitudinal added mass is neglected; lateral added mass is that of an
    ellipse of semi-axes (L/2, w/2); rotational added mass is
    rho pi (a^2 - b^2)^2 / 8.
    """
    L, w, rho = params.link_length, params.link_width, params.fluid_density
    mass = params.link_density * L
    a, b = L / 2.0, w / 2.0
    inertia = mass * (L ** 2 + w ** 2) / 12.0
    added_lat = rho * np.pi * a ** 2
    added_rot = rho * np.pi * (a ** 2 - b ** 2) ** 2 / 8.0
    return np.diag([mass, mass + added_lat, inertia + added_rot])


def _full_tensor(params: SwimmerParams, R, link_matrix: np.ndarray) -> np.ndarray:
    J = link_jacobians(params, R)
    return np.einsum("mlai,ab,mlbj->mij", J, link_matrix, J)


def full_drag_tensor(params: SwimmerParams, r) -> np.ndarray:
    """5x5 generalized drag tensor over (body velocity, shape velocity)."""
    return _full_tensor(params, np.asarray(r, dtype=float)[None], _drag_matrix(params))[0]


def full_mass_tensor(params: SwimmerParams, r) -> np.ndarray:
    """5x5 generalized mass tensor over (body velocity, shape velocity)."""
    return _full_tensor(params, np.asarray(r, dtype=float)[None], _mass_matrix(params))[0]


def _reduce_batch(full: np.ndarray):
    """Schur-complement reduction of (m, 5, 5) tensors to (A, shape metric).

    Zero net body force/momentum gives body velocity xi = -A(r) rdot with
    A = Dbb^{-1} Dbs and reduced metric Dss - Dsb Dbb^{-1} Dbs.
    """
    bb = full[:, :3, :3]
    bs = full[:, :3, 3:]
    sb = full[:, 3:, :3]
    ss = full[:, 3:, 3:]
    try:
        A = np.linalg.solve(bb, bs)
    except np.linalg.LinAlgError as exc:
        raise SingularModel("body-body block is numerically singular") from exc
    if not np.all(np.isfinite(A)):
        raise SingularModel("body-body block is numerically singular")
    red = ss - sb @ A
    red = 0.5 * (red + np.transpose(red, (0, 2, 1)))
    return A, red


def reduce_drag(params: SwimmerParams, r):
    """Local connection A(r) and drag metric D(r) for the viscous swimmer."""
    full = _full_tensor(params, np.asarray(r, dtype=float)[None], _drag_matrix(params))
    A, red = _reduce_batch(full)
    return A[0], red[0]


def reduce_mass(params: SwimmerParams, r):
    """Local connection A(r) and mass metric M(r) for the perfect-fluid swimmer."""
    full = _full_tensor(params, np.asarray(r, dtype=float)[None], _mass_matrix(params))
    A, red = _reduce_batch(full)
    return A[0], red[0]


class _SwimmerMetricField(MetricField):
    """Metric-field adapter over the reduced swimmer tensors."""

    def __init__(self, params: SwimmerParams, link_matrix: np.ndarray,
                 step: float = 1e-4, curvature_step: float = 1e-3):
        super().__init__(2, step, curvature_step)
        self.params = params
        self._link_matrix = link_matrix

    def matrix(self, r):
        return self.matrix_batch(np.asarray(r, dtype=float)[None])[0]

    def matrix_batch(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        full = _full_tensor(self.params, pts, self._link_matrix)
        _, red = _reduce_batch(full)
        return red

    def metric_and_gradient_batch(self, pts):
        """Reduced metric and its analytic shape gradient at many points.

        Returns (M, dM) of shapes (m, 2, 2) and (m, 2, 2, 2) with
        dM[:, q] = dM/dalpha_q, obtained by differentiating the link
        Jacobians and the Schur-complement reduction in closed form.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        C = self._link_matrix
        J, dJ = _link_jacobians_and_grad(self.params, pts)
        F = np.einsum("mlai,ab,mlbj->mij", J, C, J)
        dF_half = np.einsum("mqlai,ab,mlbj->mqij", dJ, C, J)
        dF = dF_half + np.transpose(dF_half, (0, 1, 3, 2))
        bb, bs = F[:, :3, :3], F[:, :3, 3:]
        sb, ss = F[:, 3:, :3], F[:, 3:, 3:]
        try:
            A = np.linalg.solve(bb, bs)
        except np.linalg.LinAlgError as exc:
            raise SingularModel("body-body block is numerically singular") from exc
        M = ss - sb @ A
        M = 0.5 * (M + np.transpose(M, (0, 2, 1)))
        dbb, dbs = dF[:, :, :3, :3], dF[:, :, :3, 3:]
        dss = dF[:, :, 3:, 3:]
        rhs = dbs - dbb @ A[:, None]
        dA = np.linalg.solve(bb[:, None], rhs)
        dM = (dss - np.transpose(dbs, (0, 1, 3, 2)) @ A[:, None]
              - sb[:, None] @ dA)
        dM = 0.5 * (dM + np.transpose(dM, (0, 1, 3, 2)))
        return M, dM

    def christoffel_batch(self, pts):
        """Christoffels from the analytic metric gradient (no finite differences)."""
        M, dM = self.metric_and_gradient_batch(np.atleast_2d(np.asarray(pts, dtype=float)))
        Minv = np.linalg.inv(M)
        T = (np.einsum("ximj->xmij", dM)
             + np.einsum("xjmi->xmij", dM)
             - dM)
        return 0.5 * np.einsum("xkm,xmij->xkij", Minv, T)

    def connection(self, r) -> np.ndarray:
        """Local connection A(r), shape (3, 2)."""
        return self.connection_batch(np.asarray(r, dtype=float)[None])[0]

    def connection_batch(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        full = _full_tensor(self.params, pts, self._link_matrix)
        A, _ = _reduce_batch(full)
        return A


class DragMetricField(_SwimmerMetricField):
    """D(r) of the viscous swimmer as a metric field."""

    def __init__(self, params: SwimmerParams, **kwargs):
        super().__init__(params, _drag_matrix(params), **kwargs)


class MassMetricField(_SwimmerMetricField):
    """M(r) of the perfect-fluid swimmer as a metric field."""

    def __init__(self, params: SwimmerParams, **kwargs):
        super().__init__(params, _mass_matrix(params), **kwargs)


def relabel_map():
    """Signed permutation of the end-to-end relabeling (alpha1, alpha2) swap."""
    return np.array([[0.0, 1.0], [1.0, 0.0]])
