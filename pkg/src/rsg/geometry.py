"""Dimension-generic Riemannian geometry over numerically evaluated metric fields.

A metric field assigns a symmetric positive-definite matrix to every point of an
n-dimensional shape space.  Christoffel symbols and curvature are obtained by
central finite differences of the field, so analytic test manifolds and
numerically assembled swimmer metrics go through the same code path.  Fields may
override ``christoffel_batch`` with an analytic shortcut; the finite-difference
route remains the reference behaviour.

Vectors and covectors are stored as plain 1-D numpy arrays.  The distinction is
semantic and carried by argument names (``vec``/``covector``); operations that
mix the two always go through an explicit metric contraction.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

COND_LIMIT = 1e12
EIG_FLOOR = 1e-12


class GeometryError(ValueError):
    """Base class for contract violations in the geometry engine."""


class DimensionMismatch(GeometryError):
    """Operands live on manifolds of different dimension."""


class SingularMetric(GeometryError):
    """Metric (or induced cometric) is numerically singular."""


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return M


def check_spd(M, name: str = "metric") -> np.ndarray:
    """Validate symmetry and positive definiteness of a metric tensor."""
    M = _as_matrix(M)
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise GeometryError(f"{name} is not symmetric")
    eigvals = np.linalg.eigvalsh(M)
    if eigvals[0] <= EIG_FLOOR * max(eigvals[-1], 0.0):
        raise SingularMetric(f"{name} is not positive definite (eigenvalues {eigvals})")
    return M


def metric_inner(M, x, y) -> float:
    """Inner product x^T M y of two tangent vectors under the metric tensor M."""
    M = _as_matrix(M)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (M.shape[0],) or y.shape != (M.shape[0],):
        raise DimensionMismatch(
            f"vector shapes {x.shape}, {y.shape} incompatible with metric {M.shape}"
        )
    return float(x @ M @ y)


def dual_metric(M) -> np.ndarray:
    """Cometric M^{-1}, symmetrized; rejects near-singular input."""
    M = _as_matrix(M)
    if np.linalg.cond(M) > COND_LIMIT:
        raise SingularMetric(f"metric condition number exceeds {COND_LIMIT:g}")
    inv = np.linalg.inv(M)
    return 0.5 * (inv + inv.T)


class MetricField:
    """A field of metric tensors over an n-dimensional manifold.

    Subclasses implement ``matrix`` (one point) and, when it pays off,
    ``matrix_batch`` (vectorized over many points).  ``step`` is the central
    finite-difference step for first derivatives of the metric and
    ``curvature_step`` the outer step for derivatives of the Christoffels.
    """

    def __init__(self, dim: int, step: float = 1e-4, curvature_step: float = 1e-3):
        if dim < 1:
            raise DimensionMismatch("manifold dimension must be >= 1")
        self.dim = dim
        self.step = float(step)
        self.curvature_step = float(curvature_step)

    def matrix(self, r) -> np.ndarray:
        raise NotImplementedError

    def matrix_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.stack([self.matrix(p) for p in pts])

    def christoffel(self, r) -> np.ndarray:
        return self.christoffel_batch(np.asarray(r, dtype=float)[None])[0]

    def christoffel_batch(self, pts) -> np.ndarray:
        return fd_christoffel_batch(self, pts)

    def christoffel_and_curvature(self, r):
        return _fd_christoffel_and_curvature(self, r)


class EuclideanField(MetricField):
    """Identity metric in any dimension; all derived quantities vanish."""

    def matrix(self, r):
        return np.eye(self.dim)

    def matrix_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(np.eye(self.dim), (len(pts), self.dim, self.dim)).copy()

    def christoffel_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        n = self.dim
        return np.zeros((len(pts), n, n, n))

    def christoffel_and_curvature(self, r):
        n = self.dim
        return np.zeros((n, n, n)), np.zeros((n, n, n, n))


class SphereField(MetricField):
    """Unit sphere in polar/azimuthal coordinates (theta, phi).

    Metric diag(1, cos^2 theta); valid for |theta| < pi/2.  Christoffels are
    supplied analytically: Gamma^theta_{phi phi} = sin(theta) cos(theta),
    Gamma^phi_{theta phi} = -tan(theta).
    """

    def __init__(self, step: float = 1e-4, curvature_step: float = 1e-3):
        super().__init__(2, step, curvature_step)

    def matrix(self, r):
        theta = float(np.asarray(r)[0])
        return np.diag([1.0, np.cos(theta) ** 2])

    def matrix_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = np.cos(pts[:, 0]) ** 2
        return out

    def christoffel_batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        theta = pts[:, 0]
        G = np.zeros((len(pts), 2, 2, 2))
        G[:, 0, 1, 1] = np.sin(theta) * np.cos(theta)
        G[:, 1, 0, 1] = -np.tan(theta)
        G[:, 1, 1, 0] = -np.tan(theta)
        return G


class CallableField(MetricField):
    """Wrap a plain function r -> matrix as a metric field.

    Derivatives always go through finite differences, which makes this the
    reference field type for testing the numeric differentiation path.
    """

    def __init__(self, fn: Callable, dim: int, step: float = 1e-4,
                 curvature_step: float = 1e-3, batch_fn: Callable | None = None):
        super().__init__(dim, step, curvature_step)
        self._fn = fn
        self._batch_fn = batch_fn

    def matrix(self, r):
        return np.asarray(self._fn(np.asarray(r, dtype=float)), dtype=float)

    def matrix_batch(self, pts):
        if self._batch_fn is not None:
            return np.asarray(self._batch_fn(np.asarray(pts, dtype=float)), dtype=float)
        return super().matrix_batch(pts)


def field_by_name(name: str, dim: int = 2, **kwargs) -> MetricField:
    """Construct an analytic test field from a configuration name."""
    if name == "euclidean":
        return EuclideanField(dim, **kwargs)
    if name == "sphere":
        return SphereField(**kwargs)
    raise GeometryError(f"unknown analytic metric field {name!r}")


def _offset_points(pts: np.ndarray, h: float) -> np.ndarray:
    """Stack [center, +h e_1, -h e_1, ...] offsets for every point.

    Returns shape (m, 2n+1, n): per point, the center followed by the plus and
    minus offsets along each coordinate.
    """
    m, n = pts.shape
    out = np.repeat(pts[:, None, :], 2 * n + 1, axis=1)
    for i in range(n):
        out[:, 1 + 2 * i, i] += h
        out[:, 2 + 2 * i, i] -= h
    return out


def fd_christoffel_batch(field: MetricField, pts) -> np.ndarray:
    """Christoffel symbols of the second kind by central differences.

    Gamma^k_{ij} = 1/2 (M^{-1})^{km} (d_i M_{mj} + d_j M_{mi} - d_m M_{ij}).
    Shape (m, n, n, n) indexed [point, k, i, j].
    """
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != field.dim:
        raise DimensionMismatch(f"points shape {pts.shape} for dim-{field.dim} field")
    m, n = pts.shape
    h = field.step
    samples = _offset_points(pts, h).reshape(m * (2 * n + 1), n)
    mats = field.matrix_batch(samples).reshape(m, 2 * n + 1, n, n)
    M0 = mats[:, 0]
    # dM[x, c, i, j] = d_c M_ij
    dM = (mats[:, 1::2] - mats[:, 2::2]) / (2.0 * h)
    try:
        Minv = np.linalg.inv(M0)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric not invertible at a Christoffel sample") from exc
    if np.any(np.linalg.cond(M0) > COND_LIMIT):
        raise SingularMetric("metric nearly singular at a Christoffel sample")
    # T_mij = d_i M_mj + d_j M_mi - d_m M_ij
    T = (np.einsum("ximj->xmij", dM)
         + np.einsum("xjmi->xmij", dM)
         - dM)
    G = 0.5 * np.einsum("xkm,xmij->xkij", Minv, T)
    return G


def christoffel_and_curvature(field: MetricField, r):
    """Christoffel symbols and Riemann tensor at a point, sharing one batch.

    R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
                + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik},
    with the outer derivative by central differences of step
    ``field.curvature_step``.  Curvature shape (n, n, n, n), indexed
    [l, k, i, j]: (R(X, Y)Z)^l = R^l_{kij} Z^k X^i Y^j.  Fields with analytic
    shortcuts may override the computation; the finite-difference route below
    is the reference.
    """
    return field.christoffel_and_curvature(np.asarray(r, dtype=float))


def _fd_christoffel_and_curvature(field: MetricField, r):
    r = np.asarray(r, dtype=float)
    h = field.curvature_step
    pts = _offset_points(r[None], h)[0]  # (2n+1, n); center first
    Gs = field.christoffel_batch(pts)
    G0 = Gs[0]
    dG = (Gs[1::2] - Gs[2::2]) / (2.0 * h)  # [c, l, i, j] = d_c Gamma^l_ij
    R = (np.einsum("iljk->lkij", dG)
         - np.einsum("jlik->lkij", dG)
         + np.einsum("lim,mjk->lkij", G0, G0)
         - np.einsum("ljm,mik->lkij", G0, G0))
    return G0, R


def curvature(field: MetricField, r) -> np.ndarray:
    """Riemann curvature tensor R^l_{kij} at a point."""
    return christoffel_and_curvature(field, r)[1]


def covariant_acceleration(field: MetricField, r, rdot, rddot) -> np.ndarray:
    """a^k = rddot^k + Gamma^k_{ij} rdot^i rdot^j."""
    r = np.asarray(r, dtype=float)
    rdot = np.asarray(rdot, dtype=float)
    rddot = np.asarray(rddot, dtype=float)
    if not (r.shape == rdot.shape == rddot.shape == (field.dim,)):
        raise DimensionMismatch("r, rdot, rddot must all have the field dimension")
    G = field.christoffel(r)
    return rddot + np.einsum("kij,i,j->k", G, rdot, rdot)


def covariant_derivative_covector(field: MetricField, r, rdot, covector, covector_dot) -> np.ndarray:
    """(nabla_rdot E)_i = Edot_i - Gamma^k_{ij} rdot^j E_k for a covector E."""
    r = np.asarray(r, dtype=float)
    rdot = np.asarray(rdot, dtype=float)
    E = np.asarray(covector, dtype=float)
    Edot = np.asarray(covector_dot, dtype=float)
    if not (r.shape == rdot.shape == E.shape == Edot.shape == (field.dim,)):
        raise DimensionMismatch("inputs must all have the field dimension")
    G = field.christoffel(r)
    return Edot - np.einsum("kij,j,k->i", G, rdot, E)


class InducedTorqueField(MetricField):
    """Induced metric h(r) = M(r) Mtilde M(r) built from an actuator cometric.

    With actuator cometric Mtilde, the Mtilde-norm of the force covector
    F = M a equals the h-norm of the acceleration a.  The default identity
    cometric corresponds to actuators aligned with the joint coordinates, and
    h reduces to the square of the base metric.
    """

    def __init__(self, base: MetricField, actuator_cometric=None):
        super().__init__(base.dim, base.step, base.curvature_step)
        self.base = base
        if actuator_cometric is None:
            actuator_cometric = np.eye(base.dim)
        self.actuator_cometric = check_spd(actuator_cometric, "actuator cometric")
        if self.actuator_cometric.shape != (base.dim, base.dim):
            raise DimensionMismatch("actuator cometric dimension mismatch")

    def matrix(self, r):
        M = check_spd(self.base.matrix(r), "base metric")
        return M @ self.actuator_cometric @ M

    def matrix_batch(self, pts):
        Ms = self.base.matrix_batch(pts)
        return np.einsum("xij,jk,xkl->xil", Ms, self.actuator_cometric, Ms)


def induced_torque_metric(field: MetricField, actuator_cometric=None) -> InducedTorqueField:
    """Build the torque-cost metric field h = M Mtilde M over the base field."""
    return InducedTorqueField(field, actuator_cometric)


def dual_metric_batch(mats: np.ndarray) -> np.ndarray:
    """Batched cometric; symmetrized inverses of (m, n, n) metric samples."""
    try:
        inv = np.linalg.inv(np.asarray(mats, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric not invertible in batch") from exc
    return 0.5 * (inv + np.transpose(inv, (0, 2, 1)))


def cometric_incompatibility(gfield: MetricField, hfield: MetricField, r, covector,
                             christoffel: np.ndarray | None = None) -> np.ndarray:
    """Covector with components (1/2) (nabla_k h*)(E, E).

    (nabla_k h*)^{ij} = d_k h*^{ij} + Gamma^i_{km} h*^{mj} + Gamma^j_{km} h*^{im},
    with Gamma taken from ``gfield`` and h* the pointwise inverse of ``hfield``.
    Vanishes identically when hfield is gfield (metric compatibility).
    """
    r = np.asarray(r, dtype=float)
    E = np.asarray(covector, dtype=float)
    if gfield.dim != hfield.dim:
        raise DimensionMismatch("g and h fields live on different manifolds")
    n = gfield.dim
    if r.shape != (n,) or E.shape != (n,):
        raise DimensionMismatch("point/covector dimension mismatch")
    G = gfield.christoffel(r) if christoffel is None else christoffel
    h = hfield.step
    pts = _offset_points(r[None], h)[0]
    hs = hfield.matrix_batch(pts)
    hstar = dual_metric_batch(hs)
    hstar0 = hstar[0]
    dhstar = (hstar[1::2] - hstar[2::2]) / (2.0 * h)  # [k, i, j]
    nabla = (dhstar
             + np.einsum("ikm,mj->kij", G, hstar0)
             + np.einsum("jkm,im->kij", G, hstar0))
    return 0.5 * np.einsum("kij,i,j->k", nabla, E, E)
