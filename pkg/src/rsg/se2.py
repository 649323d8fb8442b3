"""SE(2) poses and body-velocity integration for pose reconstruction.

Body velocities are triples xi = (vx, vy, omega) expressed in the moving body
frame; poses evolve by g_dot = g * hat(xi).  Reconstruction over a sampled
shape trajectory uses a two-node Gauss-Magnus step (fourth order in the step
size) with the body velocity interpolated by cubic splines between samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

_GAUSS_OFFSET = np.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class Pose:
    """Planar pose (x, y, theta) of the body frame in the world frame."""

    x: float
    y: float
    theta: float

    def compose(self, other: "Pose") -> "Pose":
        c, s = np.cos(self.theta), np.sin(self.theta)
        return Pose(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose":
        c, s = np.cos(self.theta), np.sin(self.theta)
        return Pose(-(c * self.x + s * self.y), s * self.x - c * self.y, -self.theta)

    def wrapped(self) -> "Pose":
        th = np.mod(self.theta + np.pi, 2.0 * np.pi) - np.pi
        if th == -np.pi:
            th = np.pi
        return Pose(self.x, self.y, th)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(0.0, 0.0, 0.0)


def exp_se2(xi) -> Pose:
    """Group exponential of a body-velocity increment (vx, vy, omega)."""
    vx, vy, w = (float(c) for c in xi)
    if abs(w) < 1e-12:
        # Second-order series keeps the map smooth through w = 0.
        return Pose(vx - 0.5 * w * vy, vy + 0.5 * w * vx, w)
    s, c = np.sin(w), np.cos(w)
    a = s / w
    b = (1.0 - c) / w
    return Pose(a * vx - b * vy, b * vx + a * vy, w)


def _bracket(a, b):
    """se(2) Lie bracket of velocity triples."""
    av, aw = a[:2], a[2]
    bv, bw = b[:2], b[2]
    out = np.zeros(3)
    out[0] = -aw * bv[1] + bw * av[1]
    out[1] = aw * bv[0] - bw * av[0]
    return out


def integrate_body_velocity(t, xi, start: Pose | None = None) -> list[Pose]:
    """Integrate g_dot = g * hat(xi(t)) through sampled body velocities.

    ``t`` is a strictly increasing sample grid and ``xi`` the matching (m, 3)
    body-velocity samples.  Returns the pose at every sample time.
    """
    t = np.asarray(t, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (len(t), 3):
        raise ValueError(f"xi shape {xi.shape} does not match {len(t)} samples")
    pose = start if start is not None else Pose.identity()
    poses = [pose]
    if len(t) == 1:
        return poses
    if len(t) < 3:
        spline = CubicSpline(t, xi, axis=0, bc_type="natural")
    else:
        spline = CubicSpline(t, xi, axis=0)
    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        mid = t[k] + 0.5 * h
        A1 = spline(mid - _GAUSS_OFFSET * h)
        A2 = spline(mid + _GAUSS_OFFSET * h)
        omega = 0.5 * h * (A1 + A2) + (np.sqrt(3.0) / 12.0) * h * h * _bracket(A1, A2)
        pose = pose.compose(exp_se2(omega))
        poses.append(pose)
    return poses
