"""Periodic gait curves in shape space as truncated Fourier series.

A gait stores, per joint, the coefficients [a0, a1, b1, ..., aK, bK] of
r_j(t) = a0 + sum_k a_k cos(2 pi k t / T) + b_k sin(2 pi k t / T).
Evaluation and its first two time derivatives are analytic, so periodicity is
exact and the curve is smooth by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_FOURIER_ORDER = 4


@dataclass(frozen=True)
class Gait:
    period: float
    coeffs: np.ndarray  # (n_joints, 2K+1)
    label: str = ""

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.period <= 0:
            raise ValueError("gait period must be positive")
        if coeffs.shape[1] % 2 != 1:
            raise ValueError("coefficient rows must have odd length [a0, a1, b1, ...]")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] // 2

    def eval(self, t):
        """Position, velocity, and acceleration of the gait curve at time t.

        Accepts a scalar or an array of times; time wraps modulo the period
        through the series itself, so values are exactly periodic.
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        w = 2.0 * np.pi / self.period
        k = np.arange(1, self.order + 1)
        ang = np.outer(tt, k) * w  # (m, K)
        c, s = np.cos(ang), np.sin(ang)
        ak = self.coeffs[:, 1::2]  # (n, K)
        bk = self.coeffs[:, 2::2]
        wk = w * k
        r = self.coeffs[:, 0][None, :] + c @ ak.T + s @ bk.T
        rd = (-s * wk) @ ak.T + (c * wk) @ bk.T
        rdd = (-c * wk ** 2) @ ak.T + (-s * wk ** 2) @ bk.T
        if scalar:
            return r[0], rd[0], rdd[0]
        return r, rd, rdd

    def phase_points(self, count: int):
        """``count`` equally spaced departure phases as (t, r) pairs."""
        if count < 1:
            raise ValueError("phase count must be >= 1")
        ts = np.arange(count) * (self.period / count)
        return [(float(t), self.eval(t)[0]) for t in ts]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "period": self.period,
            "joints": [list(row) for row in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Gait":
        return cls(
            period=float(data["period"]),
            coeffs=np.array(data["joints"], dtype=float),
            label=str(data.get("label", "")),
        )


def _circle_coeffs(center, radius, order=DEFAULT_FOURIER_ORDER):
    """Clockwise circle r(t) = center + radius (cos wt, -sin wt)."""
    row1 = np.zeros(2 * order + 1)
    row2 = np.zeros(2 * order + 1)
    row1[0], row1[1] = center[0], radius      # a1 cos
    row2[0], row2[2] = center[1], -radius     # b1 sin
    return np.stack([row1, row2])


def default_forward_gait(period: float = 1.0) -> Gait:
    """Shipped default forward gait: clockwise circle of radius 0.8 at the origin."""
    return Gait(period, _circle_coeffs((0.0, 0.0), 0.8), label="forward")


def default_turning_gait(period: float = 1.0) -> Gait:
    """Shipped default turning gait: clockwise circle of radius 0.6 at (0.6, 0.6)."""
    return Gait(period, _circle_coeffs((0.6, 0.6), 0.6), label="turning")
