"""Shared test fixtures: analytic boundary curves for solver tests."""

import numpy as np


class CurveStub:
    """Minimal gait-like curve from closed-form position/velocity functions."""

    def __init__(self, fn, period=1.0, label=""):
        self._fn = fn
        self.period = period
        self.label = label
        self.dim = len(np.atleast_1d(fn(0.0)[0]))

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            r, rd, rdd = self._fn(float(t))
            return (np.asarray(r, dtype=float), np.asarray(rd, dtype=float),
                    np.asarray(rdd, dtype=float))
        out = [self._fn(float(tk)) for tk in t]
        return tuple(np.array(part, dtype=float) for part in zip(*out))

    def phase_points(self, count):
        ts = np.arange(count) * (self.period / count)
        return [(float(tk), self.eval(tk)[0]) for tk in ts]


def point_curve(point, velocity=None, period=1.0):
    """Stationary boundary 'gait' pinned at one point (optionally moving)."""
    point = np.asarray(point, dtype=float)
    vel = np.zeros_like(point) if velocity is None else np.asarray(velocity, float)

    def fn(t):
        return point + t * vel, vel, np.zeros_like(point)

    return CurveStub(fn, period=period)
