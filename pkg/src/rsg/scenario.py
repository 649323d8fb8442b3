"""Full gait-switching scenarios: source cycle, transition, target cycle.

A scenario stitches together one full cycle of the source gait (continued up
to the departure phase), the solved transition trajectory, and one cycle of
the target gait starting at the arrival phase.  On the assembled shape
trajectory it evaluates the accumulated cost of the active problem variant
and, when a body model is available, reconstructs the body pose and the
forward / turning displacement series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import MetricField, dual_metric_batch
from .se2 import Pose, integrate_body_velocity
from .solvers import Solution, Status, Variant

DEFAULT_SAMPLES_PER_PERIOD = 200

SEGMENT_SOURCE = "source"
SEGMENT_TRANSITION = "transition"
SEGMENT_TARGET = "target"


class ScenarioError(ValueError):
    """Raised for inconsistent or non-converged scenario inputs."""


@dataclass
class Scenario:
    """Assembled gait-switching run sampled on one strictly increasing grid."""

    source: object
    solution: Solution
    target: object
    sample_rate: float
    t: np.ndarray            # (m,)
    r: np.ndarray            # (m, n) shape samples
    rdot: np.ndarray         # (m, n) shape velocity samples
    segment: np.ndarray      # (m,) strings: source / transition / target
    junctions: tuple         # (t at gait->transition, t at transition->gait)
    cost_accum: np.ndarray   # (m,) running cost integral
    poses: list | None       # Pose per sample, None without a body model
    fwd_disp: np.ndarray | None
    turn_disp: np.ndarray | None

    @property
    def x(self):
        return np.array([p.x for p in self.poses])

    @property
    def y(self):
        return np.array([p.y for p in self.poses])

    @property
    def theta(self):
        return np.array([p.theta for p in self.poses])


def _segment_grid(duration: float, rate: float) -> np.ndarray:
    count = max(int(round(duration * rate)), 2)
    return np.linspace(0.0, duration, count + 1)


def _gait_cost_rate(problem, gait, times) -> np.ndarray:
    """Variant cost integrand evaluated along a gait curve.

    The gait segments of a scenario are charged with the same functional as
    the transition: squared metric speed for path problems, squared covariant
    acceleration for acceleration problems, and the squared effort-covector
    cometric norm for torque problems (the effort dual of the covariant
    acceleration under the induced metric h).
    """
    g: MetricField = problem.metric
    r, rd, rdd = gait.eval(times)
    if problem.variant is Variant.PATH:
        Ms = g.matrix_batch(r)
        return np.einsum("ki,kij,kj->k", rd, Ms, rd)
    Gs = g.christoffel_batch(r)
    a = rdd + np.einsum("mkij,mi,mj->mk", Gs, rd, rd)
    if problem.variant is Variant.ACCEL:
        Ms = g.matrix_batch(r)
        return np.einsum("ki,kij,kj->k", a, Ms, a)
    hs = problem.torque_metric.matrix_batch(r)
    # E = h a, and E h* E = a h a
    return np.einsum("ki,kij,kj->k", a, hs, a)


def _transition_cost_rate(problem, traj_states) -> np.ndarray:
    n = problem.dim
    r = traj_states[:, :n]
    rd = traj_states[:, n:2 * n]
    if problem.variant is Variant.PATH:
        Ms = problem.metric.matrix_batch(r)
        return np.einsum("ki,kij,kj->k", rd, Ms, rd)
    if problem.variant is Variant.ACCEL:
        a = traj_states[:, 2 * n:3 * n]
        Ms = problem.metric.matrix_batch(r)
        return np.einsum("ki,kij,kj->k", a, Ms, a)
    E = traj_states[:, 2 * n:3 * n]
    hstars = dual_metric_batch(problem.torque_metric.matrix_batch(r))
    return np.einsum("ki,kij,kj->k", E, hstars, E)


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def assemble_scenario(source, solution: Solution, target,
                      sample_rate: float | None = None,
                      body_field=None) -> Scenario:
    """Build the three-segment scenario around a converged transition.

    The source gait runs from phase 0 through one full period plus the
    departure phase, the transition trajectory follows for its solved
    duration, and the target gait closes with one full cycle from the arrival
    phase.  ``body_field`` is any object with ``connection_batch`` (a swimmer
    metric field); when given, the body pose is reconstructed from the local
    connection and the displacement series are filled in.
    """
    if solution.status is not Status.CONVERGED:
        raise ScenarioError(
            f"scenario needs a converged transition, got {solution.status.value}")
    problem = solution.problem
    t0 = float(solution.decision["t0"])
    t_f = float(solution.decision["t_f"])
    T = float(solution.decision["T"])
    traj = solution.trajectory
    n = problem.dim
    if sample_rate is None:
        sample_rate = DEFAULT_SAMPLES_PER_PERIOD / source.period

    # segment sample grids, each including both endpoints
    src_dur = source.period + t0
    tau_src = _segment_grid(src_dur, sample_rate)
    tau_trn = _segment_grid(T, sample_rate)
    tau_tgt = _segment_grid(target.period, sample_rate)

    r_src, rd_src, _ = source.eval(tau_src - source.period)
    states_trn = traj.interpolate(tau_trn)
    r_tgt, rd_tgt, _ = target.eval(t_f + tau_tgt)

    rate_src = _gait_cost_rate(problem, source, tau_src - source.period)
    rate_trn = _transition_cost_rate(problem, states_trn)
    rate_tgt = _gait_cost_rate(problem, target, t_f + tau_tgt)

    t1 = src_dur
    t2 = t1 + T

    def stitch(parts, drop_first_after_0=True):
        out = [parts[0]]
        for p in parts[1:]:
            out.append(p[1:] if drop_first_after_0 else p)
        return np.concatenate(out)

    t = stitch([tau_src, t1 + tau_trn, t2 + tau_tgt])
    r = stitch([r_src, states_trn[:, :n], r_tgt])
    rdot = stitch([rd_src, states_trn[:, n:2 * n], rd_tgt])
    rate = stitch([rate_src, rate_trn, rate_tgt])
    segment = np.concatenate([
        np.full(len(tau_src), SEGMENT_SOURCE, dtype=object),
        np.full(len(tau_trn) - 1, SEGMENT_TRANSITION, dtype=object),
        np.full(len(tau_tgt) - 1, SEGMENT_TARGET, dtype=object),
    ])

    jump1 = np.linalg.norm(r_src[-1] - states_trn[0, :n])
    jump2 = np.linalg.norm(states_trn[-1, :n] - r_tgt[0])
    if max(jump1, jump2) > 1e-6:
        raise ScenarioError(
            f"shape discontinuity at a junction: {max(jump1, jump2):.3e}")

    cost_accum = _cumtrapz(rate, t)

    poses = fwd = turn = None
    if body_field is not None:
        A = body_field.connection_batch(r)
        xi = -np.einsum("mij,mj->mi", A, rdot)
        poses = integrate_body_velocity(t, xi)
        fwd = _cumtrapz(xi[:, 0], t)
        turn = np.array([p.theta for p in poses])
        turn = turn - turn[0]

    return Scenario(source=source, solution=solution, target=target,
                    sample_rate=float(sample_rate), t=t, r=r, rdot=rdot,
                    segment=segment, junctions=(float(t1), float(t2)),
                    cost_accum=cost_accum, poses=poses,
                    fwd_disp=fwd, turn_disp=turn)


def displacement_curves(scenario: Scenario):
    """Forward and turning displacement series of an assembled scenario.

    Forward displacement accumulates the body-frame x translation (in link
    lengths); turning displacement is the unwrapped heading change (radians).
    """
    if scenario.poses is None:
        raise ScenarioError("scenario was assembled without a body model")
    return scenario.fwd_disp, scenario.turn_disp


def junction_jumps(scenario: Scenario):
    """Position and velocity jumps at the two segment junctions.

    Returns ((dr1, drdot1), (dr2, drdot2)) comparing the transition's
    boundary states against the gait states at the departure and arrival
    phases.  Useful for checking the C^0 / C^1 claims of the different
    problem variants.
    """
    t0 = float(scenario.solution.decision["t0"])
    t_f = float(scenario.solution.decision["t_f"])
    traj = scenario.solution.trajectory
    out = []
    for (r_a, rd_a), (r_b, rd_b) in (
            (scenario.source.eval(t0)[:2], (traj.r[0], traj.rdot[0])),
            ((traj.r[-1], traj.rdot[-1]), scenario.target.eval(t_f)[:2])):
        out.append((float(np.linalg.norm(r_a - r_b)),
                    float(np.linalg.norm(rd_a - rd_b))))
    return tuple(out)
