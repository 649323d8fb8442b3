"""Gait-transition boundary value problems solved by indirect shooting.

Three problem variants share one outer loop:

* ``path``: geodesic shots (zero covariant acceleration), free initial
  velocity, position-only boundary error.
* ``accel``: Riemannian cubic spline shots driven by the curvature restoring
  term, free initial covariant acceleration and its covariant rate, position
  and velocity boundary error, velocity pinned to the source gait.
* ``torque``: effort-covector spline shots on an induced metric h, free
  initial effort covector and its covariant rate, boundary error as ``accel``.

The outer loop minimizes  w * |boundary error|^2 + lambda * trajectory cost
over the decision variables (arrival phase t_f, duration T, free initial
rates) with a probe grid, Nelder-Mead simplex descent from the best probes,
and a damped least-squares polish of the boundary error alone.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares, minimize

from .geometry import (
    MetricField,
    SingularMetric,
    christoffel_and_curvature,
    cometric_incompatibility,
    dual_metric_batch,
    induced_torque_metric,
)

BLOWUP_LIMIT = 1e6


class Status(enum.Enum):
    CONVERGED = "converged"
    LIMIT_VIOLATED = "limit_violated"
    DIVERGED = "diverged"
    MAX_ITERATIONS = "max_iterations"


class Variant(enum.Enum):
    PATH = "path"
    ACCEL = "accel"
    TORQUE = "torque"


@dataclass(frozen=True)
class Limits:
    """Box joint limits (radians) and per-joint acceleration magnitude limit."""

    joint: float = np.pi / 2
    acceleration: float = 50.0


@dataclass(frozen=True)
class SolverSettings:
    residual_weight: float = 1e4
    cost_weight: float = 1.0
    tolerance: float = 1e-6
    steps: int = 256
    search_steps: int = 64
    oracle_refine: int = 4
    time_bounds: tuple = (0.05, 5.0)  # multiples of the source period
    grid_size: int = 3
    nm_starts: int = 3
    nm_maxiter: int = 160
    polish_max_nfev: int = 15
    fixed_T: float | None = None
    fixed_tf: float | None = None


@dataclass(frozen=True)
class TransitionProblem:
    variant: Variant
    metric: MetricField
    source: object  # curve with .eval(t) -> (r, rdot, rddot) and .period
    target: object
    t0: float = 0.0
    torque_metric: MetricField | None = None  # induced metric h; torque only
    actuator_cometric: np.ndarray | None = None
    limits: Limits = field(default_factory=Limits)
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        v = self.variant if isinstance(self.variant, Variant) else Variant(self.variant)
        object.__setattr__(self, "variant", v)
        if v is Variant.TORQUE and self.torque_metric is None:
            object.__setattr__(
                self, "torque_metric",
                induced_torque_metric(self.metric, self.actuator_cometric))

    @property
    def dim(self) -> int:
        return self.metric.dim


@dataclass
class Trajectory:
    """Uniform time samples of the full shot state.

    ``states`` holds rows (gamma, gamma_dot, extra): extra is empty for path
    shots, (a, j) for acceleration shots, and (E, E_cov_rate) for torque
    shots.  ``rddot`` is the raw second time derivative recorded from the
    integrator stages.
    """

    t: np.ndarray
    states: np.ndarray
    dim: int
    rddot: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return self.states[:, : self.dim]

    @property
    def rdot(self) -> np.ndarray:
        return self.states[:, self.dim: 2 * self.dim]

    @property
    def extra(self) -> np.ndarray:
        return self.states[:, 2 * self.dim:]

    def interpolate(self, times) -> np.ndarray:
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.t, self.states, axis=0)(times)


@dataclass
class Solution:
    problem: TransitionProblem
    status: Status
    trajectory: Trajectory | None
    decision: dict
    residual: np.ndarray
    residual_norm: float
    cost: float


# --------------------------------------------------------------------------
# Shot dynamics
# --------------------------------------------------------------------------

def geodesic_rhs(metric: MetricField, y: np.ndarray) -> np.ndarray:
    """State derivative of (gamma, gamma_dot) under zero covariant acceleration."""
    n = metric.dim
    r, rd = y[:n], y[n:]
    G = metric.christoffel(r)
    rdd = -np.einsum("kij,i,j->k", G, rd, rd)
    return np.concatenate([rd, rdd])


def accel_spline_rhs(metric: MetricField, y: np.ndarray) -> np.ndarray:
    """State derivative of (gamma, gamma_dot, a, j) for the cubic-spline ODE.

    a is the covariant acceleration and j its covariant rate along the curve;
    the covariant rates are converted to raw time derivatives through the
    Christoffel correction, and the restoring term is -R(a, gamma_dot)gamma_dot.
    """
    n = metric.dim
    r, rd, a, j = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
    G, R = christoffel_and_curvature(metric, r)
    corr = lambda v: np.einsum("kij,i,j->k", G, rd, v)
    rdd = a - corr(rd)
    adot = j - corr(a)
    cov_jdot = -np.einsum("lkij,k,i,j->l", R, rd, a, rd)
    jdot = cov_jdot - corr(j)
    return np.concatenate([rd, rdd, adot, jdot])


def torque_spline_rhs(metric: MetricField, hfield: MetricField, y: np.ndarray) -> np.ndarray:
    """State derivative of (gamma, gamma_dot, E, nabla E) for the effort spline.

    E is the effort covector (induced-metric dual of the covariant
    acceleration, a = h* E); its second covariant rate balances the curvature
    coupling <E, R(., gamma_dot) gamma_dot> against the incompatibility of h*
    with the base metric's connection.
    """
    n = metric.dim
    r, rd, E, Ec = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
    G, R = christoffel_and_curvature(metric, r)
    hstar = dual_metric_batch(hfield.matrix_batch(r[None]))[0]
    a = hstar @ E
    rdd = a - np.einsum("kij,i,j->k", G, rd, rd)
    # covector transport: raw rate = covariant rate + Gamma^k_{ij} rdot^j (.)_k
    lower_corr = lambda w: np.einsum("kij,j,k->i", G, rd, w)
    Edot = Ec + lower_corr(E)
    curv_term = np.einsum("lkij,l,k,j->i", R, E, rd, rd)
    incompat = cometric_incompatibility(metric, hfield, r, E, christoffel=G)
    cov_Ecdot = -curv_term + incompat
    Ecdot = cov_Ecdot + lower_corr(Ec)
    return np.concatenate([rd, rdd, Edot, Ecdot])


def make_rhs(problem: TransitionProblem):
    if problem.variant is Variant.PATH:
        return lambda y: geodesic_rhs(problem.metric, y)
    if problem.variant is Variant.ACCEL:
        return lambda y: accel_spline_rhs(problem.metric, y)
    return lambda y: torque_spline_rhs(problem.metric, problem.torque_metric, y)


def integrate_shot(rhs, y0, T: float, steps: int, dim: int,
                   limits: Limits | None = None):
    """Classical fixed-step RK4 integration of a shot.

    Returns (Trajectory, status).  The shot aborts with ``DIVERGED`` when any
    state component exceeds 1e6 (or goes non-finite) and, when ``limits`` is
    given, with ``LIMIT_VIOLATED`` as soon as a sample leaves the joint box or
    the recorded joint acceleration exceeds the limit.
    """
    if T <= 0:
        raise ValueError("shot duration must be positive")
    if steps < 16:
        raise ValueError("need at least 16 integration steps")
    y0 = np.asarray(y0, dtype=float)
    h = T / steps
    t = np.linspace(0.0, T, steps + 1)
    ys = np.empty((steps + 1, len(y0)))
    rddots = np.empty((steps + 1, dim))
    ys[0] = y0
    y = y0
    status = None
    try:
        k1 = rhs(y)
    except SingularMetric:
        return Trajectory(t[:1], ys[:1], dim, rddots[:1]), Status.DIVERGED
    rddots[0] = k1[dim:2 * dim]
    if limits is not None and _violates(y0, k1, dim, limits):
        return Trajectory(t[:1], ys[:1], dim, rddots[:1]), Status.LIMIT_VIOLATED
    for i in range(steps):
        try:
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
        except (SingularMetric, np.linalg.LinAlgError):
            status = Status.DIVERGED
            break
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_LIMIT:
            status = Status.DIVERGED
            i += 1
            break
        try:
            k1 = rhs(y)  # stage 1 of the next step, reused for the checks below
        except (SingularMetric, np.linalg.LinAlgError):
            status = Status.DIVERGED
            i += 1
            break
        rddots[i + 1] = k1[dim:2 * dim]
        if limits is not None and _violates(y, k1, dim, limits):
            status = Status.LIMIT_VIOLATED
            i += 1
            break
    else:
        return Trajectory(t, ys, dim, rddots), None
    k = i + 1
    return Trajectory(t[:k], ys[:k], dim, rddots[:k]), status


def _violates(y, dy, dim, limits: Limits) -> bool:
    r = y[:dim]
    if limits.joint is not None and np.any(np.abs(r) > limits.joint):
        return True
    if limits.acceleration is not None:
        rdd = dy[dim:2 * dim]
        if np.any(np.abs(rdd) > limits.acceleration):
            return True
    return False


def _integrate_no_abort(rhs, y0, T, steps, dim):
    """Shot without limit enforcement; diverged shots still abort."""
    return integrate_shot(rhs, y0, T, steps, dim, limits=None)


# --------------------------------------------------------------------------
# Decision variables, residuals, costs
# --------------------------------------------------------------------------

def _free_rate_dim(problem: TransitionProblem) -> int:
    return problem.dim if problem.variant is Variant.PATH else 2 * problem.dim


def initial_state(problem: TransitionProblem, rates: np.ndarray) -> np.ndarray:
    """Shot initial state from the free initial rates.

    Path shots pin position only and take the free velocity; spline shots pin
    position and velocity to the source gait for a smooth departure.
    """
    r0, rd0, _ = problem.source.eval(problem.t0)
    if problem.variant is Variant.PATH:
        return np.concatenate([r0, rates])
    return np.concatenate([r0, rd0, rates])


def bvp_residual(problem: TransitionProblem, t_f: float, traj: Trajectory) -> np.ndarray:
    """Boundary error of a completed shot against the target gait at phase t_f."""
    rT = traj.r[-1]
    rdT = traj.rdot[-1]
    rt, rdt, _ = problem.target.eval(t_f)
    if problem.variant is Variant.PATH:
        return rT - rt
    return np.concatenate([rT - rt, rdT - rdt])


def trajectory_cost(problem: TransitionProblem, traj: Trajectory) -> float:
    """Variant cost integral over the shot, by trapezoidal quadrature.

    path: metric-squared speed; accel: metric-squared covariant acceleration;
    torque: cometric-squared effort norm (equals the actuator-torque norm
    squared by construction of h).
    """
    n = problem.dim
    if problem.variant is Variant.PATH:
        Ms = problem.metric.matrix_batch(traj.r)
        integrand = np.einsum("ki,kij,kj->k", traj.rdot, Ms, traj.rdot)
    elif problem.variant is Variant.ACCEL:
        a = traj.extra[:, :n]
        Ms = problem.metric.matrix_batch(traj.r)
        integrand = np.einsum("ki,kij,kj->k", a, Ms, a)
    else:
        E = traj.extra[:, :n]
        hstars = dual_metric_batch(problem.torque_metric.matrix_batch(traj.r))
        integrand = np.einsum("ki,kij,kj->k", E, hstars, E)
    return float(np.trapezoid(integrand, traj.t))


def path_length(problem: TransitionProblem, traj: Trajectory) -> float:
    """Metric path length of the shot (trapezoidal)."""
    Ms = problem.metric.matrix_batch(traj.r)
    speed = np.sqrt(np.maximum(
        np.einsum("ki,kij,kj->k", traj.rdot, Ms, traj.rdot), 0.0))
    return float(np.trapezoid(speed, traj.t))


# --------------------------------------------------------------------------
# Outer optimization
# --------------------------------------------------------------------------

class _DecisionCodec:
    """Maps the active decision subvector to (t_f, T, rates) and back."""

    def __init__(self, problem: TransitionProblem):
        s = problem.settings
        self.fixed_tf = s.fixed_tf
        self.fixed_T = s.fixed_T
        self.rate_dim = _free_rate_dim(problem)
        Tsrc = problem.source.period
        self.T_bounds = (s.time_bounds[0] * Tsrc, s.time_bounds[1] * Tsrc)

    def pack(self, t_f, T, rates) -> np.ndarray:
        parts = []
        if self.fixed_tf is None:
            parts.append([t_f])
        if self.fixed_T is None:
            parts.append([T])
        parts.append(rates)
        return np.concatenate(parts)

    def unpack(self, x: np.ndarray):
        i = 0
        if self.fixed_tf is None:
            t_f = float(x[0])
            i = 1
        else:
            t_f = self.fixed_tf
        if self.fixed_T is None:
            T = float(x[i])
            i += 1
        else:
            T = self.fixed_T
        return t_f, T, np.asarray(x[i:], dtype=float)

    def clip(self, x: np.ndarray):
        """Clip T into bounds; returns (clipped x, squared violation)."""
        x = np.array(x, dtype=float)
        pen = 0.0
        if self.fixed_T is None:
            i = 0 if self.fixed_tf is not None else 1
            lo, hi = self.T_bounds
            T = x[i]
            if T < lo or T > hi:
                pen = (min(T - lo, 0.0)) ** 2 + (max(T - hi, 0.0)) ** 2
                x[i] = np.clip(T, lo, hi)
        return x, pen


def _shoot(problem: TransitionProblem, t_f: float, T: float, rates: np.ndarray,
           steps: int):
    rhs = make_rhs(problem)
    y0 = initial_state(problem, rates)
    traj, status = _integrate_no_abort(rhs, y0, T, steps, problem.dim)
    return traj, status


def _limit_violation(problem: TransitionProblem, traj: Trajectory) -> float:
    """Total squared limit violation over the shot samples (0 when feasible)."""
    lim = problem.limits
    pen = 0.0
    if lim.joint is not None:
        pen += float(np.sum(np.maximum(np.abs(traj.r) - lim.joint, 0.0) ** 2))
    if lim.acceleration is not None:
        pen += float(np.sum(np.maximum(np.abs(traj.rddot) - lim.acceleration, 0.0) ** 2))
    return pen


def _objective(problem: TransitionProblem, codec: _DecisionCodec, x: np.ndarray,
               steps: int) -> float:
    s = problem.settings
    x, bound_pen = codec.clip(x)
    t_f, T, rates = codec.unpack(x)
    traj, status = _shoot(problem, t_f, T, rates, steps)
    if status is Status.DIVERGED or len(traj.t) < 2:
        return 1e12 * (1.0 + bound_pen)
    res = bvp_residual(problem, t_f, traj)
    cost = trajectory_cost(problem, traj)
    viol = _limit_violation(problem, traj)
    return (s.residual_weight * float(res @ res)
            + s.cost_weight * cost
            + 1e8 * bound_pen + 1e6 * viol)


def _hermite_rates(problem: TransitionProblem, t_f: float, T: float) -> np.ndarray:
    """Flat-space Hermite-cubic initial rates as a shooting seed."""
    n = problem.dim
    r0, rd0, _ = problem.source.eval(problem.t0)
    r1, rd1, _ = problem.target.eval(t_f)
    delta = r1 - r0
    if problem.variant is Variant.PATH:
        return delta / T
    a0 = 6.0 * delta / T ** 2 - (4.0 * rd0 + 2.0 * rd1) / T
    j0 = -12.0 * delta / T ** 3 + 6.0 * (rd0 + rd1) / T ** 2
    if problem.variant is Variant.ACCEL:
        return np.concatenate([a0, j0])
    h0 = problem.torque_metric.matrix(r0)
    return np.concatenate([h0 @ a0, h0 @ j0])


def _initial_grid(problem: TransitionProblem, codec: _DecisionCodec):
    s = problem.settings
    if s.fixed_tf is not None:
        tf_vals = [s.fixed_tf]
    else:
        P = problem.target.period
        tf_vals = [k * P / s.grid_size for k in range(s.grid_size)]
    if s.fixed_T is not None:
        T_vals = [s.fixed_T]
    elif problem.variant is Variant.PATH:
        # geodesic cost |gamma_dot|^2 T = L^2 / T strictly decreases in T while
        # the path shape only depends on gamma_dot0 * T, so the optimum always
        # sits at the upper duration bound: seed it there
        T_vals = [codec.T_bounds[1]]
    else:
        lo, hi = codec.T_bounds
        Tsrc = problem.source.period
        mid = float(np.clip(Tsrc, lo, hi))
        T_vals = sorted(set(np.clip([0.5 * mid, mid, 2.0 * mid], lo, hi)))
    factors = [0.5, 1.0, 1.5][: s.grid_size]
    guesses = []
    for t_f, T, fac in itertools.product(tf_vals, T_vals, factors):
        rates = fac * _hermite_rates(problem, t_f, T)
        guesses.append(codec.pack(t_f, T, rates))
    return guesses


def _polish(problem: TransitionProblem, codec: _DecisionCodec, x: np.ndarray):
    """Damped least-squares polish of the boundary error alone (cost weight 0)."""
    s = problem.settings

    def resfun(z):
        z, _ = codec.clip(z)
        t_f, T, rates = codec.unpack(z)
        traj, status = _shoot(problem, t_f, T, rates, s.steps)
        if status is Status.DIVERGED or len(traj.t) < 2:
            m = problem.dim if problem.variant is Variant.PATH else 2 * problem.dim
            return np.full(m, 1e6)
        return bvp_residual(problem, t_f, traj)

    lo = np.full(len(x), -np.inf)
    hi = np.full(len(x), np.inf)
    if codec.fixed_T is None:
        i = 0 if codec.fixed_tf is not None else 1
        lo[i], hi[i] = codec.T_bounds
    x = np.clip(x, lo, hi)
    try:
        result = least_squares(
            resfun, x, bounds=(lo, hi), method="trf",
            diff_step=1e-7, xtol=1e-14, ftol=1e-14, gtol=1e-14,
            max_nfev=s.polish_max_nfev * (len(x) + 1))
        return result.x
    except Exception:
        return x


def solve_transition(problem: TransitionProblem) -> Solution:
    """Minimize w |BVP error|^2 + lambda (trajectory cost) by shooting.

    Stage 1 probes a grid of (arrival phase, duration, seed-rate magnitude)
    guesses and runs a Nelder-Mead simplex from the best few.  Stage 2 applies
    a damped least-squares polish to the boundary error.  Deterministic for a
    fixed problem: no randomness enters the search.
    """
    s = problem.settings
    codec = _DecisionCodec(problem)
    guesses = _initial_grid(problem, codec)
    probe = [(float(_objective(problem, codec, g, s.search_steps)), i)
             for i, g in enumerate(guesses)]
    probe.sort()
    candidates = []
    for _, i in probe[: s.nm_starts]:
        res = minimize(
            lambda z: _objective(problem, codec, z, s.search_steps),
            guesses[i], method="Nelder-Mead",
            options={"maxiter": s.nm_maxiter, "xatol": 1e-9, "fatol": 1e-11,
                     "adaptive": True})
        candidates.append((float(res.fun), res.x))
    candidates.sort(key=lambda c: c[0])
    # polish the best simplex result and any rival within an order of magnitude
    best_fun = candidates[0][0]
    evaluated = []
    for fun, x in candidates:
        if fun > 10.0 * max(best_fun, 1e-12) and evaluated:
            continue
        x = _polish(problem, codec, x)
        x, _ = codec.clip(x)
        t_f, T, rates = codec.unpack(x)
        traj, status = _shoot(problem, t_f, T, rates, s.steps)
        if status is Status.DIVERGED or len(traj.t) < 2:
            evaluated.append((Status.DIVERGED, x, None, np.array([np.inf]), np.inf))
            continue
        res_vec = bvp_residual(problem, t_f, traj)
        cost = trajectory_cost(problem, traj)
        if _limit_violation(problem, traj) > 0.0:
            status = Status.LIMIT_VIOLATED
        elif float(np.linalg.norm(res_vec)) < s.tolerance:
            status = Status.CONVERGED
        else:
            status = Status.MAX_ITERATIONS
        evaluated.append((status, x, traj, res_vec, cost))

    def rank(item):
        status, x, traj, res_vec, cost = item
        order = {Status.CONVERGED: 0, Status.MAX_ITERATIONS: 1,
                 Status.LIMIT_VIOLATED: 2, Status.DIVERGED: 3}[status]
        _, T, _ = codec.unpack(x)
        if status is Status.CONVERGED:
            return (order, cost, T)
        return (order, float(np.linalg.norm(res_vec)), T)

    evaluated.sort(key=rank)
    status, x, traj, res_vec, cost = evaluated[0]
    t_f, T, rates = codec.unpack(x)
    decision = {"t_f": t_f, "T": T, "rates": rates,
                "t0": problem.t0, "variant": problem.variant.value}
    return Solution(problem=problem, status=status, trajectory=traj,
                    decision=decision, residual=np.asarray(res_vec),
                    residual_norm=float(np.linalg.norm(res_vec)),
                    cost=float(cost) if np.isfinite(cost) else np.inf)


def sweep_transitions(problem: TransitionProblem, phase_count: int = 12) -> list[Solution]:
    """Independent solves for equally spaced departure phases of the source gait."""
    if phase_count < 1:
        raise ValueError("phase count must be >= 1")
    phases = problem.source.phase_points(phase_count)
    return [solve_transition(replace(problem, t0=t0)) for t0, _ in phases]


# --------------------------------------------------------------------------
# Defining-equation oracle
# --------------------------------------------------------------------------

def _fd_derivative(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences on a uniform grid.

    The first and last two samples get copies of the nearest interior value;
    callers exclude a boundary margin anyway.
    """
    out = np.empty_like(y)
    out[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)
    out[:2] = out[2]
    out[-2:] = out[-3]
    return out


def ode_residual(problem: TransitionProblem, solution: Solution,
                 check_points: int = 48) -> float:
    """Largest defining-ODE residual of a solution, in the trajectory scale.

    The solved trajectory is re-integrated on a refined grid; all time
    derivatives are then recomputed by finite differences of the samples and
    all geometry (Christoffels, curvature, cometric derivative) is re-evaluated
    from the metric field.  The residual is normalized by the magnitude of the
    largest term entering the equation.
    """
    s = problem.settings
    d = solution.decision
    traj, status = _shoot(problem, d["t_f"], d["T"], d["rates"],
                          s.steps * s.oracle_refine)
    if status is not None:
        return np.inf
    n = problem.dim
    t, r, rd = traj.t, traj.r, traj.rdot
    h = float(t[1] - t[0])
    rd_fd = _fd_derivative(r, h)
    rdd_fd = _fd_derivative(rd_fd, h)
    # chained stencils contaminate several samples at each end; check well
    # inside the interior
    margin = 12
    idx = np.linspace(margin, len(t) - 1 - margin, check_points).astype(int)
    worst = 0.0
    if problem.variant is Variant.PATH:
        for k in idx:
            G = problem.metric.christoffel(r[k])
            lhs = rdd_fd[k] + np.einsum("kij,i,j->k", G, rd_fd[k], rd_fd[k])
            scale = max(1.0, float(np.abs(rdd_fd[k]).max()))
            worst = max(worst, float(np.linalg.norm(lhs)) / scale)
        return worst
    if problem.variant is Variant.ACCEL:
        # rebuild a and j from position samples alone, then test the spline ODE
        a_fd = np.empty_like(r)
        Gs = [None] * len(t)
        for k in range(len(t)):
            Gs[k] = problem.metric.christoffel(r[k])
            a_fd[k] = rdd_fd[k] + np.einsum("kij,i,j->k", Gs[k], rd_fd[k], rd_fd[k])
        adot = _fd_derivative(a_fd, h)
        j_fd = np.empty_like(r)
        for k in range(len(t)):
            j_fd[k] = adot[k] + np.einsum("kij,i,j->k", Gs[k], rd_fd[k], a_fd[k])
        jdot = _fd_derivative(j_fd, h)
        for k in idx:
            _, R = christoffel_and_curvature(problem.metric, r[k])
            cov_j = jdot[k] + np.einsum("kij,i,j->k", Gs[k], rd_fd[k], j_fd[k])
            curv = np.einsum("lkij,k,i,j->l", R, rd_fd[k], a_fd[k], rd_fd[k])
            lhs = cov_j + curv
            scale = max(1.0, float(np.abs(curv).max()), float(np.abs(j_fd[k]).max()))
            worst = max(worst, float(np.linalg.norm(lhs)) / scale)
        return worst
    # torque: rebuild E = h a from position samples
    hfield = problem.torque_metric
    a_fd = np.empty_like(r)
    E_fd = np.empty_like(r)
    Gs = [None] * len(t)
    for k in range(len(t)):
        Gs[k] = problem.metric.christoffel(r[k])
        a_fd[k] = rdd_fd[k] + np.einsum("kij,i,j->k", Gs[k], rd_fd[k], rd_fd[k])
        E_fd[k] = hfield.matrix(r[k]) @ a_fd[k]
    Edot = _fd_derivative(E_fd, h)
    Ec_fd = np.empty_like(r)
    for k in range(len(t)):
        Ec_fd[k] = Edot[k] - np.einsum("kij,j,k->i", Gs[k], rd_fd[k], E_fd[k])
    Ecdot = _fd_derivative(Ec_fd, h)
    for k in idx:
        _, R = christoffel_and_curvature(problem.metric, r[k])
        cov_Ec = Ecdot[k] - np.einsum("kij,j,k->i", Gs[k], rd_fd[k], Ec_fd[k])
        curv = np.einsum("lkij,l,k,j->i", R, E_fd[k], rd_fd[k], rd_fd[k])
        incompat = cometric_incompatibility(problem.metric, hfield, r[k], E_fd[k],
                                            christoffel=Gs[k])
        lhs = cov_Ec + curv - incompat
        scale = max(1.0, float(np.abs(curv).max()), float(np.abs(Ec_fd[k]).max()))
        worst = max(worst, float(np.linalg.norm(lhs)) / scale)
    return worst
