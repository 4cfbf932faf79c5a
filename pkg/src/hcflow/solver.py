"""Fully discrete two-step scheme and the semidiscrete method-of-lines system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowUpDetected, HairpinSingularity, StepSizeUnderflow
from .grid import (
    CurveGeometry,
    as_grid,
    compute_geometry,
    curvature_sup,
    dot,
    perp,
    polygon_length,
)
from .model import FlowParams
from .tridiag import CyclicTridiagonalSystem, solve_cyclic_tridiagonal


def _require_theta(g: CurveGeometry) -> None:
    j = g.first_undefined_theta()
    if j is not None:
        raise HairpinSingularity(j)


def discrete_curvature_vector(g: CurveGeometry) -> np.ndarray:
    """``2/(q_j + q_{j+1}) * (tau_{j+1} - tau_j) / h``."""
    w = 2.0 / (g.q + g.q_next)
    return (w / g.h)[:, None] * (np.roll(g.tau, -1, axis=0) - g.tau)


@dataclass(frozen=True)
class SolverState:
    """``(x^m, x^{m-1})`` at step ``m`` of a run with ``params``.

    ``length0`` is the initial polygon length used by the length stopping
    threshold. ``du`` is the increment ``x^m - x^{m-1}`` as produced by the
    solve; keeping it avoids recovering it by cancellation from the rounded
    positions. Geometry of both levels is derived lazily and memoised.
    """

    x_curr: np.ndarray
    x_prev: np.ndarray
    m: int
    params: FlowParams
    length0: float
    du: np.ndarray | None = field(default=None, repr=False, compare=False)
    _g_curr: CurveGeometry | None = field(default=None, repr=False, compare=False)
    _g_prev: CurveGeometry | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.du is None:
            object.__setattr__(self, "du", self.x_curr - self.x_prev)

    @property
    def t(self) -> float:
        return self.m * self.params.step_size

    @property
    def geom_curr(self) -> CurveGeometry:
        if self._g_curr is None:
            object.__setattr__(self, "_g_curr", compute_geometry(self.x_curr))
        return self._g_curr

    @property
    def geom_prev(self) -> CurveGeometry:
        if self._g_prev is None:
            object.__setattr__(self, "_g_prev", compute_geometry(self.x_prev))
        return self._g_prev

    def velocity(self) -> np.ndarray:
        """Backward difference ``(x^m - x^{m-1}) / dt``."""
        return self.du / self.params.step_size


def init_states(spec, params: FlowParams) -> SolverState:
    """Sample ``x^0`` and build ``x^{-1}`` from the second-order Taylor expansion.

    ``x^{-1} = x^0 - dt V0 theta^perp + dt^2/2 (w - beta V0 theta^perp)`` where
    ``w`` is the discrete curvature vector of ``x^0``.
    """
    x0 = as_grid(spec.sample(params.J))
    g0 = compute_geometry(x0)
    _require_theta(g0)
    dt = params.step_size
    normal = perp(g0.theta)
    w = discrete_curvature_vector(g0)
    V0, beta = params.V0, params.beta
    du = dt * V0 * normal - 0.5 * dt * dt * (w - beta * V0 * normal)
    return SolverState(x0, x0 - du, 0, params, polygon_length(g0), du=du, _g_curr=g0)


def _half_elliptic(c_low: np.ndarray, c_up: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``L y`` with ``(L y)_j = c_low_j (y_j - y_{j-1}) - c_up_j (y_{j+1} - y_j)``."""
    return c_low[:, None] * (y - np.roll(y, 1, axis=0)) - c_up[:, None] * (np.roll(y, -1, axis=0) - y)


def assemble_step_system(state: SolverState) -> CyclicTridiagonalSystem:
    """Linear system for the increment ``d = x^{m+1} - x^m``.

    One scalar matrix serves both coordinates. With ``u = x^m - x^{m-1}``
    the scheme reads

        (M/dt^2 + B/dt + L) d = (M/dt^2 - B/dt) u - 2 L x^m + L u - P,

    which is the averaged semi-implicit update rewritten in increment form,
    so the matrix is the same as for ``x^{m+1}`` itself.
    """
    g, gp = state.geom_curr, state.geom_prev
    _require_theta(g)
    _require_theta(gp)
    p = state.params
    h, dt, beta = p.h, p.step_size, p.beta
    q, qn = g.q, g.q_next
    x, u = state.x_curr, state.du

    mass = 0.5 * (q + qn) * h
    damp = 0.25 * beta * (q + qn) * h
    c_low = 0.5 / (h * q)
    c_up = 0.5 / (h * qn)

    diag = mass / dt**2 + damp / dt + c_low + c_up
    theta_rate = (g.theta - gp.theta) / dt
    projection = (mass * dot(u / dt, theta_rate))[:, None] * g.theta

    rhs = (
        (mass / dt**2 - damp / dt)[:, None] * u
        - 2.0 * _half_elliptic(c_low, c_up, x)
        + _half_elliptic(c_low, c_up, u)
        - projection
    )
    return CyclicTridiagonalSystem(lower=-c_low, diag=diag, upper=-c_up, rhs=rhs)


def check_thresholds(state: SolverState) -> None:
    """Raise :class:`BlowUpDetected` if the state violates a stopping threshold."""
    p = state.params
    g = state.geom_curr
    k = curvature_sup(g)
    if not k <= p.k_cap:
        raise BlowUpDetected("curvature", state.t, k, state)
    length = polygon_length(g)
    if length < p.length_floor * state.length0:
        raise BlowUpDetected("length", state.t, length, state)
    ratio = float(np.min(g.q) / np.mean(g.q))
    if ratio < p.min_q_ratio:
        raise BlowUpDetected("min_q", state.t, ratio, state)
    # a collapse can be stepped over in one step; the segments then reappear reversed
    turn = float(np.min(dot(g.tau, state.geom_prev.tau)))
    if turn < 0:
        raise BlowUpDetected("inversion", state.t, turn, state)


def step(state: SolverState) -> SolverState:
    """Advance one step of the linear semi-implicit scheme."""
    d = solve_cyclic_tridiagonal(assemble_step_system(state))
    new = SolverState(
        state.x_curr + d, state.x_curr, state.m + 1, state.params, state.length0,
        du=d, _g_prev=state.geom_curr,
    )
    new.geom_curr  # raises DegenerateSegment on collapse
    check_thresholds(new)
    return new


# -- semidiscrete system -----------------------------------------------------


@dataclass(frozen=True)
class SemidiscreteState:
    x: np.ndarray
    v: np.ndarray
    t: float = 0.0


def tangent_rates(g: CurveGeometry, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of ``tau`` and ``theta`` induced by vertex velocities ``v``."""
    dv = (v - np.roll(v, 1, axis=0)) * g.J
    tau_dot = (dv - dot(dv, g.tau)[:, None] * g.tau) / g.q[:, None]
    s = g.tau + np.roll(g.tau, -1, axis=0)
    s_dot = tau_dot + np.roll(tau_dot, -1, axis=0)
    ns = np.hypot(s[:, 0], s[:, 1])
    theta_dot = (s_dot - dot(s_dot, g.theta)[:, None] * g.theta) / ns[:, None]
    return tau_dot, theta_dot


def semidiscrete_rhs(s: SemidiscreteState, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(xdot, xddot)`` of the semidiscrete system at ``s``."""
    g = compute_geometry(s.x)
    _require_theta(g)
    _, theta_dot = tangent_rates(g, s.v)
    acc = (
        discrete_curvature_vector(g)
        - dot(s.v, theta_dot)[:, None] * g.theta
        - beta * s.v
    )
    return s.v, acc


def normal_initial_velocity(x0: np.ndarray, V0: float) -> np.ndarray:
    g = compute_geometry(x0)
    _require_theta(g)
    return V0 * perp(g.theta)


@dataclass(frozen=True)
class SemidiscreteTrajectory:
    t: np.ndarray
    x: np.ndarray  # (n, J, 2)
    v: np.ndarray  # (n, J, 2)

    def __getitem__(self, i) -> SemidiscreteState:
        return SemidiscreteState(self.x[i], self.v[i], float(self.t[i]))

    def __len__(self):
        return self.t.shape[0]


def integrate_semidiscrete(
    x0: np.ndarray,
    v0: np.ndarray,
    beta: float,
    t_end: float,
    tol: float = 1e-10,
    t_eval=None,
) -> SemidiscreteTrajectory:
    """Integrate the semidiscrete system with an adaptive 8th-order Runge-Kutta pair.

    ``tol`` bounds the local error of every component. The underlying
    controller measures the error in an RMS norm over all ``n = 4J``
    components, so it is handed ``tol / sqrt(n)``. ``t_eval`` defaults to 51
    equispaced samples on ``[0, t_end]``.
    """
    x0 = as_grid(x0)
    v0 = as_grid(v0)
    J = x0.shape[0]
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, 51)

    def rhs(t, y):
        x = y[: 2 * J].reshape(J, 2)
        v = y[2 * J :].reshape(J, 2)
        xd, vd = semidiscrete_rhs(SemidiscreteState(x, v, t), beta)
        return np.concatenate([xd.ravel(), vd.ravel()])

    y0 = np.concatenate([x0.ravel(), v0.ravel()])
    rms_tol = tol / np.sqrt(y0.size)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=rms_tol, atol=rms_tol, t_eval=t_eval)
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    n = sol.t.shape[0]
    x = sol.y[: 2 * J].T.reshape(n, J, 2)
    v = sol.y[2 * J :].T.reshape(n, J, 2)
    return SemidiscreteTrajectory(sol.t, x, v)
