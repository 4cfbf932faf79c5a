"""Error norms, convergence orders, consistency residuals and per-step records."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import (
    compute_geometry,
    curvature_sup,
    discrete_energy,
    dot,
    grid_points,
    norm_0h,
    norm_1h,
    polygon_length,
)
from .model import FlowParams, FlowSample, PerturbedCircle, ReferenceFlow
from .solver import (
    SemidiscreteState,
    SolverState,
    discrete_curvature_vector,
    init_states,
    semidiscrete_rhs,
    step,
)

# t -> (x(t), xdot(t)) sampled at the grid points
GridSampler = Callable[[float], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class DiagnosticsRecord:
    m: int
    t: float
    length: float
    kinf: float
    inv_kinf: float
    energy: float
    min_q: float

    FIELDS = ("m", "t", "length", "kinf", "inv_kinf", "energy", "min_q")

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def record_step(state: SolverState) -> DiagnosticsRecord:
    """Length, curvature proxy, energy and smallest length element of ``x^m``.

    The energy uses the backward difference velocity ``(x^m - x^{m-1})/dt``.
    """
    g = state.geom_curr
    k = curvature_sup(g)
    return DiagnosticsRecord(
        m=state.m,
        t=state.t,
        length=polygon_length(g),
        kinf=k,
        inv_kinf=1.0 / k if k > 0 else math.inf,
        energy=discrete_energy(g, state.velocity()),
        min_q=float(np.min(g.q)),
    )


# -- errors against a reference ----------------------------------------------


def grid_sampler(reference: ReferenceFlow, J: int) -> GridSampler:
    rho = grid_points(J)
    return lambda t: reference.position_velocity(t, rho)


def error_position(sampler: GridSampler, xs: Sequence[np.ndarray], dt: float) -> float:
    """``max_{m=0..M} ||x(t_m) - x^m||_{1,h}`` over the full trajectory ``xs``."""
    return max(norm_1h(sampler(m * dt)[0] - x) for m, x in enumerate(xs))


def error_velocity(sampler: GridSampler, xs: Sequence[np.ndarray], dt: float) -> float:
    """``max_{m=1..M-1} ||xdot(t_m) - (x^{m+1} - x^{m-1})/(2 dt)||_{0,h}``."""
    M = len(xs) - 1
    if M < 2:
        raise ValueError("need at least two steps for the central difference")
    return max(
        norm_0h(sampler(m * dt)[1] - (xs[m + 1] - xs[m - 1]) / (2 * dt)) for m in range(1, M)
    )


def eoc(err_coarse: float, err_fine: float, h_coarse: float, h_fine: float) -> float:
    """Experimental order of convergence between two resolutions."""
    return math.log(err_coarse / err_fine) / math.log(h_coarse / h_fine)


@dataclass
class ConvergenceRow:
    J: int
    pos_err: float
    vel_err: float
    eoc_pos: float | None = None
    eoc_vel: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def convergence_level(J: int, T: float = 1.0, r0: float = 1.0, eps: float = 0.1) -> ConvergenceRow:
    """Run the reference benchmark at ``J`` with ``dt = h`` and measure both errors.

    Errors are accumulated while stepping so only three time levels are kept.
    """
    curve = PerturbedCircle(r0=r0, eps=eps)
    params = FlowParams(beta=0.0, V0=0.0, J=J, dt=1.0 / J, T=T, k_cap=math.inf,
                        length_floor=0.0, min_q_ratio=0.0)
    sample = grid_sampler(ReferenceFlow(r0, curve), J)
    dt = params.step_size
    state = init_states(curve, params)
    pos_err = norm_1h(sample(0.0)[0] - state.x_curr)
    vel_err = 0.0
    for _ in range(params.M):
        new = step(state)
        pos_err = max(pos_err, norm_1h(sample(new.t)[0] - new.x_curr))
        if state.m >= 1:
            central = (new.x_curr - state.x_prev) / (2 * dt)
            vel_err = max(vel_err, norm_0h(sample(state.t)[1] - central))
        state = new
    return ConvergenceRow(J, pos_err, vel_err)


def fill_eoc(rows: list[ConvergenceRow]) -> list[ConvergenceRow]:
    for prev, row in zip(rows, rows[1:]):
        hc, hf = 1.0 / prev.J, 1.0 / row.J
        row.eoc_pos = eoc(prev.pos_err, row.pos_err, hc, hf)
        row.eoc_vel = eoc(prev.vel_err, row.vel_err, hc, hf)
    return rows


def convergence_table(levels: Sequence[int], T: float = 1.0, r0: float = 1.0,
                      workers: int | None = None) -> list[ConvergenceRow]:
    levels = sorted(int(J) for J in levels)
    if workers == 1 or len(levels) == 1:
        rows = [convergence_level(J, T, r0) for J in levels]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(convergence_level, levels, [T] * len(levels), [r0] * len(levels)))
    return fill_eoc(rows)


# -- consistency and semidiscrete identities -----------------------------------


def residual_vectors(s: FlowSample, beta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise residuals ``R_j`` (planar) and ``Rtilde_j`` (scalar) of exact data ``s``.

    ``R`` is what is left when the exact solution is inserted into the
    semidiscrete equation, ``Rtilde`` the same for the length-element identity.
    """
    g = compute_geometry(s.x)
    R = s.xtt + beta * s.xt - discrete_curvature_vector(g) + dot(s.xt, s.tau_t)[:, None] * s.tau
    dv = (s.xt - np.roll(s.xt, 1, axis=0)) * g.J
    q_dot = dot(dv, g.tau)
    work = dot(s.xt, s.xtt) + beta * dot(s.xt, s.xt)
    weight = 0.25 * (g.q + g.q_next) * work  # index j: 1/4 (q_j + q_{j+1}) (...)_j
    return R, q_dot + np.roll(weight, 1) + weight


def consistency_residuals(sampler: Callable[[np.ndarray], FlowSample], J: int,
                          beta: float = 0.0) -> tuple[float, float]:
    """Max norms of the residuals of the semidiscrete equation and length identity.

    ``sampler(rho)`` returns exact data of a smooth flow at a fixed time.
    """
    R, Rt = residual_vectors(sampler(grid_points(J)), beta)
    return float(np.max(np.hypot(R[:, 0], R[:, 1]))), float(np.max(np.abs(Rt)))


def normality_defect(s: SemidiscreteState) -> float:
    """``max_j |xdot_j . theta_j|``."""
    g = compute_geometry(s.x)
    return float(np.max(np.abs(dot(s.v, g.theta))))


def length_identity_defect(s: SemidiscreteState, beta: float) -> float:
    """Max residual of the semidiscrete length-element identity along the ODE."""
    g = compute_geometry(s.x)
    v, a = semidiscrete_rhs(s, beta)
    dv = (v - np.roll(v, 1, axis=0)) * g.J
    q_dot = dot(dv, g.tau)
    weight = 0.25 * (g.q + g.q_next) * (dot(v, a) + beta * dot(v, v))
    return float(np.max(np.abs(q_dot + np.roll(weight, 1) + weight)))


def circumradius(x: np.ndarray) -> tuple[float, float]:
    """Mean distance of the vertices from their centroid and its relative spread."""
    r = np.hypot(*(x - x.mean(axis=0)).T)
    return float(r.mean()), float((r.max() - r.min()) / r.mean())
