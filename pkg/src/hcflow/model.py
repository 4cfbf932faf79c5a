"""Initial curves, flow parameters and exact circle solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import ClassVar, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BeyondExtinction, ConfigError, ExtinctBefore
from .grid import MIN_POINTS, grid_points

TWO_PI = 2.0 * math.pi
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


@dataclass(frozen=True)
class FlowParams:
    """Physical and discretisation parameters of a run.

    ``dt`` is the nominal step; the scheme uses ``T / M`` with
    ``M = round(T / dt)`` so that the last step lands exactly on ``T``.
    """

    beta: float = 0.0
    V0: float = 0.0
    J: int = 256
    dt: float = 1e-4
    T: float = 1.0
    snapshot_stride: int = 100
    k_cap: float = 1e4
    length_floor: float = 1e-4
    min_q_ratio: float = 1e-6

    def __post_init__(self):
        if not self.beta >= 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if int(self.J) != self.J or self.J < MIN_POINTS:
            raise ConfigError(f"J must be an integer >= {MIN_POINTS}, got {self.J}")
        if not self.T >= self.dt * (1 - 1e-12):
            raise ConfigError(f"T={self.T} must be >= dt={self.dt}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be a positive integer")
        if not (self.k_cap > 0 and self.length_floor >= 0 and self.min_q_ratio >= 0):
            raise ConfigError("stop thresholds must be nonnegative (k_cap > 0)")

    @property
    def h(self) -> float:
        return 1.0 / self.J

    @property
    def M(self) -> int:
        return max(1, int(round(self.T / self.dt)))

    @property
    def step_size(self) -> float:
        return self.T / self.M


# -- initial curves ---------------------------------------------------------


class _CurveSpec:
    kind: ClassVar[str]

    def __call__(self, rho) -> np.ndarray:
        raise NotImplementedError

    def sample(self, J: int) -> np.ndarray:
        """Vertex positions ``x_0(rho_k)`` on the uniform periodic grid."""
        return self(grid_points(J))

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        d.update({f.name: getattr(self, f.name) for f in fields(self)})
        return d


@dataclass(frozen=True)
class Circle(_CurveSpec):
    kind: ClassVar[str] = "circle"
    r0: float = 1.0

    def __call__(self, rho):
        u = TWO_PI * np.asarray(rho, dtype=float)
        return self.r0 * np.stack([np.cos(u), np.sin(u)], axis=-1)


@dataclass(frozen=True)
class Ellipse(_CurveSpec):
    kind: ClassVar[str] = "ellipse"
    a: float = 1.5
    b: float = 1.0

    def __call__(self, rho):
        u = TWO_PI * np.asarray(rho, dtype=float)
        return np.stack([self.a * np.cos(u), self.b * np.sin(u)], axis=-1)


@dataclass(frozen=True)
class PerturbedCircle(_CurveSpec):
    """``r0 (cos g(2 pi rho), sin g(2 pi rho))`` with ``g(u) = u + eps sin u``."""

    kind: ClassVar[str] = "perturbed_circle"
    r0: float = 1.0
    eps: float = 0.1

    def angle(self, rho):
        u = TWO_PI * np.asarray(rho, dtype=float)
        return u + self.eps * np.sin(u)

    def __call__(self, rho):
        g = self.angle(rho)
        return self.r0 * np.stack([np.cos(g), np.sin(g)], axis=-1)


@dataclass(frozen=True)
class Dumbbell(_CurveSpec):
    """Smooth nonconvex curve with a waist of half-height ``scale * neck`` at x1 = 0.

    ``x(rho) = scale * (cos u, sin u * (neck + cos^2 u))`` with ``u = 2 pi rho``.
    """

    kind: ClassVar[str] = "dumbbell"
    neck: float = 0.12
    scale: float = 0.5

    def __call__(self, rho):
        u = TWO_PI * np.asarray(rho, dtype=float)
        c, s = np.cos(u), np.sin(u)
        return self.scale * np.stack([c, s * (self.neck + c * c)], axis=-1)


CURVE_KINDS = {cls.kind: cls for cls in (Circle, Ellipse, PerturbedCircle, Dumbbell)}


def curve_from_dict(d: dict) -> _CurveSpec:
    d = dict(d)
    try:
        cls = CURVE_KINDS[d.pop("kind")]
    except KeyError as exc:
        raise ConfigError(f"unknown or missing curve kind: {exc}") from None
    allowed = {f.name for f in fields(cls)}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) for {cls.kind}: {sorted(unknown)}")
    try:
        spec = cls(**{k: float(v) for k, v in d.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    _validate_curve(spec)
    return spec


def _validate_curve(spec) -> None:
    if isinstance(spec, Circle | PerturbedCircle) and not spec.r0 > 0:
        raise ConfigError("r0 must be positive")
    if isinstance(spec, Ellipse) and not (spec.a > 0 and spec.b > 0):
        raise ConfigError("semi-axes must be positive")
    if isinstance(spec, Dumbbell) and not (0 < spec.neck < 1 and spec.scale > 0):
        raise ConfigError("dumbbell needs 0 < neck < 1 and scale > 0")


def eval_initial_curve(spec: _CurveSpec, rho) -> np.ndarray:
    return spec(rho)


# -- circles ----------------------------------------------------------------


def extinction_time(r0: float) -> float:
    """Collapse time ``sqrt(pi/2) r0`` of a circle started at rest."""
    return SQRT_HALF_PI * r0


def _erf_argument(r0: float, t: float) -> float:
    """Solve ``t = sqrt(pi/2) r0 erf(s)`` for ``s >= 0`` by bracketed root finding."""
    t_ext = extinction_time(r0)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t >= t_ext:
        raise BeyondExtinction(t, t_ext)
    if t == 0:
        return 0.0
    z = t / t_ext
    if z < 0.5:
        f = lambda s: math.erf(s) - z  # noqa: E731
    else:
        # erfc keeps full relative accuracy of 1 - z close to extinction
        w = (t_ext - t) / t_ext
        f = lambda s: w - math.erfc(s)  # noqa: E731
    return brentq(f, 0.0, 30.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def circle_radius_exact_v0(r0: float, t: float) -> float:
    """Radius ``r0 exp(-[erfinv(sqrt(2/pi) t / r0)]^2)`` of a circle released at rest."""
    s = _erf_argument(r0, t)
    return r0 * math.exp(-s * s)


def circle_rdot_exact_v0(r0: float, t: float) -> float:
    """Radial velocity ``-sqrt(2 ln(r0/r))`` (the shrinking branch)."""
    return -math.sqrt(2.0) * _erf_argument(r0, t)


class CircleRadiusState(NamedTuple):
    r: float
    rdot: float
    t: float


@dataclass(frozen=True)
class RadiusTrajectory:
    t: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    r0: float
    V0: float

    def __iter__(self):
        for t, r, rd in zip(self.t, self.r, self.rdot):
            yield CircleRadiusState(float(r), float(rd), float(t))

    def __len__(self):
        return self.t.shape[0]

    def first_integral_defect(self) -> np.ndarray:
        """``1/2 rdot^2 - ln(r0/r) - 1/2 V0^2`` at every sample."""
        return 0.5 * self.rdot**2 - np.log(self.r0 / self.r) - 0.5 * self.V0**2


def circle_radius_ode(
    r0: float,
    V0: float,
    t_end: float,
    samples: int | None = None,
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> RadiusTrajectory:
    """Integrate ``r'' = -1/r`` with ``r(0) = r0``, ``r'(0) = V0``.

    Uses an embedded Runge-Kutta 8(5,3) pair. With ``samples`` the trajectory
    is reported on ``samples`` equispaced times, otherwise at accepted steps.

    Raises
    ------
    ExtinctBefore
        If ``r`` falls to ``1e-6 r0`` before ``t_end``; the exception carries
        the extinction time and the partial trajectory ending at that point.
    """
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    r_floor = 1e-6 * r0

    def rhs(_t, y):
        return [y[1], -1.0 / y[0]]

    def hit_floor(_t, y):
        return y[0] - r_floor

    hit_floor.terminal = True
    hit_floor.direction = -1

    t_eval = None if samples is None else np.linspace(0.0, t_end, samples)
    sol = solve_ivp(
        rhs, (0.0, t_end), [r0, V0], method="DOP853",
        rtol=rtol, atol=atol * r0, events=hit_floor, t_eval=t_eval,
    )
    if sol.status == 1:
        t_star = float(sol.t_events[0][0])
        y_star = sol.y_events[0][0]
        traj = RadiusTrajectory(
            np.append(sol.t, t_star), np.append(sol.y[0], y_star[0]),
            np.append(sol.y[1], y_star[1]), r0, V0,
        )
        raise ExtinctBefore(t_star, traj)
    traj = RadiusTrajectory(sol.t, sol.y[0], sol.y[1], r0, V0)
    if sol.status < 0:
        raise RuntimeError(sol.message)
    return traj


# -- reference solution -----------------------------------------------------


class FlowSample(NamedTuple):
    """Exact data at grid points: position, velocity, acceleration, tangent, tangent rate."""

    x: np.ndarray
    xt: np.ndarray
    xtt: np.ndarray
    tau: np.ndarray
    tau_t: np.ndarray


@dataclass(frozen=True)
class ReferenceFlow:
    """Exact solution ``r(t) (cos g(2 pi rho), sin g(2 pi rho))`` released at rest."""

    r0: float = 1.0
    curve: PerturbedCircle = field(default_factory=PerturbedCircle)

    @property
    def t_ext(self) -> float:
        return extinction_time(self.r0)

    def radius(self, t: float) -> tuple[float, float]:
        s = _erf_argument(self.r0, t)
        return self.r0 * math.exp(-s * s), -math.sqrt(2.0) * s

    def _unit(self, rho):
        g = self.curve.angle(rho)
        return np.stack([np.cos(g), np.sin(g)], axis=-1)

    def position_velocity(self, t: float, rho) -> tuple[np.ndarray, np.ndarray]:
        r, rdot = self.radius(t)
        e = self._unit(rho)
        return r * e, rdot * e

    def sample(self, t: float, rho) -> FlowSample:
        r, rdot = self.radius(t)
        e = self._unit(rho)
        tau = np.stack([-e[..., 1], e[..., 0]], axis=-1)
        return FlowSample(r * e, rdot * e, -e / r, tau, np.zeros_like(tau))


def reference_solution(r0: float, t: float, rho) -> tuple[np.ndarray, np.ndarray]:
    """Position and velocity of the perturbed-circle reference flow (eps = 0.1)."""
    return ReferenceFlow(r0, PerturbedCircle(r0=r0, eps=0.1)).position_velocity(t, rho)
