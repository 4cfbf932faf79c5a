"""Periodic grid functions and discrete curve geometry.

A grid function is stored as a float array of shape ``(J, 2)``; row ``k``
holds the value at ``rho_k = k*h`` with ``h = 1/J``. Index arithmetic wraps
around, so row 0 doubles as the value at ``rho_J``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSegment

MIN_POINTS = 4
THETA_MIN = 1e-8
Q_FLOOR_REL = 1e-14


def as_grid(values) -> np.ndarray:
    """Validate and convert ``values`` to a ``(J, 2)`` float array."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise ValueError(f"expected shape (J, 2), got {v.shape}")
    if v.shape[0] < MIN_POINTS:
        raise ValueError(f"need J >= {MIN_POINTS} grid points, got {v.shape[0]}")
    return v


def grid_points(J: int) -> np.ndarray:
    """Parameter values ``rho_k = k/J`` for ``k = 0..J-1``."""
    return np.arange(J) / J


def perp(v: np.ndarray) -> np.ndarray:
    """Clockwise rotation through pi/2, ``(a, b) -> (b, -a)``."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, b)


def backward_difference(v: np.ndarray) -> np.ndarray:
    """Periodic backward difference quotient ``(v_j - v_{j-1}) / h``."""
    v = as_grid(v)
    J = v.shape[0]
    return (v - np.roll(v, 1, axis=0)) * J


def norm_0h(v: np.ndarray) -> float:
    v = as_grid(v)
    return float(np.sqrt(np.sum(v * v) / v.shape[0]))


def norm_1h(v: np.ndarray) -> float:
    v = as_grid(v)
    dv = backward_difference(v)
    return float(np.sqrt((np.sum(v * v) + np.sum(dv * dv)) / v.shape[0]))


@dataclass(frozen=True)
class CurveGeometry:
    """Length elements, segment tangents and averaged vertex tangents of a polygon.

    ``q[k]`` and ``tau[k]`` belong to the segment ending at vertex ``k``;
    ``theta[k]`` is the normalised sum ``tau[k] + tau[k+1]`` and is NaN
    wherever ``theta_defined[k]`` is False.
    """

    q: np.ndarray
    tau: np.ndarray
    theta: np.ndarray
    theta_defined: np.ndarray

    @property
    def J(self) -> int:
        return self.q.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.q.shape[0]

    @property
    def q_next(self) -> np.ndarray:
        """``q_{j+1}`` aligned with index ``j``."""
        return np.roll(self.q, -1)

    @property
    def all_theta_defined(self) -> bool:
        return bool(np.all(self.theta_defined))

    def first_undefined_theta(self) -> int | None:
        bad = np.flatnonzero(~self.theta_defined)
        return int(bad[0]) if bad.size else None


def compute_geometry(x: np.ndarray) -> CurveGeometry:
    """Derive :class:`CurveGeometry` from vertex positions ``x``.

    Raises
    ------
    DegenerateSegment
        If some ``q_j`` is at or below ``1e-14`` times the polygon length.
    """
    dx = backward_difference(x)
    q = np.hypot(dx[:, 0], dx[:, 1])
    length = float(np.sum(q)) / q.shape[0]
    floor = Q_FLOOR_REL * length
    bad = np.flatnonzero(~(q > floor))
    if bad.size:
        j = int(bad[0])
        raise DegenerateSegment(j, float(q[j]))
    tau = dx / q[:, None]
    s = tau + np.roll(tau, -1, axis=0)
    ns = np.hypot(s[:, 0], s[:, 1])
    defined = ns >= THETA_MIN
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(defined[:, None], s / ns[:, None], np.nan)
    return CurveGeometry(q=q, tau=tau, theta=theta, theta_defined=defined)


def curvature_sup(g: CurveGeometry) -> float:
    """Discrete maximal curvature ``max_j |delta tau_j| / q_j``."""
    dtau = (g.tau - np.roll(g.tau, 1, axis=0)) * g.J
    return float(np.max(np.hypot(dtau[:, 0], dtau[:, 1]) / g.q))


def polygon_length(g: CurveGeometry) -> float:
    return float(np.sum(g.q)) * g.h


def discrete_energy(g: CurveGeometry, v: np.ndarray) -> float:
    """Vertex-lumped analogue of ``1/2 int (|x_t|^2 + 2) |x_rho| drho``."""
    v = as_grid(v)
    weights = 0.5 * (g.q + g.q_next)
    return float(0.5 * g.h * np.sum(weights * (np.sum(v * v, axis=1) + 2.0)))


def signed_area(x: np.ndarray) -> float:
    """Shoelace area; positive for counterclockwise polygons."""
    xn = np.roll(x, -1, axis=0)
    return 0.5 * float(np.sum(x[:, 0] * xn[:, 1] - xn[:, 0] * x[:, 1]))
