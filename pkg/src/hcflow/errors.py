"""Exception hierarchy shared by the solver, model and CLI layers."""


class FlowError(Exception):
    """Base class for all errors raised by :mod:`hcflow`."""


class DegenerateSegment(FlowError):
    """Two consecutive vertices (nearly) coincide."""

    def __init__(self, j: int, q: float):
        self.j = j
        self.q = q
        super().__init__(f"degenerate segment at j={j} (q={q:.3e})")


class HairpinSingularity(FlowError):
    """Adjacent segment tangents are antiparallel, so the vertex tangent is undefined."""

    def __init__(self, j: int):
        self.j = j
        super().__init__(f"averaged vertex tangent undefined at j={j}")


class BlowUpDetected(FlowError):
    """A stopping threshold tripped.

    ``reason`` is one of ``"curvature"``, ``"length"``, ``"min_q"`` or
    ``"inversion"`` (a segment tangent reversed within one step); ``state``
    is the first state that violated the threshold.
    """

    def __init__(self, reason: str, t: float, value: float, state=None):
        self.reason = reason
        self.t = t
        self.value = value
        self.state = state
        super().__init__(f"blow-up detected ({reason}={value:.6g}) at t={t:.6g}")


class NotDiagonallyDominant(FlowError):
    def __init__(self, j: int, margin: float):
        self.j = j
        self.margin = margin
        super().__init__(f"row {j} not strictly diagonally dominant (margin={margin:.3e})")


class SingularSystem(FlowError):
    pass


class BeyondExtinction(FlowError):
    """Requested time is at or past the extinction time of the circle."""

    def __init__(self, t: float, t_ext: float):
        self.t = t
        self.t_ext = t_ext
        super().__init__(f"t={t:.6g} is beyond the extinction time {t_ext:.6g}")


class ExtinctBefore(FlowError):
    """The radius ODE reached the extinction floor before ``t_end``."""

    def __init__(self, t_star: float, trajectory=None):
        self.t_star = t_star
        self.trajectory = trajectory
        super().__init__(f"circle extinct at t*={t_star:.10g}")


class StepSizeUnderflow(FlowError):
    pass


class ConfigError(FlowError):
    pass
