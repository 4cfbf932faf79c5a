"""Drive a full evolution: step to ``T`` or until a stopping condition fires."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, record_step
from .errors import BlowUpDetected, DegenerateSegment, HairpinSingularity
from .model import FlowParams
from .solver import SolverState, init_states, step

log = logging.getLogger(__name__)

REASONS = ("ReachedT", "BlowUpDetected", "HairpinSingularity", "DegenerateSegment")


@dataclass
class Snapshot:
    m: int
    t: float
    x: np.ndarray


@dataclass
class RunResult:
    params: FlowParams
    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    reason: str = "ReachedT"
    detail: str = ""
    trip_time: float | None = None
    final_state: SolverState | None = None
    systems_solved: int = 0

    @property
    def final_time(self) -> float:
        return self.records[-1].t if self.records else 0.0

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def run_flow(spec, params: FlowParams, keep_snapshots: bool = True) -> RunResult:
    """Evolve ``spec`` under ``params``, recording diagnostics at every step.

    Snapshots are taken every ``snapshot_stride`` steps and at termination.
    Geometric failures end the run and are reported in ``reason``; they are
    not re-raised.
    """
    result = RunResult(params)
    stride = params.snapshot_stride
    try:
        state = init_states(spec, params)
    except (HairpinSingularity, DegenerateSegment) as exc:
        result.reason = type(exc).__name__
        result.detail = str(exc)
        result.trip_time = 0.0
        return result

    def keep(s: SolverState):
        if keep_snapshots:
            result.snapshots.append(Snapshot(s.m, s.t, s.x_curr.copy()))

    result.records.append(record_step(state))
    keep(state)
    while state.m < params.M:
        try:
            state = step(state)
        except BlowUpDetected as exc:
            result.reason = "BlowUpDetected"
            result.detail = f"{exc.reason}={exc.value:.6g}"
            result.trip_time = exc.t
            result.systems_solved += 1
            if exc.state is not None:
                state = exc.state
                result.records.append(record_step(state))
            break
        except (HairpinSingularity, DegenerateSegment) as exc:
            result.reason = type(exc).__name__
            result.detail = str(exc)
            result.trip_time = state.t + params.step_size
            break
        result.systems_solved += 1
        result.records.append(record_step(state))
        if state.m % stride == 0:
            keep(state)
    if keep_snapshots and result.snapshots[-1].m != state.m:
        keep(state)
    result.final_state = state
    log.info("run ended at t=%.6g: %s %s", state.t, result.reason, result.detail)
    return result
