"""Solve reports shared by the augmented Lagrangian solver and the
baselines: per-iteration traces, counters, and exact JSON round-tripping.
"""

import json
import time
from dataclasses import asdict, dataclass, field

from .residuals import Diagnostics


@dataclass
class IterationRecord:
    """One logged outer iteration (or residual check, for the baselines)."""

    eta: float
    iteration: int | None = None
    dual_step_norm: float | None = None
    sigma: float | None = None
    a_ok: bool | None = None
    b_ok: bool | None = None
    grad_norm: float | None = None
    newton_iters: int = 0
    cg_iters: int = 0
    lam_min_s: float | None = None
    min_z: float | None = None
    value: float | None = None


@dataclass
class SolveReport:
    """Counters and trace of one solve.

    For the augmented Lagrangian solver ``alm_iters`` counts outer
    iterations and ``per_iteration`` has one record per outer iteration;
    the baselines reuse the same container with ``alm_iters`` holding
    their own iteration count and one record per residual check.
    """

    solver: str
    alm_iters: int
    newton_iters_total: int
    warmstart_iters: int
    cg_iters_total: int
    eta_final: float
    converged: bool
    wall_time: float
    diagnostics: Diagnostics | None = None
    per_iteration: list[IterationRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["diagnostics"] = self.diagnostics.to_dict() if self.diagnostics else None
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        diag = d.pop("diagnostics", None)
        recs = [IterationRecord(**r) for r in d.pop("per_iteration", [])]
        return cls(
            diagnostics=Diagnostics.from_dict(diag) if diag else None,
            per_iteration=recs, **d)

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class Timer:
    """Wall-clock stopwatch for solver reports."""

    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self):
        return time.perf_counter() - self.start


def format_hms(seconds):
    """Render seconds as s / m:ss / h:mm:ss for the text tables."""
    total = int(round(seconds))
    h, rem = divmod(total, 3600)
    m, s = divmod(rem, 60)
    if h:
        return f"{h}:{m:02d}:{s:02d}"
    if m:
        return f"{m}:{s:02d}"
    return f"{s}"
