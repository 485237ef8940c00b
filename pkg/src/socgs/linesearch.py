"""Step-size selection on ``[0, gamma_max]``."""

from __future__ import annotations

import math
from dataclasses import dataclass

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LineSearchConfig:
    tolerance: float = 1e-10
    max_evaluations: int = 100

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("line-search tolerance must be > 0")
        if self.max_evaluations < 3:
            raise ValueError("line search needs at least 3 evaluations")


DEFAULT_LINE_SEARCH = LineSearchConfig()


def golden_section(phi, gamma_max: float, cfg: LineSearchConfig = DEFAULT_LINE_SEARCH) -> float:
    """Minimize ``phi`` on ``[0, gamma_max]`` by golden-section search.

    The endpoints are evaluated too and the best of the three candidates is
    returned, so the result never has a larger value than ``phi(0)`` and
    monotone functions return the exact endpoint.
    """
    if not gamma_max > 0:
        raise ValueError("gamma_max must be > 0")

    def ev(t):
        val = float(phi(t))
        if not math.isfinite(val):
            raise FloatingPointError(f"line-search function is {val} at gamma={t!r}")
        return val

    f_lo, f_hi = ev(0.0), ev(gamma_max)
    evals = 2
    a, b = 0.0, gamma_max
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = ev(c), ev(d)
    evals += 2
    while b - a > cfg.tolerance and evals < cfg.max_evaluations:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = ev(d)
        evals += 1
    t_mid, f_mid = (c, fc) if fc <= fd else (d, fd)
    # Ties prefer the interior point, then the far endpoint (it can drop a vertex).
    best = min(
        [(f_mid, 0, t_mid), (f_hi, 1, gamma_max), (f_lo, 2, 0.0)],
    )
    return best[2]


def exact_quadratic_step(slope: float, curvature: float, gamma_max: float) -> float:
    """Minimizer of ``slope * g + curvature * g**2 / 2`` clamped to ``[0, gamma_max]``."""
    if not curvature > 0:
        raise ValueError("nonconvex direction")
    return min(max(-slope / curvature, 0.0), gamma_max)
