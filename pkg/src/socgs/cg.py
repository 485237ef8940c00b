"""Conditional-gradient steps and solver loops (vanilla CG and away-step CG)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Counters,
    InvariantError,
    IterateState,
    SolveTrace,
    StoppingCriterion,
    TraceRecorder,
    Vertex,
    convex_combination,
)
from .linesearch import DEFAULT_LINE_SEARCH, LineSearchConfig, exact_quadratic_step, golden_section
from .regions import FeasibleRegion, away_vertex

# rule(x, d, g, gamma_max) -> gamma, with g the gradient at x
StepRule = Callable[[np.ndarray, np.ndarray, np.ndarray, float], float]

# Kind tags used in traces for each step outcome.
TRACE_KIND = {"fw": "fw", "fw_full": "fw", "away": "away", "away_drop": "drop"}

_MAX_FLOAT = float(np.finfo(float).max)


def golden_rule(objective, cfg: LineSearchConfig = DEFAULT_LINE_SEARCH) -> StepRule:
    """Golden-section search on ``f(x + gamma d) - f(x)``."""

    def rule(x, d, g, gamma_max):
        return golden_section(objective.line_function(x, d), gamma_max, cfg)

    return rule


def exact_rule(curvature: Callable[[np.ndarray, np.ndarray], float]) -> StepRule:
    """Closed-form step for a quadratic; ``curvature(x, d)`` returns ``d^T H d``."""

    def rule(x, d, g, gamma_max):
        return exact_quadratic_step(float(g @ d), curvature(x, d), gamma_max)

    return rule


def line_search_for(objective, cfg: LineSearchConfig = DEFAULT_LINE_SEARCH) -> StepRule:
    if objective.is_quadratic:
        return exact_rule(objective.curvature)
    return golden_rule(objective, cfg)


@dataclass(frozen=True)
class StepOutcome:
    state: IterateState
    kind: str  # fw | fw_full | away | away_drop
    gamma: float
    fw_gap: float
    lmo_calls: int
    vertex: Vertex


def fw_gap(g, x, region: FeasibleRegion) -> float:
    """Frank-Wolfe gap ``<g, x - lmo(g)>``."""
    g = np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != g.shape:
        raise ValueError(f"dimension mismatch: g {g.shape}, x {x.shape}")
    v = region.lmo(g)
    return float(g @ (x - v.dense))


def _moved(state: IterateState, active_set) -> IterateState:
    return IterateState(convex_combination(active_set), active_set)


def _fw_branch(g, state, v, gap, rule, lmo_calls):
    d = v.dense - state.x
    if not np.any(d):
        return StepOutcome(state, "fw", 0.0, gap, lmo_calls, v)
    gamma = rule(state.x, d, g, 1.0)
    if gamma <= 0.0:
        return StepOutcome(state, "fw", 0.0, gap, lmo_calls, v)
    new_set = state.active_set.fw_update(v, gamma)
    kind = "fw_full" if gamma >= 1.0 else "fw"
    return StepOutcome(_moved(state, new_set), kind, gamma, gap, lmo_calls, v)


def cg_step(grad, state: IterateState, region: FeasibleRegion, rule: StepRule, v: Optional[Vertex] = None) -> StepOutcome:
    """One Frank-Wolfe step ``x + gamma (v - x)`` with ``gamma`` from ``rule``.

    ``v`` may be supplied when the caller already queried the LMO at ``grad``.
    """
    g = np.asarray(grad, dtype=float)
    lmo_calls = 0
    if v is None:
        v = region.lmo(g)
        lmo_calls = 1
    gap = float(g @ (state.x - v.dense))
    return _fw_branch(g, state, v, gap, rule, lmo_calls)


def acg_step(grad, state: IterateState, region: FeasibleRegion, rule: StepRule, v: Optional[Vertex] = None) -> StepOutcome:
    """One away-step CG step with active-set bookkeeping.

    Takes the Frank-Wolfe direction ``v - x`` when the FW gap is at least
    the away gap ``<g, a - x>`` and the away direction ``x - a`` otherwise.
    An away step with ``gamma == gamma_max`` removes ``a`` from the set.
    """
    g = np.asarray(grad, dtype=float)
    lmo_calls = 0
    if v is None:
        v = region.lmo(g)
        lmo_calls = 1
    x = state.x
    gap = float(g @ (x - v.dense))
    a = away_vertex(state.active_set, g)
    away_gap = float(g @ (a.dense - x))
    if gap >= away_gap:
        return _fw_branch(g, state, v, gap, rule, lmo_calls)

    lam_a = state.active_set.weight_of(a)
    # 1 - lam_a from the other weights; the subtraction underflows when they are tiny.
    rest = math.fsum(w for u, w in state.active_set if u != a)
    if rest <= 0.0:
        raise InvariantError("away step on a singleton active set")
    d = x - a.dense
    if not np.any(d):
        return StepOutcome(state, "away", 0.0, gap, lmo_calls, v)
    gamma_max = min(lam_a / rest, _MAX_FLOAT)
    gamma = rule(x, d, g, gamma_max)
    if gamma <= 0.0:
        return StepOutcome(state, "away", 0.0, gap, lmo_calls, v)
    new_set = state.active_set.away_update(a, gamma, gamma_max)
    kind = "away_drop" if gamma >= gamma_max else "away"
    return StepOutcome(_moved(state, new_set), kind, gamma, gap, lmo_calls, v)


class DropAccounting:
    """Tracks the drop-step bound ``#drops <= #fw + |S_0| - 1``."""

    def __init__(self, initial_size: int):
        self.initial_size = initial_size
        self.fw = 0
        self.drops = 0

    def add(self, kind: str):
        if kind in ("fw", "fw_full"):
            self.fw += 1
        elif kind == "away_drop":
            self.drops += 1

    def ok(self) -> bool:
        return self.drops <= self.fw + self.initial_size - 1


def _run(step_fn, name, objective, region, x0, stop, audit, ls_cfg, on_step=None):
    counters = Counters()
    rec = TraceRecorder(name, f_opt=objective.f_opt, x_opt=objective.x_opt, counters=counters)
    rule = line_search_for(objective, ls_cfg)
    state = x0 if isinstance(x0, IterateState) else IterateState.from_vertex(x0)
    drops = DropAccounting(len(state.active_set))
    f_val = objective.value(state.x)
    kind = "fw"
    k = 0
    while True:
        g = objective.gradient(state.x)
        counters.fo += 1
        v = region.lmo(g)
        counters.lmo += 1
        gap = float(g @ (state.x - v.dense))
        rec.record(k, state.x, f_val, gap, kind)
        if stop.done(k, gap, rec.elapsed()):
            break
        out = step_fn(g, state, region, rule, v=v)
        f_new = objective.value(out.state.x)
        if audit:
            out.state.check()
            drops.add(out.kind)
            if not drops.ok():
                raise InvariantError(f"drop-step accounting violated at iteration {k + 1}")
            if f_new > f_val + 1e-12 * max(1.0, abs(f_val)):
                raise InvariantError(f"objective increased at iteration {k + 1}")
        if on_step is not None:
            on_step(k, out)
        state, f_val, kind = out.state, f_new, TRACE_KIND[out.kind]
        k += 1
    return rec.finish(state)


def run_acg(
    objective,
    region: FeasibleRegion,
    x0,
    stop: StoppingCriterion,
    audit: bool = False,
    ls_cfg: LineSearchConfig = DEFAULT_LINE_SEARCH,
    on_step=None,
) -> SolveTrace:
    """Away-step CG from vertex ``x0`` (or an `IterateState`).

    Record ``k`` holds ``x_k`` and its FW gap; the LMO call that certifies
    the gap also drives step ``k``, so ``lmo_calls == iter + 1``. Exact line
    search is used for quadratic objectives, golden-section otherwise.
    """
    return _run(acg_step, "acg", objective, region, x0, stop, audit, ls_cfg, on_step)


def run_cg(
    objective,
    region: FeasibleRegion,
    x0,
    stop: StoppingCriterion,
    audit: bool = False,
    ls_cfg: LineSearchConfig = DEFAULT_LINE_SEARCH,
    on_step=None,
) -> SolveTrace:
    """Vanilla CG with line search; same trace conventions as `run_acg`."""
    return _run(cg_step, "cg", objective, region, x0, stop, audit, ls_cfg, on_step)
