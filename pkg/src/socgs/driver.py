"""Second-order conditional gradient sliding.

Each outer iteration advances an independent away-step CG sequence on ``f``,
computes an inexact projected variable-metric (PVM) step by running away-step
CG on a quadratic model of ``f`` until the model's FW gap drops below
``eps_k = (lb / ||grad f(x_k)||)**4``, and keeps whichever candidate has the
smaller objective value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .cg import acg_step, exact_rule, line_search_for
from .core import (
    Counters,
    InvariantError,
    IterateState,
    SolveTrace,
    StoppingCriterion,
    TraceRecorder,
)
from .linesearch import DEFAULT_LINE_SEARCH, LineSearchConfig
from .quadmodel import (
    ExactHessianOracle,
    IdentityHessianOracle,
    PerturbedHessianOracle,
    QuadraticModel,
)
from .regions import FeasibleRegion


@dataclass(frozen=True)
class KnownOptimum:
    """Lower bound ``f(x) - f*`` from a known optimal value."""

    f_opt: float


@dataclass(frozen=True)
class CGProbe:
    """Lower bound ``f(x) - f(x^n)`` after ``n_probe`` away-step CG steps from ``x``."""

    n_probe: int = 5

    def __post_init__(self):
        if self.n_probe < 1:
            raise ValueError("n_probe must be >= 1")


LowerBoundEstimator = Union[KnownOptimum, CGProbe]


@dataclass(frozen=True)
class SocgsConfig:
    oracle: str = "exact"  # exact | perturbed | identity
    omega: float = 0.0
    oracle_seed: int = 0
    lower_bound: LowerBoundEstimator = field(default_factory=lambda: CGProbe(5))
    inner_cap: int = 1000
    eps_min: float = 1e-16
    stop: StoppingCriterion = field(default_factory=lambda: StoppingCriterion(100, 1e-10))
    line_search: LineSearchConfig = DEFAULT_LINE_SEARCH
    keep_points: bool = False
    audit: bool = False

    def __post_init__(self):
        if self.inner_cap < 1:
            raise ValueError("inner_cap must be >= 1")
        if not self.eps_min > 0:
            raise ValueError("eps_min must be > 0")
        if self.oracle not in ("exact", "perturbed", "identity"):
            raise ValueError(f"unknown Hessian oracle {self.oracle!r}")
        if not isinstance(self.lower_bound, (KnownOptimum, CGProbe)):
            raise ValueError("lower_bound must be KnownOptimum or CGProbe")

    def make_oracle(self, objective):
        if self.oracle == "exact":
            return ExactHessianOracle(objective)
        if self.oracle == "perturbed":
            return PerturbedHessianOracle(objective, self.omega, self.oracle_seed)
        return IdentityHessianOracle(objective.dim)


@dataclass(frozen=True)
class SocgsState:
    main: IterateState
    acg: IterateState
    k: int = 0


@dataclass(frozen=True)
class InnerResult:
    state: IterateState
    steps: int
    exit: str  # "gap" or "cap"
    model_gap: float
    lmo_calls: int


@dataclass(frozen=True)
class OuterInfo:
    """Diagnostics of one outer iteration; points are kept only on request."""

    k: int
    f_pvm: float
    f_acg: float
    f_acg_prev: float
    lb: float
    eps: float
    grad_norm: float
    inner_steps: int
    inner_exit: str
    inner_gap: float
    chosen: str  # "pvm" or "acg"
    x_base: Optional[np.ndarray] = None
    x_pvm: Optional[np.ndarray] = None
    x_acg: Optional[np.ndarray] = None
    model: Optional[QuadraticModel] = None


def epsilon_k(lb: float, grad_norm: float, eps_min: float = 1e-16) -> float:
    """Inner tolerance ``max((lb / grad_norm)**4, eps_min)``."""
    if not grad_norm > 0:
        raise ValueError("gradient norm is zero; the iterate is stationary")
    return max((max(lb, 0.0) / grad_norm) ** 4, eps_min)


def lower_bound(est, objective, region: FeasibleRegion, state: IterateState, f_x=None, grad=None,
                counters: Optional[Counters] = None, ls_cfg: LineSearchConfig = DEFAULT_LINE_SEARCH) -> float:
    """Certified lower bound on ``f(x) - f*`` at ``state.x``, clamped at zero."""
    f_x = objective.value(state.x) if f_x is None else f_x
    if isinstance(est, KnownOptimum):
        return max(f_x - est.f_opt, 0.0)
    if not isinstance(est, CGProbe):
        raise TypeError(f"unknown lower bound estimator {est!r}")
    rule = line_search_for(objective, ls_cfg)
    probe = state
    for i in range(est.n_probe):
        if i == 0 and grad is not None:
            g = grad
        else:
            g = objective.gradient(probe.x)
            if counters is not None:
                counters.fo += 1
        out = acg_step(g, probe, region, rule)
        if counters is not None:
            counters.lmo += out.lmo_calls
        probe = out.state
    return max(f_x - objective.value(probe.x), 0.0)


def inexact_pvm_step(state: IterateState, model: QuadraticModel, region: FeasibleRegion, eps: float,
                     inner_cap: int = 1000, v0=None, audit: bool = False) -> InnerResult:
    """Away-step CG on ``model`` warm-started at ``state`` until its FW gap is < ``eps``.

    ``v0`` is an LMO answer for ``model.gradient(state.x)`` the caller may
    already hold. Stops after ``inner_cap`` steps without raising.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    rule = exact_rule(model.curvature)
    cur = state
    lmo_calls = 0
    steps = 0
    v = v0
    while True:
        g = model.gradient(cur.x)
        if v is None:
            v = region.lmo(g)
            lmo_calls += 1
        gap = float(g @ (cur.x - v.dense))
        if gap < eps:
            return InnerResult(cur, steps, "gap", gap, lmo_calls)
        if steps >= inner_cap:
            return InnerResult(cur, steps, "cap", gap, lmo_calls)
        out = acg_step(g, cur, region, rule, v=v)
        if audit:
            out.state.check()
        steps += 1
        if out.gamma == 0.0:
            # Float noise stalled the inner solve; another step cannot move.
            return InnerResult(cur, steps, "cap", gap, lmo_calls)
        cur = out.state
        v = None


def socgs_outer_iteration(state: SocgsState, objective, region: FeasibleRegion, cfg: SocgsConfig, oracle,
                          counters: Counters, grad=None, v=None, f_x=None, acg_grad=None,
                          f_acg=None) -> tuple[SocgsState, OuterInfo]:
    """One outer iteration; returns the next state and its diagnostics.

    ``grad``/``v``/``f_x`` are ``grad f(x_k)``, its LMO vertex and ``f(x_k)``
    when the caller already computed them (they are charged by the caller).
    """
    x_k = state.main
    if grad is None:
        grad = objective.gradient(x_k.x)
        counters.fo += 1
    if f_x is None:
        f_x = objective.value(x_k.x)
    grad_norm = float(np.linalg.norm(grad))

    # Independent ACG sequence, gradient taken at its own iterate.
    acg_state = state.acg
    same = np.array_equal(acg_state.x, x_k.x)
    if acg_grad is None:
        if same:
            acg_grad = grad
        else:
            acg_grad = objective.gradient(acg_state.x)
            counters.fo += 1
    if f_acg is None:
        f_acg = f_x if same else objective.value(acg_state.x)
    f_acg_prev = f_acg
    out = acg_step(acg_grad, acg_state, region, line_search_for(objective, cfg.line_search),
                   v=v if same else None)
    counters.lmo += out.lmo_calls
    acg_next = out.state
    f_acg_next = objective.value(acg_next.x)

    # Inexact PVM candidate.
    model = QuadraticModel(x_k.x, f_x, grad, oracle(x_k.x))
    counters.hessian += 1
    lb = lower_bound(cfg.lower_bound, objective, region, x_k, f_x=f_x, grad=grad,
                     counters=counters, ls_cfg=cfg.line_search)
    eps = epsilon_k(lb, grad_norm, cfg.eps_min)
    inner = inexact_pvm_step(x_k, model, region, eps, cfg.inner_cap, v0=v, audit=cfg.audit)
    counters.lmo += inner.lmo_calls
    f_pvm = objective.value(inner.state.x)

    if f_pvm <= f_acg_next:
        chosen, main_next = "pvm", inner.state
    else:
        chosen, main_next = "acg", acg_next
    if cfg.audit:
        main_next.check()
        acg_next.check()
        if f_acg_next > f_acg_prev + 1e-12 * max(1.0, abs(f_acg_prev)):
            raise InvariantError(f"ACG sequence increased at outer iteration {state.k}")
    info = OuterInfo(
        k=state.k,
        f_pvm=f_pvm,
        f_acg=f_acg_next,
        f_acg_prev=f_acg_prev,
        lb=lb,
        eps=eps,
        grad_norm=grad_norm,
        inner_steps=inner.steps,
        inner_exit=inner.exit,
        inner_gap=inner.model_gap,
        chosen=chosen,
        x_base=x_k.x.copy() if cfg.keep_points else None,
        x_pvm=inner.state.x.copy() if cfg.keep_points else None,
        x_acg=acg_next.x.copy() if cfg.keep_points else None,
        model=model if cfg.keep_points else None,
    )
    return SocgsState(main_next, acg_next, state.k + 1), info


def run_socgs(objective, region: FeasibleRegion, cfg: SocgsConfig = SocgsConfig(), x_init=None,
              algorithm: str = "socgs") -> SolveTrace:
    """Run SOCGS from the LMO vertex of ``grad f(x_init)``.

    ``x_init`` defaults to the region's lowest-key vertex. Record ``k`` holds
    ``x_k``; ``hessian_calls == iter`` on every record. ``info`` carries one
    `OuterInfo` per outer iteration.
    """
    counters = Counters()
    rec = TraceRecorder(algorithm, f_opt=objective.f_opt, x_opt=objective.x_opt, counters=counters)
    oracle = cfg.make_oracle(objective)

    x_init = region.lowest_vertex().dense if x_init is None else np.asarray(x_init, dtype=float)
    g0 = objective.gradient(x_init)
    counters.fo += 1
    x0 = region.lmo(g0)
    counters.lmo += 1
    start = IterateState.from_vertex(x0)
    state = SocgsState(start, start, 0)

    f_x = objective.value(state.main.x)
    f_acg = f_x
    kind = "acg"
    while True:
        grad = objective.gradient(state.main.x)
        counters.fo += 1
        v = region.lmo(grad)
        counters.lmo += 1
        gap = float(grad @ (state.main.x - v.dense))
        rec.record(state.k, state.main.x, f_x, gap, kind)
        if cfg.stop.done(state.k, gap, rec.elapsed()) or not np.any(grad):
            break
        state, info = socgs_outer_iteration(state, objective, region, cfg, oracle, counters,
                                            grad=grad, v=v, f_x=f_x, f_acg=f_acg)
        rec.add_info(info)
        f_x = min(info.f_pvm, info.f_acg)
        f_acg = info.f_acg
        kind = info.chosen
    return rec.finish(state.main)
