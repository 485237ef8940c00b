"""SOCGS on a quadratic over the Birkhoff polytope.

With an exact Hessian the quadratic model equals ``f``, so one inexact PVM
step solved to tolerance ``eps_k`` lands within ``eps_k`` of the optimum.
"""
# %%
import numpy as np

from socgs import Birkhoff, KnownOptimum, SocgsConfig, StoppingCriterion, random_quadratic, run_acg, run_socgs

region = Birkhoff(4)
center = 0.25 + 0.1 * np.random.default_rng(100).standard_normal(16)
f = random_quadratic(16, cond=100.0, seed=0, center=center)
ref = run_acg(f, region, region.lowest_vertex(), StoppingCriterion(100000, 1e-13))
f = f.with_optimum(ref.final.f, ref.x)

# %%
cfg = SocgsConfig(oracle="exact", lower_bound=KnownOptimum(f.f_opt), stop=StoppingCriterion(10, 1e-12))
soc = run_socgs(f, region, cfg)
print(" k  kind  primal_gap     eps_k      inner  exit")
for rec, info in zip(soc.records[1:], soc.info):
    print(f"{rec.iter:2d}  {rec.step_kind:4s}  {rec.primal_gap:.3e}  {info.eps:.3e}  {info.inner_steps:5d}  {info.inner_exit}")

# %% First-order calls needed to reach primal gap 1e-9.
acg = run_acg(f, region, region.lmo(f.gradient(region.lowest_vertex().dense)), StoppingCriterion(100000, 1e-13))
first = lambda tr: next(r for r in tr.records if r.primal_gap <= 1e-9)
print("SOCGS fo calls:", first(soc).fo_calls, " ACG fo calls:", first(acg).fo_calls)
print("SOCGS lmo calls:", first(soc).lmo_calls, " ACG lmo calls:", first(acg).lmo_calls)
