"""Sparse logistic regression over the l1 ball with an unknown optimum.

The inner tolerance uses the ``cg_probe`` lower bound: the decrease achieved
by a few away-step CG steps bounds the primal gap from below.
"""
# %%
from socgs import CGProbe, L1Ball, SocgsConfig, StoppingCriterion, logistic_data, logistic_objective, run_socgs
from socgs.bench import REFERENCE_LINE_SEARCH
from socgs import run_acg

Z, y = logistic_data(50, 200, seed=0)
f = logistic_objective(Z, y, lam=1 / 200)
region = L1Ball(50, 1.0)
ref = run_acg(f, region, region.lowest_vertex(), StoppingCriterion(100000, 1e-12), ls_cfg=REFERENCE_LINE_SEARCH)
f = f.with_optimum(ref.final.f, ref.x)
print(f"reference f* = {ref.final.f!r}, support size {int((abs(ref.x) > 1e-10).sum())}")

# %%
for oracle in ("exact", "perturbed", "identity"):
    cfg = SocgsConfig(oracle=oracle, omega=0.1, lower_bound=CGProbe(5), stop=StoppingCriterion(200, 1e-9))
    tr = run_socgs(f, region, cfg)
    wins = sum(i.chosen == "pvm" for i in tr.info)
    print(f"{oracle:9s} outer={tr.final.iter:3d} pvm wins={wins:3d} fo={tr.final.fo_calls:4d} "
          f"lmo={tr.final.lmo_calls:6d} primal gap={tr.final.primal_gap:.2e}")

# %% Lower bound vs true gap along a run.
tr = run_socgs(f, region, SocgsConfig(stop=StoppingCriterion(6, 1e-12)))
for info, rec in zip(tr.info, tr.records):
    print(f"k={info.k}: lb={info.lb:.3e} <= gap={rec.primal_gap:.3e}")
