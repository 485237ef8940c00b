"""Hessian oracles and the accuracy measure eta.

``eta = max(lmax(H^-1 hess), lmax(hess^-1 H))`` measures how far an
approximate Hessian ``H`` distorts the metric of the true one.
"""
# %%
import numpy as np

from socgs import Simplex, StoppingCriterion, eta_of, random_quadratic, run_acg
from socgs import exact_hessian_oracle, identity_hessian_oracle, perturbed_hessian_oracle

region = Simplex(8)
f = random_quadratic(8, cond=30.0, seed=2)
ref = run_acg(f, region, region.vertex(0), StoppingCriterion(100000, 1e-12))
f = f.with_optimum(ref.final.f, ref.x)

# %%
x = np.full(8, 1 / 8)
print("exact    eta =", eta_of(exact_hessian_oracle(f)(x).H, f.A))
print("identity eta =", eta_of(identity_hessian_oracle(8)(x).H, f.A))

# %% The perturbed oracle becomes exact as x approaches x*.
oracle = perturbed_hessian_oracle(f, omega=0.5, seed=0)
for t in (1.0, 0.3, 0.1, 0.01, 0.0):
    xt = f.x_opt + t * (x - f.x_opt)
    d2 = float(np.sum((xt - f.x_opt) ** 2))
    eta = eta_of(oracle(xt).H, f.A)
    print(f"t={t:5.2f}  eta-1={eta - 1:.3e}  omega*d^2={0.5 * d2:.3e}")

# %% Sandwich: ||v||_hess^2 lies within a factor eta of ||v||_H^2.
H = oracle(x).H
eta = eta_of(H, f.A)
V = np.random.default_rng(0).standard_normal((1000, 8))
ratio = np.einsum("ij,jk,ik->i", V, f.A, V) / np.einsum("ij,jk,ik->i", V, H, V)
print(f"ratio range [{ratio.min():.4f}, {ratio.max():.4f}] inside [{1 / eta:.4f}, {eta:.4f}]")
